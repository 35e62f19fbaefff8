"""Spin-chain and SSH model builders, quench families and closed-form references.

Spin chains are emitted in Nambu form with

* Ising:          ``X = -sin k``,                 ``Z = h - cos k``
* XY:             ``X = -gamma sin k``,           ``Z = h - cos k``
* cluster Ising:  ``X = sin 2k + lambda sin k``,  ``Z = -cos 2k + lambda cos k``

The sign of the overall Ising Hamiltonian is immaterial: the stored energy
is invariant when both quench phases flip sign together.

The SSH chain is a two-band d-vector model per unit cell (dimer) with
odd-neighbour hoppings ``J1, J1p, J3, J3p`` between sublattices and an
even-neighbour hopping ``J2`` within each sublattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Optional

import numpy as np

from .engine import QuenchSpec
from .quadrature import integrate
from .spectral import BzGrid, DVectorModel, NambuModel

# ---------------------------------------------------------------------------
# parameter sets


@dataclass(frozen=True)
class IsingParams:
    h: float


@dataclass(frozen=True)
class XYParams:
    gamma: float
    h: float = 0.0


@dataclass(frozen=True)
class ClusterIsingParams:
    lam: float


class ProtocolError(ValueError):
    """Hopping set outside the physically admissible region."""


@dataclass(frozen=True)
class SSHParams:
    """Hoppings of the extended SSH chain; primed values are intra-cell."""

    J1: float = 1.0
    J1p: float = 1.0
    J2: float = 0.0
    J3: float = 0.0
    J3p: float = 0.0

    @classmethod
    def dimerized(cls, delta: float, J2: float = 0.0) -> "SSHParams":
        """Nearest-neighbour chain with ``J1 = 1 - delta`` and ``J1p = 1 + delta``."""
        return cls(J1=1.0 - delta, J1p=1.0 + delta, J2=J2)

    @classmethod
    def from_dimerization(cls, delta1: float, delta3: float = 0.0, alpha: float = 1.0, beta_c: float = 1.0,
                          r: float = 0.0, J2: float = 0.0) -> "SSHParams":
        """``J1 = 1 - alpha d1``, ``J1p = 1 + alpha d1``, ``J3 = r - beta_c d3``, ``J3p = r + beta_c d3``."""
        return cls(J1=1.0 - alpha * delta1, J1p=1.0 + alpha * delta1, J2=J2,
                   J3=r - beta_c * delta3, J3p=r + beta_c * delta3)

    def validity_violations(self) -> list:
        """Inequalities ``|J1|, |J1p| > |J3|, |J3p|`` that fail, as text."""
        out = []
        for near, nv in (("J1", self.J1), ("J1p", self.J1p)):
            for far, fv in (("J3", self.J3), ("J3p", self.J3p)):
                if not abs(nv) > abs(fv):
                    out.append(f"|{near}| > |{far}| ({abs(nv):.6g} vs {abs(fv):.6g})")
        return out

    def check_valid(self):
        bad = self.validity_violations()
        if bad:
            raise ProtocolError("nearest-neighbour hoppings must dominate third-neighbour ones: "
                                + "; ".join(bad) + " violated")
        return self


# ---------------------------------------------------------------------------
# evaluators (module level so models pickle across worker processes)


def _ising(h, k):
    return -np.sin(k), h - np.cos(k)


def _xy(gamma, h, k):
    return -gamma * np.sin(k), h - np.cos(k)


def _cluster(lam, k):
    return np.sin(2 * k) + lam * np.sin(k), -np.cos(2 * k) + lam * np.cos(k)


def _ssh(J1, J1p, J2, J3, J3p, k):
    d0 = 2.0 * J2 * np.cos(k)
    d1 = J1p + J1 * np.cos(k) + J3p * np.cos(k) + J3 * np.cos(2 * k)
    d2 = J1 * np.sin(k) + J3 * np.sin(2 * k) - J3p * np.sin(k)
    return d0, d1, d2, np.zeros_like(k)


def build_ising(params: IsingParams) -> NambuModel:
    h = float(params.h)
    return NambuModel(partial(_ising, h), name="ising", params={"h": h})


def build_xy(params: XYParams) -> NambuModel:
    g, h = float(params.gamma), float(params.h)
    return NambuModel(partial(_xy, g, h), name="xy", params={"gamma": g, "h": h})


def build_cluster_ising(params: ClusterIsingParams) -> NambuModel:
    """Cluster Ising chain; its Hamiltonian carries an extra global factor 2
    (``hamiltonian_prefactor = 2`` against the standard 1/2), which only the
    density-matrix oracle applies on request."""
    lam = float(params.lam)
    return NambuModel(partial(_cluster, lam), name="cluster", params={"lambda": lam},
                      hamiltonian_prefactor=2.0)


def build_ssh(params: SSHParams, max_neighbor: int = 3) -> DVectorModel:
    """SSH chain keeping hoppings up to ``max_neighbor`` (1, 2 or 3)."""
    if max_neighbor not in (1, 2, 3):
        raise ValueError(f"max_neighbor must be 1, 2 or 3, got {max_neighbor!r}")
    J1, J1p = float(params.J1), float(params.J1p)
    J2 = float(params.J2) if max_neighbor >= 2 else 0.0
    J3, J3p = (float(params.J3), float(params.J3p)) if max_neighbor >= 3 else (0.0, 0.0)
    hop = {"J1": J1, "J1p": J1p, "J2": J2, "J3": J3, "J3p": J3p}
    return DVectorModel(partial(_ssh, J1, J1p, J2, J3, J3p), name="ssh", params=hop)


# ---------------------------------------------------------------------------
# parameter dictionaries and quench families

MODEL_FIELDS = {
    "ising": ("h",),
    "xy": ("gamma", "h"),
    "cluster": ("lambda",),
    "ssh": ("J1", "J1p", "J2", "J3", "J3p", "delta1", "delta3", "alpha", "beta_c", "r", "m", "q"),
}

_DEFAULTS = {
    "ising": {"h": 0.0},
    "xy": {"gamma": 1.0, "h": 0.0},
    "cluster": {"lambda": 0.0},
    "ssh": {"J1": 1.0, "J1p": 1.0, "J2": 0.0, "J3": 0.0, "J3p": 0.0, "alpha": 1.0, "beta_c": 1.0, "r": 0.0},
}


def ssh_params_from_dict(p: dict) -> SSHParams:
    """Hoppings from raw values, overridden by dimerizations when present.

    ``delta1`` sets ``J1, J1p``; ``delta3`` (or the line ``m * delta1 + q``)
    sets ``J3, J3p``.
    """
    q = {**_DEFAULTS["ssh"], **p}
    J1, J1p, J3, J3p = q["J1"], q["J1p"], q["J3"], q["J3p"]
    d1 = q.get("delta1")
    d3 = q.get("delta3")
    if d3 is None and d1 is not None and "m" in q and "q" in q:
        d3 = q["m"] * d1 + q["q"]
    if d1 is not None:
        J1, J1p = 1.0 - q["alpha"] * d1, 1.0 + q["alpha"] * d1
    if d3 is not None:
        J3, J3p = q["r"] - q["beta_c"] * d3, q["r"] + q["beta_c"] * d3
    return SSHParams(J1=J1, J1p=J1p, J2=q["J2"], J3=J3, J3p=J3p)


def model_from_dict(kind: str, params: dict):
    """Build a model from a flat parameter dictionary (config field names)."""
    if kind not in MODEL_FIELDS:
        raise KeyError(f"unknown model {kind!r}; expected one of {sorted(MODEL_FIELDS)}")
    unknown = set(params) - set(MODEL_FIELDS[kind])
    if unknown:
        raise KeyError(f"unknown {kind} parameter(s): {', '.join(sorted(unknown))}")
    p = {**_DEFAULTS[kind], **{k: float(v) for k, v in params.items()}}
    if kind == "ising":
        return build_ising(IsingParams(p["h"]))
    if kind == "xy":
        return build_xy(XYParams(p["gamma"], p["h"]))
    if kind == "cluster":
        return build_cluster_ising(ClusterIsingParams(p["lambda"]))
    return build_ssh(ssh_params_from_dict(p))


SWEEP_TARGETS = ("initial", "final", "increment")


@dataclass(frozen=True)
class QuenchFamily:
    """One model parameter switched from an initial to a charging value.

    The charging value is ``final`` when given, otherwise ``initial +
    increment``.  ``initial`` defaults to the value in ``base``.
    """

    model: str
    parameter: str
    base: dict = field(default_factory=dict)
    initial: Optional[float] = None
    final: Optional[float] = None
    increment: Optional[float] = None

    def __post_init__(self):
        if self.model not in MODEL_FIELDS:
            raise KeyError(f"unknown model {self.model!r}")
        if self.parameter not in MODEL_FIELDS[self.model]:
            raise KeyError(f"model {self.model!r} has no parameter {self.parameter!r}")

    def endpoints(self, value=None, target=None):
        a, b, inc = self.initial, self.final, self.increment
        if target == "initial":
            a = value
        elif target == "final":
            b, inc = value, None
        elif target == "increment":
            b, inc = None, value
        elif target is not None:
            raise ValueError(f"sweep target must be one of {SWEEP_TARGETS}, got {target!r}")
        if a is None:
            a = self.base.get(self.parameter, _DEFAULTS[self.model].get(self.parameter))
        if a is None:
            raise ValueError(f"no initial value for {self.model}.{self.parameter}")
        if b is None:
            if inc is None:
                raise ValueError("quench needs a final value or an increment")
            b = a + inc
        return float(a), float(b)

    def models(self, value=None, target=None):
        a, b = self.endpoints(value, target)
        return (model_from_dict(self.model, {**self.base, self.parameter: a}),
                model_from_dict(self.model, {**self.base, self.parameter: b}))

    def spec(self, value=None, target=None, tau=math.inf) -> QuenchSpec:
        a, b = self.models(value, target)
        return QuenchSpec(a, b, tau)


def ising_quench(h0, h1, tau=math.inf) -> QuenchSpec:
    """Field switched from ``h0`` to ``h0 + h1``."""
    return QuenchSpec(build_ising(IsingParams(h0)), build_ising(IsingParams(h0 + h1)), tau)


def xy_quench(gamma0, gamma1, h0=0.0, h1=0.0, tau=math.inf) -> QuenchSpec:
    """Anisotropy and field switched from ``(gamma0, h0)`` to ``(gamma1, h1)``."""
    return QuenchSpec(build_xy(XYParams(gamma0, h0)), build_xy(XYParams(gamma1, h1)), tau)


def cluster_quench(lam0, lam1, tau=math.inf) -> QuenchSpec:
    """Coupling switched from ``lam0`` to ``lam0 + lam1``."""
    return QuenchSpec(build_cluster_ising(ClusterIsingParams(lam0)),
                      build_cluster_ising(ClusterIsingParams(lam0 + lam1)), tau)


def ssh_quench(delta0, delta1, J2=0.0, tau=math.inf) -> QuenchSpec:
    """Nearest-neighbour dimerization switched from ``delta0`` to ``delta0 + delta1``."""
    return QuenchSpec(build_ssh(SSHParams.dimerized(delta0, J2)),
                      build_ssh(SSHParams.dimerized(delta0 + delta1, J2)), tau)


def ssh_constrained_protocol(delta1_0, delta1_1, m, q, alpha=1.0, beta_c=1.0, r=0.0, J2=0.0,
                             tau=math.inf) -> QuenchSpec:
    """Quench along the line ``delta3 = m delta1 + q``.

    Both endpoints must satisfy ``|J1|, |J1p| > |J3|, |J3p|``; with ``r = -1``
    the bands touch at ``k = 0`` for every dimerization and no endpoint is
    admissible.
    """
    if r == -1:
        raise ProtocolError("r = -1 closes the gap at k = 0 for every dimerization")
    ends = []
    for d1 in (delta1_0, delta1_0 + delta1_1):
        p = SSHParams.from_dimerization(d1, m * d1 + q, alpha, beta_c, r, J2)
        try:
            p.check_valid()
        except ProtocolError as exc:
            raise ProtocolError(f"delta1 = {d1:.6g}: {exc}") from None
        ends.append(build_ssh(p))
    return QuenchSpec(ends[0], ends[1], tau)


def ssh_qpt_line(delta1, alpha=1.0, beta_c=1.0):
    """``delta3`` on the gap-closing line of the third-neighbour chain at ``r = 0``."""
    return alpha / beta_c * delta1


# ---------------------------------------------------------------------------
# closed forms


def ising_plateau_closed_form(h_f):
    """Zero-temperature plateau per site for a quench from ``h = 0`` to ``h_f``."""
    h_f = np.asarray(h_f, dtype=float)
    out = np.where(np.abs(h_f) >= 1.0, 0.25, 0.25 * h_f * h_f)
    return out if out.ndim else float(out)


def xy_plateau_closed_form(gamma1):
    """Zero-temperature plateau per site for ``gamma: 1 -> gamma1`` at zero field."""
    g = np.asarray(gamma1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = 0.25 * (g - 1.0) ** 2 / (g + 1.0) ** 2
    out = np.where(g <= 0.0, 0.25, pos)
    return out if out.ndim else float(out)


def xy_integrand(k, gamma1):
    """``(sin^4 k - sin^2 k) / (1 + (gamma1^2 - 1) sin^2 k)``."""
    s2 = np.sin(k) ** 2
    return (s2 * s2 - s2) / (1.0 + (gamma1 * gamma1 - 1.0) * s2)


def _check_gamma(gamma1):
    if abs(abs(gamma1) - 1.0) < 1e-12:
        raise ValueError("gamma1 = +-1 makes the decomposition singular")


def xy_integrand_decomposition(k, gamma1):
    """Antiderivative of :func:`xy_integrand` split into its two pieces.

    Returns ``(piece1, piece2, total)`` where ``piece1`` is the arctangent
    term and ``piece2`` the polynomial/trigonometric term.  ``piece1`` jumps
    at odd multiples of pi/2, which are rejected.
    """
    _check_gamma(gamma1)
    k = np.asarray(k, dtype=float)
    if np.any(np.abs(np.cos(k)) < 1e-12):
        raise ValueError("k at an odd multiple of pi/2: the arctangent piece is discontinuous there")
    g2m1 = gamma1 * gamma1 - 1.0
    piece1 = gamma1 / g2m1**2 * np.arctan(gamma1 * np.tan(k))
    piece2 = -gamma1 * gamma1 / g2m1**2 * k + (0.5 * k - 0.25 * np.sin(2 * k)) / g2m1
    return piece1, piece2, piece1 + piece2


def xy_definite_integral(gamma1):
    """Integral of :func:`xy_integrand` over ``[0, pi]``.

    The arctangent piece is evaluated on ``[0, pi/2)`` and ``(pi/2, pi]``
    separately: each branch contributes ``sign(gamma1) pi/2`` times its
    prefactor.
    """
    _check_gamma(gamma1)
    g2m1 = gamma1 * gamma1 - 1.0
    pref = gamma1 / g2m1**2
    half = math.copysign(math.pi / 2, gamma1) if gamma1 != 0 else 0.0
    # [0, pi/2): 0 -> half; (pi/2, pi]: -half -> 0
    arctan_part = 2.0 * pref * half
    _, p2_end, _ = xy_integrand_decomposition(math.pi, gamma1)
    _, p2_start, _ = xy_integrand_decomposition(0.0, gamma1)
    return float(arctan_part + (p2_end - p2_start))


def xy_plateau_from_integral(gamma1):
    """Plateau per site ``-(1 - gamma1)^2 / (2 pi) * integral``."""
    return -(1.0 - gamma1) ** 2 / (2.0 * math.pi) * xy_definite_integral(gamma1)


# ---------------------------------------------------------------------------
# capacity


def _capacity_density(model, k):
    if isinstance(model, NambuModel):
        x, z = model.components(k)
        return np.hypot(x, z)
    _, d1, d2, d3 = model.components(k)
    return 2.0 * np.sqrt(d1 * d1 + d2 * d2 + d3 * d3)


def storage_capacity(model, grid: BzGrid) -> float:
    """Largest energy per site (unit cell) the initial model can absorb.

    Nambu chains: the mean of ``epsilon_S(k)``.  Two-band d-vector chains at
    half filling: the mean of ``2 |d(k)|``, the gap between the two bands.
    """
    if grid.is_finite:
        v = _capacity_density(model, grid.momenta(model.dim))
        return math.fsum(v.ravel()) / v.size
    if model.dim != 1:
        raise ValueError("thermodynamic-limit capacity is implemented for one-dimensional models")
    value, _ = integrate(partial(_capacity_density, model), -np.pi, np.pi, rtol=grid.rtol)
    return value / (2.0 * np.pi)


def percent_of_capacity(energy, capacity):
    return 100.0 * np.asarray(energy) / capacity


__all__ = [
    "IsingParams", "XYParams", "ClusterIsingParams", "SSHParams", "ProtocolError",
    "build_ising", "build_xy", "build_cluster_ising", "build_ssh",
    "MODEL_FIELDS", "SWEEP_TARGETS", "model_from_dict", "ssh_params_from_dict", "QuenchFamily",
    "ising_quench", "xy_quench", "cluster_quench", "ssh_quench", "ssh_constrained_protocol", "ssh_qpt_line",
    "ising_plateau_closed_form", "xy_plateau_closed_form", "xy_integrand", "xy_integrand_decomposition",
    "xy_definite_integral", "xy_plateau_from_integral", "storage_capacity", "percent_of_capacity",
]
