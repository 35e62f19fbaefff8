"""Per-momentum spectral quantities of two-band free-fermion Hamiltonians.

Two symmetry classes are covered:

* particle-number conserving two-band models, ``d0 * I + d . sigma`` per momentum
  (:class:`DVectorModel`);
* single-species models with pairing written in Nambu form,
  ``(1/2) Psi^dag (X sigma_x + Z sigma_z) Psi`` (:class:`NambuModel`).

Energies are measured in units of the global coupling of each model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

# Below this value of (d1^B)^2 + (d2^B)^2 the geometric numerator is evaluated
# through its analytic limit.
F0_SINGULAR_TOL = 1e-12

NAMBU_PREFACTOR = 0.5


class ModelEvaluationError(ValueError):
    """A model returned non-finite components."""


def _check_finite(name, k, *arrays):
    for arr in arrays:
        bad = ~np.isfinite(arr)
        if np.any(bad):
            where = np.asarray(k)[tuple(np.argwhere(bad)[0])]
            raise ModelEvaluationError(f"{name}: non-finite component at k={where!r}")


def _as_momenta(k, dim):
    k = np.asarray(k, dtype=float)
    if dim > 1 and k.shape[-1:] != (dim,):
        raise ValueError(f"expected momenta with trailing dimension {dim}, got shape {k.shape}")
    return k


@dataclass(frozen=True)
class DVectorModel:
    """Two-band Bloch Hamiltonian ``d0(k) I + d(k) . sigma``.

    ``evaluator`` maps an array of momenta to the four components
    ``(d0, d1, d2, d3)``.  For ``dim > 1`` momenta carry a trailing axis of
    length ``dim``.  The evaluator must be vectorized and deterministic.
    """

    evaluator: Callable
    dim: int = 1
    name: str = "dvector"
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def components(self, k):
        k = _as_momenta(k, self.dim)
        shape = k.shape if self.dim == 1 else k.shape[:-1]
        out = tuple(np.broadcast_to(np.asarray(c, dtype=float), shape) for c in self.evaluator(k))
        if len(out) != 4:
            raise ModelEvaluationError(f"{self.name}: evaluator must return 4 components")
        _check_finite(self.name, k, *out)
        return out

    __call__ = components


@dataclass(frozen=True)
class NambuModel:
    """Nambu Hamiltonian ``X(k) sigma_x + Z(k) sigma_z``.

    ``hamiltonian_prefactor`` is the global factor in front of the momentum sum
    in the physical Hamiltonian; the stored-energy formula assumes the standard
    value 1/2.  It is only consulted by the density-matrix oracle.
    """

    evaluator: Callable
    dim: int = 1
    name: str = "nambu"
    params: dict = field(default_factory=dict, compare=False, hash=False)
    hamiltonian_prefactor: float = NAMBU_PREFACTOR

    def components(self, k):
        k = _as_momenta(k, self.dim)
        shape = k.shape if self.dim == 1 else k.shape[:-1]
        out = tuple(np.broadcast_to(np.asarray(c, dtype=float), shape) for c in self.evaluator(k))
        if len(out) != 2:
            raise ModelEvaluationError(f"{self.name}: evaluator must return (X, Z)")
        _check_finite(self.name, k, *out)
        return out

    __call__ = components


@dataclass(frozen=True)
class ThermalSpec:
    """Initial grand-canonical state: inverse temperature and chemical potential.

    ``beta = math.inf`` selects the ground state.  ``mu`` is ignored by the
    superconducting class.
    """

    beta: float = math.inf
    mu: float = 0.0

    def __post_init__(self):
        beta = float(self.beta)
        if math.isnan(beta) or beta <= 0:
            raise ValueError(f"beta must be positive or inf, got {self.beta!r}")
        if not math.isfinite(float(self.mu)):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)


@dataclass(frozen=True)
class BzGrid:
    """Brillouin-zone discretization.

    With ``n`` set, momenta are the ``n`` points ``-pi + 2 pi (j + 1/2)/n``
    (``offset="half"``) or ``-pi + 2 pi j/n`` (``offset="integer"``) and sums
    are divided by ``n``.  With ``n=None`` the zone is integrated adaptively to
    relative tolerance ``rtol``, starting from ``resolution`` panels.
    """

    n: Optional[int] = None
    offset: str = "half"
    rtol: float = 1e-9
    resolution: int = 16
    max_intervals: int = 50000

    def __post_init__(self):
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise ValueError(f"site count must be a positive integer, got {self.n!r}")
        if self.offset not in ("half", "integer"):
            raise ValueError(f"offset must be 'half' or 'integer', got {self.offset!r}")
        if not self.rtol > 0:
            raise ValueError("rtol must be positive")

    @classmethod
    def finite(cls, n: int, offset: str = "half") -> "BzGrid":
        return cls(n=int(n), offset=offset)

    @classmethod
    def thermodynamic(cls, rtol: float = 1e-9, resolution: int = 16) -> "BzGrid":
        return cls(n=None, rtol=rtol, resolution=resolution)

    @property
    def is_finite(self) -> bool:
        return self.n is not None

    def momenta(self, dim: int = 1) -> np.ndarray:
        if self.n is None:
            raise ValueError("thermodynamic-limit grid has no discrete momenta")
        shift = 0.5 if self.offset == "half" else 0.0
        k = -np.pi + 2.0 * np.pi * (np.arange(self.n) + shift) / self.n
        if dim == 1:
            return k
        mesh = np.meshgrid(*([k] * dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def describe(self) -> dict:
        if self.n is None:
            return {"mode": "thermodynamic", "rtol": self.rtol, "resolution": self.resolution}
        return {"mode": "finite", "n": self.n, "offset": self.offset}


# ---------------------------------------------------------------------------
# dispersions


def dispersion_nonsc(model: DVectorModel, k):
    """Upper-band energy ``d0 + |d|`` and the diagonal term ``d0``."""
    d0, d1, d2, d3 = model.components(k)
    return d0 + np.sqrt(d1 * d1 + d2 * d2 + d3 * d3), d0


def dispersion_sc(model: NambuModel, k):
    x, z = model.components(k)
    return np.hypot(x, z)


# ---------------------------------------------------------------------------
# geometric numerator


def f0_from_components(a1, a2, a3, b1, b2, b3):
    """Geometric numerator of the stored energy for vectors ``a`` (initial) and ``b``.

    Evaluated in the printed square-root form.  Where ``b1^2 + b2^2`` falls
    below :data:`F0_SINGULAR_TOL` the expression is a removable singularity and
    the algebraically identical ``|a x b|^2`` is returned instead.
    """
    a1, a2, a3, b1, b2, b3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a1, a2, a3, b1, b2, b3)))
    s2 = b1 * b1 + b2 * b2
    omega2 = s2 + b3 * b3
    regular = s2 >= F0_SINGULAR_TOL
    s2_safe = np.where(regular, s2, 1.0)
    s = np.sqrt(s2_safe)
    cross3 = a1 * b2 - a2 * b1
    inplane = a1 * b1 + a2 * b2
    printed = omega2 / s2_safe * cross3**2 + (a3 * s - b3 * inplane / s) ** 2
    cx = a2 * b3 - a3 * b2
    cy = a3 * b1 - a1 * b3
    limit = cx * cx + cy * cy + cross3 * cross3
    out = np.where(regular, printed, limit)
    return out if out.ndim else float(out)


def f0_numerator(model_a: DVectorModel, model_b: DVectorModel, k):
    _, a1, a2, a3 = model_a.components(k)
    _, b1, b2, b3 = model_b.components(k)
    return f0_from_components(a1, a2, a3, b1, b2, b3)


# ---------------------------------------------------------------------------
# thermal weights


def _fermi_step(x):
    return np.where(x < 0, 1.0, np.where(x > 0, 0.0, 0.5))


def fermi_weight(half_gap, d0, beta, mu=0.0):
    """Occupation difference ``n_F(d0 - |d|) - n_F(d0 + |d|)`` of the two levels.

    Same-side level pairs are combined analytically so that the small
    difference of two nearly equal Fermi factors keeps full relative accuracy.
    """
    half_gap, d0 = np.broadcast_arrays(np.asarray(half_gap, dtype=float), np.asarray(d0, dtype=float))
    if math.isinf(beta):
        out = _fermi_step(d0 - half_gap - mu) - _fermi_step(d0 + half_gap - mu)
        return out if out.ndim else float(out)
    a = beta * (d0 - half_gap - mu)
    b = beta * (d0 + half_gap - mu)
    gap = b - a
    with np.errstate(over="ignore", invalid="ignore"):
        straddle = 0.5 * (np.tanh(0.5 * b) - np.tanh(0.5 * a))
        ea = np.exp(-np.abs(a))
        eb = np.exp(-np.abs(b))
        # both levels above mu
        above = ea * -np.expm1(-gap) / ((1.0 + ea) * (1.0 + eb))
        # both levels below mu
        below = eb * -np.expm1(-gap) / ((1.0 + ea) * (1.0 + eb))
    out = np.where(a > 0, above, np.where(b < 0, below, straddle))
    return out if out.ndim else float(out)


def sinh_cosh_weight(half_gap, d0, beta, mu=0.0):
    """``sinh(beta |d|) / (cosh(beta |d|) + cosh(beta (d0 - mu)))``, overflow-safe."""
    half_gap, d0 = np.broadcast_arrays(np.asarray(half_gap, dtype=float), np.asarray(d0, dtype=float))
    if math.isinf(beta):
        off = np.abs(d0 - mu)
        out = np.where(half_gap > off, 1.0, np.where(half_gap < off, 0.0, 0.5))
        out = np.where(half_gap > 0, out, 0.0)
        return out if out.ndim else float(out)
    x = beta * np.abs(d0 - mu)
    y = beta * half_gap
    m = np.maximum(x, y)
    num = np.exp(y - m) * -np.expm1(-2.0 * y)
    den = np.exp(x - m) * (1.0 + np.exp(-2.0 * x)) + np.exp(y - m) * (1.0 + np.exp(-2.0 * y))
    out = num / den
    return out if out.ndim else float(out)


def pairing_weight(eps, beta):
    """``tanh(beta eps / 2)`` with its zero-temperature sign limit."""
    eps = np.asarray(eps, dtype=float)
    out = (eps > 0).astype(float) if math.isinf(beta) else np.tanh(0.5 * beta * eps)
    return out if out.ndim else float(out)


def thermal_weight(model: DVectorModel, k, thermal: ThermalSpec, form: str = "sinhcosh"):
    """Thermal/filling weight of the initial model at momentum ``k``."""
    d0, d1, d2, d3 = model.components(k)
    half_gap = np.sqrt(d1 * d1 + d2 * d2 + d3 * d3)
    if form == "sinhcosh":
        return sinh_cosh_weight(half_gap, d0, thermal.beta, thermal.mu)
    if form == "fermi":
        return fermi_weight(half_gap, d0, thermal.beta, thermal.mu)
    raise ValueError(f"unknown thermal weight form {form!r}")
