"""Stored energy of a double sudden quench applied to a thermal two-band state.

The system is prepared in the thermal state of ``phase_a``, evolved with
``phase_b`` for a time ``tau`` and measured with ``phase_a`` again.  Each
momentum contributes

    g(k) * (1 - cos(2 omega(k) tau)) / omega(k)^2

where ``omega`` is the charging dispersion and ``g`` collects the geometric
numerator, the thermal weight and the initial dispersion.  ``tau = inf``
replaces the oscillating factor by its time average.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar

from . import kernels
from .quadrature import integrate, local_minima
from .spectral import (
    BzGrid, DVectorModel, NambuModel, ThermalSpec, fermi_weight, sinh_cosh_weight,
)

Model = Union[DVectorModel, NambuModel]

DEFAULT_POWER_TAUS = np.geomspace(1e-3, 50.0, 400)


@dataclass(frozen=True)
class QuenchSpec:
    """Initial model, charging model and charging duration."""

    phase_a: Model
    phase_b: Model
    tau: float = math.inf

    def __post_init__(self):
        if type(self.phase_a) is not type(self.phase_b):
            raise TypeError("phase_a and phase_b must belong to the same symmetry class")
        if self.phase_a.dim != self.phase_b.dim:
            raise ValueError("phase_a and phase_b must share the momentum dimension")
        tau = float(self.tau)
        if math.isnan(tau) or tau < 0:
            raise ValueError(f"tau must be non-negative, got {self.tau!r}")
        object.__setattr__(self, "tau", tau)

    @property
    def superconducting(self) -> bool:
        return isinstance(self.phase_a, NambuModel)

    def at(self, tau: float) -> "QuenchSpec":
        return replace(self, tau=tau)


@dataclass(frozen=True)
class EnergyCurve:
    tau: np.ndarray
    energy: np.ndarray
    grid: BzGrid
    thermal: ThermalSpec

    def __len__(self):
        return len(self.tau)


def mode_data(spec: QuenchSpec, k, thermal: ThermalSpec, ft_form: str = "sinhcosh"):
    """Per-momentum amplitude ``g`` and charging frequency ``omega``."""
    if spec.superconducting:
        xa, za = spec.phase_a.components(k)
        xb, zb = spec.phase_b.components(k)
        return kernels.sc_amplitude(xa, za, xb, zb, thermal.beta), np.hypot(xb, zb)
    d0a, a1, a2, a3 = spec.phase_a.components(k)
    _, b1, b2, b3 = spec.phase_b.components(k)
    half_gap = np.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
    if ft_form == "sinhcosh":
        ft = sinh_cosh_weight(half_gap, d0a, thermal.beta, thermal.mu)
    elif ft_form == "fermi":
        ft = fermi_weight(half_gap, d0a, thermal.beta, thermal.mu)
    else:
        raise ValueError(f"unknown thermal weight form {ft_form!r}")
    g = kernels.nonsc_amplitude(a1, a2, a3, b1, b2, b3, ft)
    return g, np.sqrt(b1 * b1 + b2 * b2 + b3 * b3)


def _gap(model, k):
    if isinstance(model, NambuModel):
        x, z = model.components(k)
        return np.hypot(x, z)
    _, d1, d2, d3 = model.components(k)
    return np.sqrt(d1 * d1 + d2 * d2 + d3 * d3)


def _filling_edge(model, mu, k):
    d0, d1, d2, d3 = model.components(k)
    return np.abs(np.abs(d0 - mu) - np.sqrt(d1 * d1 + d2 * d2 + d3 * d3))


def zone_breakpoints(spec: QuenchSpec, thermal: ThermalSpec):
    """Momenta where the integrand may be non-smooth: gap minima of both phases,
    and at zero temperature the points where a band crosses the chemical potential."""
    points = local_minima(partial(_gap, spec.phase_a)) + local_minima(partial(_gap, spec.phase_b))
    if not spec.superconducting and thermal.zero_temperature:
        points += local_minima(partial(_filling_edge, spec.phase_a, thermal.mu))
    return sorted(points)


def _zone_integrand(spec, thermal, tau, ft_form, k):
    g, omega = mode_data(spec, k, thermal, ft_form)
    return g * kernels.oscillation_factor(omega, tau)


def _thermodynamic(spec, grid, thermal, tau, ft_form):
    if spec.phase_a.dim != 1:
        raise ValueError("thermodynamic-limit integration is implemented for one-dimensional models")
    f = partial(_zone_integrand, spec, thermal, float(tau), ft_form)
    value, _ = integrate(f, -np.pi, np.pi, zone_breakpoints(spec, thermal), rtol=grid.rtol,
                         initial=grid.resolution, max_intervals=grid.max_intervals)
    return value / (2.0 * np.pi)


def _finite(spec, grid, thermal, taus, ft_form):
    k = grid.momenta(spec.phase_a.dim)
    g, omega = mode_data(spec, k, thermal, ft_form)
    return kernels.oscillation_sum(g, omega, np.asarray(taus, dtype=float)) / len(g)


def stored_energy(spec: QuenchSpec, grid: BzGrid, thermal: ThermalSpec, ft_form: str = "sinhcosh") -> float:
    """Stored energy per site (per unit cell for two-band lattices)."""
    if grid.is_finite:
        return float(_finite(spec, grid, thermal, [spec.tau], ft_form)[0])
    return _thermodynamic(spec, grid, thermal, spec.tau, ft_form)


def stored_energy_nonsc(spec: QuenchSpec, grid: BzGrid, thermal: ThermalSpec, ft_form: str = "sinhcosh") -> float:
    if spec.superconducting:
        raise TypeError("expected d-vector models")
    return stored_energy(spec, grid, thermal, ft_form)


def stored_energy_sc(spec: QuenchSpec, grid: BzGrid, thermal: ThermalSpec) -> float:
    if not spec.superconducting:
        raise TypeError("expected Nambu models")
    return stored_energy(spec, grid, thermal)


def parallel_map(fn, items, workers=1):
    """Ordered map; process pool when ``workers > 1``."""
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_taus(taus):
    taus = np.asarray(taus, dtype=float).ravel()
    if np.any(np.isnan(taus)) or np.any(taus < 0):
        raise ValueError("tau grid must be non-negative")
    if np.any(np.diff(taus) < 0):
        raise ValueError("tau grid must be sorted")
    return taus


def energy_curve(spec: QuenchSpec, taus, grid: BzGrid, thermal: ThermalSpec, workers: int = 1,
                 ft_form: str = "sinhcosh") -> EnergyCurve:
    """Stored energy at every duration in ``taus`` (``spec.tau`` is ignored)."""
    taus = _check_taus(taus)
    if grid.is_finite:
        chunks = np.array_split(taus, max(1, min(workers or 1, len(taus))))
        parts = parallel_map(partial(_finite, spec, grid, thermal, ft_form=ft_form), chunks, workers)
        energy = np.concatenate(parts) if parts else np.empty(0)
    else:
        energy = np.array(parallel_map(partial(_thermodynamic, spec, grid, thermal, ft_form=ft_form),
                                       [float(t) for t in taus], workers))
    return EnergyCurve(taus, energy, grid, thermal)


def _power(spec, grid, thermal, tau):
    return stored_energy(spec.at(tau), grid, thermal) / tau


def max_power(spec: QuenchSpec, grid: BzGrid, thermal: ThermalSpec, taus=None, refine: bool = True,
              workers: int = 1):
    """Largest ``stored_energy / tau`` over ``taus`` and the duration reaching it.

    Ties go to the smallest duration.  With ``refine`` a bounded scalar search
    between the neighbours of the grid maximum may improve on it.
    """
    taus = DEFAULT_POWER_TAUS if taus is None else _check_taus(taus)
    if taus.size == 0:
        raise ValueError("empty tau grid")
    if np.any(taus <= 0):
        raise ValueError("tau grid must exclude 0 (energy/tau is 0/0 there, with limit 0)")
    curve = energy_curve(spec, taus, grid, thermal, workers=workers)
    power = curve.energy / taus
    i = int(np.argmax(power))
    best, best_tau = float(power[i]), float(taus[i])
    if refine and best > 0 and taus.size > 1:
        lo, hi = taus[max(i - 1, 0)], taus[min(i + 1, taus.size - 1)]
        res = minimize_scalar(lambda t: -_power(spec, grid, thermal, t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10 * hi})
        if -res.fun > best:
            best, best_tau = float(-res.fun), float(res.x)
    return best, best_tau
