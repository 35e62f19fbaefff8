"""Parameter sweeps, kink and plateau detection, finite-size recurrences and
power scaling."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.stats import linregress

from .engine import DEFAULT_POWER_TAUS, energy_curve, max_power, mode_data, parallel_map, stored_energy
from .models import QuenchFamily
from .spectral import BzGrid, ThermalSpec


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    values: np.ndarray
    energy: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.values)


def _plateau_point(family, target, grid, thermal, tau, value):
    return stored_energy(family.spec(value, target, tau), grid, thermal)


def _sorted_grid(values):
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("empty parameter grid")
    return np.sort(values, kind="stable")


def sweep_plateau(family: QuenchFamily, values, target: str = "initial", grid: BzGrid = BzGrid(),
                  thermal: ThermalSpec = ThermalSpec(), tau: float = math.inf, workers: int = 1) -> SweepResult:
    """Stored energy (the plateau by default) across ``values`` of one quench endpoint.

    ``target`` picks what ``values`` replace: the ``initial`` value, the
    ``final`` charging value, or the ``increment``.  The grid is sorted first.
    """
    values = _sorted_grid(values)
    fn = partial(_plateau_point, family, target, grid, thermal, tau)
    energy = np.array(parallel_map(fn, values.tolist(), workers))
    meta = {"model": family.model, "target": target, "grid": grid.describe(),
            "beta": thermal.beta, "mu": thermal.mu, "tau": tau}
    return SweepResult(f"{family.model}.{family.parameter}", values, energy, meta)


# ---------------------------------------------------------------------------
# kinks


@dataclass(frozen=True)
class KinkReport:
    points: list          # (parameter value, |second difference|)
    threshold: float
    reference: np.ndarray  # per-point reference scale the threshold multiplies

    @property
    def locations(self):
        return [p for p, _ in self.points]


def _uniform_step(x):
    if x.size < 5:
        raise ValueError("kink and plateau detection need at least 5 grid points")
    dx = np.diff(x)
    step = dx.mean()
    if not np.allclose(dx, step, rtol=1e-6, atol=0):
        raise ValueError("parameter grid must be uniform")
    return step


def detect_kinks(sweep: SweepResult, threshold: float = 10.0, neighbourhood: int = 10,
                 floor: float = 1e-6) -> KinkReport:
    """Flag non-analytic points of a sweep from its second differences.

    Point ``i`` is flagged when ``a_i = |E[i-1] - 2E[i] + E[i+1]|`` is a local
    maximum and exceeds ``threshold`` times the largest of: the median of all
    ``a``, the median of ``a`` over ``+-neighbourhood`` points (excluding the
    immediate neighbours, which a kink contaminates), and ``floor * max|E|``.
    The local median keeps strongly curved but smooth stretches from being
    flagged; the floor keeps round-off on flat stretches from being flagged.
    """
    x = np.asarray(sweep.values, dtype=float)
    e = np.asarray(sweep.energy, dtype=float)
    _uniform_step(x)
    a = np.abs(e[:-2] - 2.0 * e[1:-1] + e[2:])
    n = a.size
    global_med = np.median(a)
    base = floor * np.max(np.abs(e))
    ref = np.empty(n)
    for i in range(n):
        lo, hi = max(0, i - neighbourhood), min(n, i + neighbourhood + 1)
        idx = [j for j in range(lo, hi) if abs(j - i) > 1]
        local = np.median(a[idx]) if idx else 0.0
        ref[i] = max(global_med, local, base)
    left = np.concatenate([[-np.inf], a[:-1]])
    right = np.concatenate([a[1:], [-np.inf]])
    hits = np.flatnonzero((a >= left) & (a >= right) & (a > threshold * ref))
    return KinkReport([(float(x[i + 1]), float(a[i])) for i in hits], threshold, ref)


def plateau_regions(sweep: SweepResult, flatness_tol: float = 1e-3, min_points: int = 5):
    """Maximal parameter intervals (of at least ``min_points`` grid points)
    where the forward-difference slope stays below ``flatness_tol``."""
    x = np.asarray(sweep.values, dtype=float)
    e = np.asarray(sweep.energy, dtype=float)
    _uniform_step(x)
    flat = np.abs(np.diff(e) / np.diff(x)) < flatness_tol
    out = []
    i = 0
    while i < flat.size:
        if not flat[i]:
            i += 1
            continue
        j = i
        while j + 1 < flat.size and flat[j + 1]:
            j += 1
        # slopes i..j span the points i..j+1
        if j + 2 - i >= min_points:
            out.append((float(x[i]), float(x[j + 1])))
        i = j + 1
    return out


# ---------------------------------------------------------------------------
# recurrences


@dataclass(frozen=True)
class RecurrenceReport:
    plateau_window: tuple       # (tau start, tau end)
    plateau_mean: float
    onset: float                # first tau whose trailing window is 'factor' times noisier
    amplitude_before: float     # half peak-to-peak before the plateau window
    amplitude_plateau: float
    amplitude_after: float
    e_max: float                # largest stored energy after the plateau window
    tau_at_max: float
    tau: np.ndarray = field(repr=False, compare=False)
    energy: np.ndarray = field(repr=False, compare=False)


class RecurrenceError(ValueError):
    """The regimes of the curve could not be separated."""


def _rolling_variance(y, w):
    c1 = np.concatenate([[0.0], np.cumsum(y)])
    c2 = np.concatenate([[0.0], np.cumsum(y * y)])
    mean = (c1[w:] - c1[:-w]) / w
    return np.maximum((c2[w:] - c2[:-w]) / w - mean * mean, 0.0)


def _half_range(y):
    return 0.5 * float(np.max(y) - np.min(y)) if y.size else 0.0


def default_tau_step(spec, grid: BzGrid):
    """``min(0.05, T/20)`` with ``T`` the shortest oscillation period on the grid."""
    _, omega = mode_data(spec, grid.momenta(spec.phase_a.dim), ThermalSpec())
    top = float(np.max(omega))
    return 0.05 if top == 0 else min(0.05, math.pi / top / 20.0)


def _recurrence_curve(spec, n, thermal, tau_max, dtau, window, offset, workers=1):
    grid = BzGrid.finite(n, offset)
    tau_max = 2.0 * n if tau_max is None else float(tau_max)
    dtau = default_tau_step(spec, grid) if dtau is None else float(dtau)
    taus = np.arange(0.0, tau_max + 0.5 * dtau, dtau)
    if taus.size < 4 * window:
        raise RecurrenceError(f"curve of {taus.size} samples is too short for window {window}")
    return taus, energy_curve(spec, taus, grid, thermal, workers=workers).energy


def _regimes(e, window, factor):
    """Start index of the quietest window in the first half, and the index at
    which a trailing window first becomes ``factor`` times noisier (or None)."""
    var = _rolling_variance(e, window)
    p = int(np.argmin(var[:var.size // 2]))
    later = np.flatnonzero(var[p + 1:] > factor * var[p])
    onset = None if later.size == 0 else p + int(later[0]) + window
    return p, onset


def recurrence_profile(spec, n: int, thermal: ThermalSpec = ThermalSpec(), tau_max: float = None,
                       dtau: float = None, window: int = 50, factor: float = 5.0, offset: str = "half",
                       workers: int = 1) -> RecurrenceReport:
    """Split a finite-size curve into oscillation, plateau and recurrence regimes.

    The rolling variance over ``window`` samples is minimal on the plateau
    (searched in the first half of the curve); the recurrence starts where
    the trailing-window variance first exceeds ``factor`` times that minimum.
    ``e_max`` is the largest energy after the plateau window.

    Raises :class:`RecurrenceError` when the curve is too short or never
    becomes noisier after its quietest window.
    """
    taus, e = _recurrence_curve(spec, n, thermal, tau_max, dtau, window, offset, workers)
    p, onset = _regimes(e, window, factor)
    if onset is None:
        raise RecurrenceError("no recurrence after the plateau window")
    end = p + window
    m = end + int(np.argmax(e[end:]))
    return RecurrenceReport(
        plateau_window=(float(taus[p]), float(taus[end - 1])),
        plateau_mean=float(np.mean(e[p:end])),
        onset=float(taus[onset]),
        amplitude_before=_half_range(e[:p]),
        amplitude_plateau=_half_range(e[p:end]),
        amplitude_after=_half_range(e[end:]),
        e_max=float(e[m]),
        tau_at_max=float(taus[m]),
        tau=taus,
        energy=e,
    )


def _recurrence_point(family, target, n, thermal, tau_max, dtau, window, factor, offset, value):
    spec = family.spec(value, target)
    taus, e = _recurrence_curve(spec, n, thermal, tau_max, dtau, window, offset)
    p, onset = _regimes(e, window, factor)
    return float(np.max(e[p + window:])), onset is not None


def sweep_recurrence_max(family: QuenchFamily, values, n: int, target: str = "initial",
                         thermal: ThermalSpec = ThermalSpec(), tau_max: float = None, dtau: float = None,
                         window: int = 50, factor: float = 5.0, offset: str = "half",
                         workers: int = 1) -> SweepResult:
    """Peak energy after the plateau window across a parameter grid.

    Near flat charging bands the curve does not dephase before ``tau_max``
    and no onset is found; the peak is still taken after the quietest
    window, and such points are listed in ``metadata['no_onset']``.
    """
    values = _sorted_grid(values)
    fn = partial(_recurrence_point, family, target, n, thermal, tau_max, dtau, window, factor, offset)
    res = parallel_map(fn, values.tolist(), workers)
    energy = np.array([r[0] for r in res])
    missing = [float(v) for v, r in zip(values, res) if not r[1]]
    meta = {"model": family.model, "target": target, "n": n, "beta": thermal.beta, "mu": thermal.mu,
            "no_onset": missing}
    return SweepResult(f"{family.model}.{family.parameter}", values, energy, meta)


# ---------------------------------------------------------------------------
# power scaling


@dataclass(frozen=True)
class ScalingResult:
    slope: float
    intercept: float
    r2: float
    n: np.ndarray
    p_max: np.ndarray     # total (not per-site) maximum power
    tau_at_max: np.ndarray


def power_scaling(spec, n_list, taus=None, thermal: ThermalSpec = ThermalSpec(), offset: str = "half",
                  workers: int = 1) -> ScalingResult:
    """Least-squares line through the total maximum power versus system size."""
    n = np.asarray(sorted(int(v) for v in n_list))
    if n.size < 4 or np.unique(n).size < 2:
        raise ValueError("power scaling needs at least 4 system sizes, not all equal")
    taus = DEFAULT_POWER_TAUS if taus is None else taus
    p = np.empty(n.size)
    t = np.empty(n.size)
    for i, size in enumerate(n):
        per_site, t[i] = max_power(spec, BzGrid.finite(size, offset), thermal, taus, workers=workers)
        p[i] = size * per_site
    if np.ptp(p) == 0:
        raise ValueError("degenerate fit: maximum power does not vary with size")
    fit = linregress(n.astype(float), p)
    return ScalingResult(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), n, p, t)
