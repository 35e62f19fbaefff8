"""Pure-numpy implementations of the hot loops.

Used when the compiled ``_kernels`` extension is unavailable.  The summation
tree is identical to the compiled one: terms are zero-padded to a power of two
and reduced by ``x[i] = x[2i] + x[2i+1]``.
"""
import numpy as np

from .spectral import f0_from_components, pairing_weight

SMALL_PHASE = 1e-4
TAU_CHUNK = 512


def _tree_sum(terms):
    n = terms.shape[0]
    if n == 0:
        return np.zeros(terms.shape[1:])
    m = 1 << (n - 1).bit_length()
    if m != n:
        terms = np.concatenate([terms, np.zeros((m - n,) + terms.shape[1:])])
    while terms.shape[0] > 1:
        terms = terms[0::2] + terms[1::2]
    return terms[0]


def pairwise_sum(x):
    return float(_tree_sum(np.ascontiguousarray(x, dtype=float)))


def oscillation_factor(omega, tau):
    """``(1 - cos(2 omega tau)) / omega^2``; its time average ``1/omega^2`` for ``tau = inf``."""
    omega = np.asarray(omega, dtype=float)
    tau = np.asarray(tau, dtype=float)
    omega, tau = np.broadcast_arrays(omega, tau)
    zero = omega == 0.0
    safe = np.where(zero, 1.0, omega)
    finite_tau = np.where(np.isinf(tau), 0.0, tau)
    x = omega * finite_tau
    small = np.abs(x) < SMALL_PHASE
    s = np.sin(x)
    finite = np.where(small, 2.0 * finite_tau * finite_tau * (1.0 - x * x / 3.0), 2.0 * s * s / (safe * safe))
    average = np.where(zero, 0.0, 1.0 / (safe * safe))
    return np.where(np.isinf(tau), average, finite)


def oscillation_sum(g, omega, taus):
    """Sum over modes of ``g * oscillation_factor(omega, tau)`` for every ``tau``."""
    g = np.ascontiguousarray(g, dtype=float)
    omega = np.ascontiguousarray(omega, dtype=float)
    taus = np.ascontiguousarray(taus, dtype=float)
    out = np.empty(taus.shape[0])
    for start in range(0, taus.shape[0], TAU_CHUNK):
        chunk = taus[start:start + TAU_CHUNK]
        terms = g[:, None] * oscillation_factor(omega[:, None], chunk[None, :])
        out[start:start + TAU_CHUNK] = _tree_sum(terms)
    return out


def sc_amplitude(xa, za, xb, zb, beta):
    xa, za, xb, zb = (np.asarray(v, dtype=float) for v in (xa, za, xb, zb))
    eps = np.hypot(xa, za)
    c = xa * zb - za * xb
    t = pairing_weight(eps, beta)
    safe = np.where(eps > 0, eps, 1.0)
    return np.where(eps > 0, c * c * t / (2.0 * safe), 0.0)


def nonsc_amplitude(a1, a2, a3, b1, b2, b3, ft):
    a1, a2, a3 = (np.asarray(v, dtype=float) for v in (a1, a2, a3))
    eps = np.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
    f0 = f0_from_components(a1, a2, a3, b1, b2, b3)
    safe = np.where(eps > 0, eps, 1.0)
    return np.where(eps > 0, f0 * np.asarray(ft, dtype=float) / safe, 0.0)

