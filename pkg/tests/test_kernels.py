import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quenchbat import _kernels_py, kernels


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")


def test_forced_fallback():
    env = dict(os.environ, QUENCHBAT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import quenchbat.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_oscillation_factor_values(backend):
    omega = np.array([1.0, 2.0, 0.0, 0.5])
    tau = np.array([np.pi / 4, 1.0, 3.0, np.inf])
    expected = [1.0, (1 - np.cos(4.0)) / 4.0, 18.0, 4.0]
    np.testing.assert_allclose(backend.oscillation_factor(omega, tau), expected, rtol=1e-14)
    assert backend.oscillation_factor(np.array([0.0]), np.array([np.inf]))[0] == 0.0


def test_small_phase_continuous(backend):
    # switch between series and trigonometric branch is seamless
    x0 = _kernels_py.SMALL_PHASE
    omega = np.array([x0 * (1 - 1e-9), x0 * (1 + 1e-9)])
    f = backend.oscillation_factor(omega, np.ones(2))
    np.testing.assert_allclose(f[0], f[1], rtol=1e-8)
    np.testing.assert_allclose(f, 2.0, rtol=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 700), st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_backends_agree(n, nt, seed):
    compiled = pytest.importorskip("quenchbat._kernels")
    r = np.random.default_rng(seed)
    g = r.uniform(0, 2, n)
    omega = r.uniform(0, 3, n)
    omega[: n // 7] = 0.0
    taus = np.sort(r.uniform(0, 50, nt))
    a = compiled.oscillation_sum(g, omega, taus)
    b = _kernels_py.oscillation_sum(g, omega, taus)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


def test_amplitudes_agree(rng):
    compiled = pytest.importorskip("quenchbat._kernels")
    v = rng.normal(size=(6, 300))
    v[3:5, :20] = 0.0   # degenerate branch of the geometric numerator
    ft = rng.uniform(0, 1, 300)
    np.testing.assert_allclose(compiled.nonsc_amplitude(*v, ft), _kernels_py.nonsc_amplitude(*v, ft), rtol=1e-12)
    x = rng.normal(size=(4, 300))
    for beta in (0.3, 7.0, np.inf):
        np.testing.assert_allclose(compiled.sc_amplitude(*x, beta), _kernels_py.sc_amplitude(*x, beta), rtol=1e-13)


def test_pairwise_sum(backend):
    x = np.full(1000, 0.1)
    np.testing.assert_allclose(backend.pairwise_sum(x), 100.0, rtol=1e-15)
    assert backend.pairwise_sum(np.empty(0)) == 0.0


def test_read_only_inputs(backend):
    g = np.ones(8)
    g.setflags(write=False)
    out = backend.oscillation_sum(g, np.broadcast_to(1.0, (8,)), np.array([np.pi / 2]))
    np.testing.assert_allclose(out, [8 * 2.0])
