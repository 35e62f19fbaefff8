import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quenchbat.engine import QuenchSpec
from quenchbat.oracle import oracle_stored_energy
from quenchbat.spectral import (
    BzGrid, DVectorModel, ModelEvaluationError, NambuModel, ThermalSpec, dispersion_nonsc, dispersion_sc,
    f0_from_components, f0_numerator, fermi_weight, pairing_weight, sinh_cosh_weight, thermal_weight,
)


def const_dvector(d0, d1, d2, d3):
    return DVectorModel(lambda k: (d0 + 0 * k, d1 + 0 * k, d2 + 0 * k, d3 + 0 * k))


def const_nambu(x, z):
    return NambuModel(lambda k: (x + 0 * k, z + 0 * k))


def test_dispersion_nonsc_examples():
    ising_like = DVectorModel(lambda k: (0 * k, 0 * k, -np.sin(k), 1.0 - np.cos(k)))
    eps, d0 = dispersion_nonsc(ising_like, np.pi / 2)
    np.testing.assert_allclose(eps, math.sqrt(2), rtol=1e-15)
    assert d0 == 0

    eps, _ = dispersion_nonsc(const_dvector(0, 0, 0, 0), 0.3)
    assert eps == 0

    eps, d0 = dispersion_nonsc(const_dvector(0.3, 0.1, 0.2, 0.2), 1.0)
    np.testing.assert_allclose(eps, 0.6, rtol=1e-15)
    assert d0 == 0.3


def test_dispersion_sc_examples():
    assert dispersion_sc(const_nambu(3.0, 4.0), 0.0) == 5.0
    assert dispersion_sc(const_nambu(0.0, 0.0), 0.0) == 0.0
    ising = NambuModel(lambda k: (-np.sin(k), 0.5 - np.cos(k)))
    np.testing.assert_allclose(dispersion_sc(ising, np.pi), 1.5, atol=1e-15)


def test_non_finite_component_names_momentum():
    bad = DVectorModel(lambda k: (0 * k, np.where(k > 1, np.nan, 1.0), 0 * k, 0 * k))
    with pytest.raises(ModelEvaluationError, match="1.5"):
        bad.components(np.array([0.0, 1.5]))


def test_wrong_component_count():
    with pytest.raises(ModelEvaluationError):
        DVectorModel(lambda k: (k, k)).components(np.zeros(3))
    with pytest.raises(ModelEvaluationError):
        NambuModel(lambda k: (k, k, k)).components(np.zeros(3))


def test_f0_identical_phases_vanish():
    k = np.linspace(-np.pi, np.pi, 33)
    m = DVectorModel(lambda k: (0.1 * np.cos(k), 1 + np.cos(k), np.sin(k), 0.2 * np.sin(2 * k)))
    np.testing.assert_allclose(f0_numerator(m, m, k), 0.0, atol=1e-14)


def _oracle_f0(da, db):
    # k-independent phases with |d_A| = |d_B| = 1 and F_T = 1: the stored
    # energy at tau = pi/4 is exactly F0
    spec = QuenchSpec(const_dvector(*da), const_dvector(*db), math.pi / 4)
    return oracle_stored_energy(spec, BzGrid.finite(1), ThermalSpec())


def test_f0_orthogonal_in_plane():
    # in-plane orthogonal unit vectors: |a x b|^2 = 1
    val = f0_from_components(1, 0, 0, 0, 1, 0)
    assert val == 1.0
    np.testing.assert_allclose(_oracle_f0((0, 1, 0, 0), (0, 0, 1, 0)), val, rtol=1e-12)


def test_f0_degenerate_branch_uses_limit():
    # b along d3: the printed form is 0/0 and the limit is taken
    val = f0_from_components(1, 0, 0, 0, 0, 1)
    assert val == 1.0
    np.testing.assert_allclose(_oracle_f0((0, 1, 0, 0), (0, 0, 0, 1)), val, rtol=1e-12)
    # tau-average of the oracle over one period also gives F0
    taus = np.linspace(0, math.pi, 401)[:-1]
    spec = QuenchSpec(const_dvector(0, 1, 0, 0), const_dvector(0, 0, 0, 1))
    avg = np.mean([oracle_stored_energy(spec.at(t), BzGrid.finite(1), ThermalSpec()) for t in taus])
    np.testing.assert_allclose(avg, val, rtol=1e-12)


vec = st.floats(-3, 3, allow_nan=False)


@given(st.tuples(vec, vec, vec), st.tuples(vec, vec, vec))
def test_f0_equals_cross_product_norm(a, b):
    # any sign of b3 gives the same value: the root's branch is irrelevant
    expected = float(np.sum(np.cross(a, b) ** 2))
    np.testing.assert_allclose(f0_from_components(*a, *b), expected, rtol=1e-9, atol=1e-9)


@given(st.tuples(vec, vec, vec), st.tuples(vec, vec, vec))
def test_f0_non_negative(a, b):
    assert f0_from_components(*a, *b) >= -1e-12


def test_thermal_weight_examples():
    assert sinh_cosh_weight(0.7, 0.0, math.inf) == 1.0
    np.testing.assert_allclose(sinh_cosh_weight(1.0, 0.0, 2.0), math.tanh(1.0), rtol=1e-15)
    np.testing.assert_allclose(fermi_weight(1.0, 0.0, 2.0), math.tanh(1.0), rtol=1e-15)
    assert sinh_cosh_weight(0.5, 2.0, math.inf) == 0.0
    assert fermi_weight(0.5, 2.0, math.inf) == 0.0
    # both levels below mu: full band pair, no weight either
    assert fermi_weight(0.5, -2.0, math.inf) == 0.0


def test_thermal_weight_dispatch():
    m = const_dvector(0.0, 0.3, 0.4, 0.0)
    k = np.zeros(3)
    np.testing.assert_allclose(thermal_weight(m, k, ThermalSpec(2.0)), math.tanh(0.5), rtol=1e-14)
    np.testing.assert_allclose(thermal_weight(m, k, ThermalSpec(2.0), form="fermi"), math.tanh(0.5), rtol=1e-14)
    with pytest.raises(ValueError):
        thermal_weight(m, k, ThermalSpec(), form="bose")


@settings(max_examples=300)
@given(eps=st.floats(1e-3, 5), d0=st.floats(-5, 5), mu=st.floats(-3, 3), beta=st.floats(0.05, 50))
def test_fermi_and_sinh_cosh_forms_agree(eps, d0, mu, beta):
    if beta * eps > 30:
        beta = 30 / eps
    a = fermi_weight(eps, d0, beta, mu)
    b = sinh_cosh_weight(eps, d0, beta, mu)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)


@given(eps=st.floats(1e-3, 5), b1=st.floats(0.01, 50), b2=st.floats(0.01, 50))
def test_weight_decreases_with_temperature(eps, b1, b2):
    lo, hi = sorted((b1, b2))
    assert sinh_cosh_weight(eps, 0.0, lo) <= sinh_cosh_weight(eps, 0.0, hi) + 1e-15


def test_weight_overflow_safe():
    assert sinh_cosh_weight(800.0, 0.0, 10.0) == 1.0
    assert sinh_cosh_weight(1.0, 900.0, 10.0) == 0.0
    np.testing.assert_allclose(fermi_weight(800.0, 1.0, 10.0), 1.0)
    assert 0 <= fermi_weight(1.0, 800.0, 10.0) < 1e-300


def test_weight_depends_only_on_norm(rng):
    # rotate (d1, d2, d3) at fixed norm
    for _ in range(20):
        v = rng.normal(size=3)
        w = rng.normal(size=3)
        w *= np.linalg.norm(v) / np.linalg.norm(w)
        d0 = rng.uniform(-1, 1)
        th = ThermalSpec(rng.uniform(0.1, 10), rng.uniform(-1, 1))
        a = thermal_weight(const_dvector(d0, *v), np.zeros(1), th)
        b = thermal_weight(const_dvector(d0, *w), np.zeros(1), th)
        np.testing.assert_allclose(a, b, rtol=1e-13)


def test_pairing_weight_limits():
    assert pairing_weight(0.0, math.inf) == 0.0
    assert pairing_weight(0.3, math.inf) == 1.0
    np.testing.assert_allclose(pairing_weight(1.0, 2.0), math.tanh(1.0))


def test_thermal_spec_validation():
    with pytest.raises(ValueError):
        ThermalSpec(beta=0)
    with pytest.raises(ValueError):
        ThermalSpec(beta=float("nan"))
    with pytest.raises(ValueError):
        ThermalSpec(mu=math.inf)
    assert ThermalSpec().zero_temperature


def test_grid_momenta():
    k = BzGrid.finite(4).momenta()
    np.testing.assert_allclose(k, [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4])
    assert np.all(np.abs(k) < np.pi)
    k = BzGrid.finite(4, "integer").momenta()
    np.testing.assert_allclose(k, [-np.pi, -np.pi / 2, 0, np.pi / 2])
    assert BzGrid.finite(3).momenta(dim=2).shape == (9, 2)
    with pytest.raises(ValueError):
        BzGrid.thermodynamic().momenta()
    with pytest.raises(ValueError):
        BzGrid(n=0)
    with pytest.raises(ValueError):
        BzGrid(n=4, offset="quarter")


def test_two_dimensional_model():
    m = DVectorModel(lambda k: (0 * k[..., 0], np.cos(k[..., 0]), np.sin(k[..., 1]), 0 * k[..., 0]), dim=2)
    k = BzGrid.finite(5).momenta(2)
    d0, d1, d2, d3 = m.components(k)
    assert d1.shape == (25,)
    with pytest.raises(ValueError):
        m.components(np.zeros(4))
