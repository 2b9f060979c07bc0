import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hougaard.covariance import (
    H1FamilySpec,
    VarianceFunction,
    cov,
    find_psd_counterexample,
    gram_matrix,
    h1_cov,
    h1_variance_profile,
    increment_correlation,
    mean_structure,
    psd_check,
    r_d,
    variance_profile,
)
from hougaard.family_params import (
    CorrelationSign,
    DomainError,
    PowerFamilySpec,
    correlation_sign,
    fractal_dimension,
    hurst_domain,
)
from hougaard.fhm import FHMConfig, kernel_l2, simulate_fhm
from hougaard.levy_paths import TimeGrid, simulate_hougaard
from hougaard.rng import RandomStream
from hougaard.tweedie import ExpVarianceFamily, expvar_cumulant, numerical_moments

pos = st.floats(1e-3, 1e3)
dims = st.floats(0.0, 2.0)


def test_variance_profile_examples():
    V = VarianceFunction.power(3, 0.7)
    assert variance_profile(V, 1.8, 1.3, 1.0) == pytest.approx(V(1.3))
    for t in (0.3, 1.0, 2.5, 7.0):
        D = (1.8 - 1) * (3 - 2)
        assert variance_profile(V, 1.8, 1.3, t) == pytest.approx(0.7 * 1.3**3 * t ** (2 - D), rel=1e-13)
        assert variance_profile(V, 2.0, 1.3, t) == pytest.approx(V(1.3) * t, rel=1e-13)
    assert variance_profile(V, 1.8, 1.3, 0.0) == 0
    with pytest.raises(DomainError):
        variance_profile(VarianceFunction.power(1.5), 2.0, -1.0, 1.0)


def test_cov_examples():
    V = VarianceFunction.power(3, 1.0)
    assert cov(V, 1.8, 2.0, 1.5, 1.5) == pytest.approx(variance_profile(V, 1.8, 2.0, 1.5))
    for s, t in [(1.0, 2.0), (0.3, 4.0), (2.5, 0.7)]:
        assert cov(V, 1.8, 2.0, s, t) == pytest.approx(8 * r_d(s, t, 0.8), rel=1e-12)
    assert cov(V, 2.0, 1.0, 1.0, 2.0) == pytest.approx(1.0)


def test_levy_cov_monte_carlo():
    ens = simulate_hougaard(PowerFamilySpec(3, 1.0, 1.0), TimeGrid(np.array([0.0, 1.0, 2.0])), 40_000, RandomStream(51, 0))
    a, b = ens.at(1.0), ens.at(2.0)
    prod = (a - a.mean()) * (b - b.mean())
    target = cov(VarianceFunction.power(3), 2.0, 1.0, 1.0, 2.0)
    assert target == 1.0
    assert abs(prod.mean() - target) < 4 * prod.std() / math.sqrt(prod.size)


def test_fhm_cov_monte_carlo():
    # moving-average fHm has covariance kernel_l2 * R_D with 2 - D = 1 + 2h
    cfg = FHMConfig(PowerFamilySpec(1.5, 1.0, 1.0), -1.2, n_paths=20_000, stream=RandomStream(51, 1))
    ens = simulate_fhm(cfg, [0.5, 1.0, 2.0])
    for s, t in [(0.5, 1.0), (1.0, 2.0), (0.5, 2.0)]:
        a, b = ens.at(s), ens.at(t)
        prod = (a - a.mean()) * (b - b.mean())
        target = kernel_l2(cfg.h) * r_d(s, t, 1 - 2 * cfg.h)
        tol = 4 * prod.std() / math.sqrt(prod.size) + 2 * cfg.max_deficit * abs(target)
        assert abs(prod.mean() - target) < tol


def test_r_d_examples():
    assert r_d(1.0, 2.0, 1) == pytest.approx(1.0)
    assert r_d(2.0, 3.0, 0) == pytest.approx(6.0)
    assert r_d(1.0, 3.0, 2) == pytest.approx(0.5)
    assert r_d(2.0, 2.0, 2) == 1.0
    with pytest.raises(DomainError):
        r_d(1.0, 2.0, 2.5)


@given(pos, pos, dims)
def test_r_d_symmetry_and_diagonal(s, t, D):
    assert r_d(s, t, D) == r_d(t, s, D)
    assert r_d(s, s, D) == pytest.approx(s ** (2 - D), rel=1e-12)


@given(pos, pos, dims, st.floats(1e-2, 1e2))
def test_r_d_scaling(s, t, D, c):
    lhs = r_d(c * s, c * t, D)
    rhs = c ** (2 - D) * r_d(s, t, D)
    scale = (c * max(s, t)) ** (2 - D)
    assert abs(lhs - rhs) <= 1e-12 * max(scale, 1.0)


def test_increment_correlation_examples():
    assert np.allclose(increment_correlation(np.array([0.1, 1.0, 3.0]), 1), 0, atol=1e-15)
    assert increment_correlation(1.0, 0) == pytest.approx(1.0)
    assert increment_correlation(1.0, 2) == pytest.approx(-0.5)
    with pytest.raises(DomainError):
        increment_correlation(1.0, -0.1)
    with pytest.raises(DomainError):
        increment_correlation(0.0, 1.0)


def test_increment_correlation_range_on_grid():
    r = np.geomspace(1e-3, 1e3, 121)
    for D in np.linspace(0, 2, 41):
        rho = increment_correlation(r, D)
        # the formula cancels terms of size (r + 1/r)^(2-D)
        tol = 8 * np.finfo(float).eps * (r + 1 / r) ** (2 - D)
        assert np.all(rho >= -1 - tol) and np.all(rho <= 1 + tol)
        if D < 1:
            assert np.all(rho > 0)
        elif D > 1:
            assert np.all(rho < 0)


@given(st.floats(1e-3, 1e3), dims)
def test_increment_correlation_reciprocal_symmetry(r, D):
    assert increment_correlation(r, D) == pytest.approx(increment_correlation(1 / r, D), rel=1e-9, abs=1e-12)


@given(st.sampled_from([-2, -1, 0, 1.5, 3, 4]), st.floats(0, 1))
def test_increment_sign_matches_classification(p, u):
    dom = hurst_domain(p)
    H = dom.lo + u * (dom.hi - dom.lo)
    D = fractal_dimension(H, p)
    rho = increment_correlation(1.0, D)
    sign = correlation_sign(H, p)
    if sign is CorrelationSign.POSITIVE:
        assert rho > 0 or abs(1 - D) < 1e-12
    elif sign is CorrelationSign.NEGATIVE:
        assert rho < 0 or abs(1 - D) < 1e-12
    else:
        assert abs(rho) < 1e-12


@pytest.mark.parametrize("D", [0, 0.5, 1, 1.5, 2])
def test_psd_inside_range(D):
    for grid in (np.arange(1.0, 21.0), np.geomspace(0.01, 10, 20), np.linspace(0.05, 1.0, 20)):
        assert psd_check(D, grid) >= -1e-10


def test_psd_rank_one_at_zero():
    g = np.arange(1.0, 6.0)
    ev = np.linalg.eigvalsh(gram_matrix(0, g))
    assert np.allclose(ev[:-1], 0, atol=1e-10)
    assert np.linalg.matrix_rank(gram_matrix(0, g), tol=1e-9) == 1


def test_psd_counterexample():
    grid, ev = find_psd_counterexample(2.5)
    assert ev < -1e-6
    with pytest.raises(DomainError):
        psd_check(2.5, grid)
    assert psd_check(2.5, grid, check=False) == pytest.approx(ev)


def test_psd_grid_validation():
    with pytest.raises(ValueError):
        psd_check(1.0, [1.0, 1.0])
    with pytest.raises(ValueError):
        psd_check(1.0, [0.0, 1.0])


def test_h1_examples():
    fam = H1FamilySpec(a=0.0, b=0.8, sigma2=1.5, mu=0.3)
    v = 1.5 * math.exp(0.8 * 0.3)
    assert h1_variance_profile(fam, 1.0) == pytest.approx(v)
    assert h1_variance_profile(fam, 2.0) / h1_variance_profile(fam, 1.0) == pytest.approx(2.0, rel=1e-14)
    assert h1_cov(fam, 1.0, 3.0) == pytest.approx(v)
    assert h1_cov(fam, 2.0, 2.0) == pytest.approx(h1_variance_profile(fam, 2.0))
    assert h1_cov(fam, 0.4, 1.7) == h1_cov(fam, 1.7, 0.4)
    with pytest.raises(DomainError):
        H1FamilySpec(b=0.0)


@pytest.mark.parametrize("b", [1.0, -0.5])
def test_h1_linearity_and_cgf_consistency(b):
    fam = H1FamilySpec(a=0.0, b=b, sigma2=0.9, mu=0.4)
    ts = np.geomspace(1e-2, 1e2, 15)
    v1 = h1_variance_profile(fam, 1.0)
    assert max(abs(h1_variance_profile(fam, t) / (t * v1) - 1) for t in ts) <= 1e-12
    for t in (0.5, 2.0):
        _, var = numerical_moments(lambda z: expvar_cumulant(z, ExpVarianceFamily(b, 0.9, 0.4, t)))
        assert var == pytest.approx(h1_variance_profile(fam, t), rel=1e-6)


def test_mean_structure_examples():
    assert mean_structure(0.3, 2.0, 1.5) == pytest.approx(3.0)
    assert mean_structure(0.3, -2.0, 1.5) == pytest.approx(-3.0)
    assert mean_structure(2.0, 4.0, 0.0, a_pair=(1.0, 0.0)) == pytest.approx(16.0)
    assert mean_structure(2.0, 4.0, 1.0, a_pair=(1.0, 0.0)) == pytest.approx(20.0)
    with pytest.raises(DomainError):
        mean_structure(0.5, 0.0, 1.0, a_pair=(1.0, 1.0))
    with pytest.raises(DomainError):
        mean_structure(1.0, 1.0, 1.0)


def test_variance_function_kinds():
    assert VarianceFunction.exponential(2.0, 0.5)(1.0) == pytest.approx(0.5 * math.e**2)
    assert VarianceFunction.custom(lambda m: 3.0)(7.0) == 3.0
    assert VarianceFunction.power(0, 2.0)(-5.0) == 2.0
    with pytest.raises(DomainError):
        VarianceFunction.exponential(0.0)
