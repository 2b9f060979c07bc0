import math

import numpy as np
import pytest
from scipy import stats as sps

from hougaard.family_params import DomainError, PowerFamilySpec
from hougaard.levy_paths import (
    PathEnsemble,
    TimeGrid,
    extend_two_sided,
    marginal_ss_check,
    poisson_tv_distance,
    sample_marginal,
    simulate_hougaard,
)
from hougaard.rng import RandomStream
from hougaard.stats import empirical_moments, ks_critical_value, ks_two_sample, loglog_slope


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.5, 1.0]))
    with pytest.raises(ValueError):
        TimeGrid(np.array([-1.0, 1.0]), two_sided=True)
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, np.inf]))
    g = TimeGrid.uniform(1.0, 0.1)
    assert g.times.size == 11 and g.times[-1] == 1.0
    assert TimeGrid.uniform(1.0, 0.3).times[-1] == 1.0
    assert TimeGrid.from_times([2.0, 1.0]).times.tolist() == [0.0, 1.0, 2.0]
    assert g.index(0.3) == 3
    with pytest.raises(KeyError):
        g.index(0.35)


def test_poisson_paths():
    ens = simulate_hougaard(PowerFamilySpec(1, 1.0, 1.0), TimeGrid.uniform(4.0, 0.5), 20_000, RandomStream(1, 0))
    v = ens.values
    assert np.all(v[:, 0] == 0)
    assert np.all(v == np.round(v)) and np.all(np.diff(v, axis=1) >= 0)
    m = empirical_moments(ens.at(4.0))
    assert abs(m.mean - 4) < 4 * m.se_mean


@pytest.mark.parametrize("p,mu", [(1.5, 1.0), (3, 2.0), (4, 0.5), (2, 1.2)])
def test_subordinator_paths_nondecreasing(p, mu):
    ens = simulate_hougaard(PowerFamilySpec(p, 1.0, mu), TimeGrid.uniform(2.0, 0.25), 500, RandomStream(1, 1))
    assert np.all(np.diff(ens.values, axis=1) >= 0)


def test_brownian_independent_increments():
    ens = simulate_hougaard(PowerFamilySpec(0, 1.0, 0.0), TimeGrid(np.array([0.0, 1.0, 2.5])), 40_000, RandomStream(1, 2))
    d = ens.increments()
    prod = d[:, 0] * d[:, 1]
    assert abs(prod.mean()) < 4 * prod.std() / math.sqrt(prod.size)


def test_inverse_gaussian_variance():
    ens = simulate_hougaard(PowerFamilySpec(3, 1.0, 2.0), TimeGrid(np.array([0.0, 0.5, 1.0, 2.0])), 40_000, RandomStream(1, 3))
    for t in (0.5, 1.0, 2.0):
        m = empirical_moments(ens.at(t))
        assert abs(m.variance - 8 * t) < 4 * m.se_variance


@pytest.mark.parametrize("p,mu", [(0, 0.7), (1.5, 1.0), (3, 1.0), (-1, 1.0)])
def test_variance_and_mean_linear_in_t(p, mu):
    times = np.array([0.5, 1.0, 2.0, 3.0, 4.0])
    spec = PowerFamilySpec(p, 1.0, mu)
    ens = simulate_hougaard(spec, TimeGrid.from_times(times), 20_000, RandomStream(2, 0))
    mom = [empirical_moments(ens.at(t)) for t in times]
    v = np.array([m.variance for m in mom])
    se = np.array([m.se_variance for m in mom])
    w = 1 / se**2
    X = np.column_stack([np.ones_like(times), times])
    cov = np.linalg.inv(X.T @ (w[:, None] * X))
    b0, b1 = cov @ X.T @ (w * v)
    # paths share increments, so the per-time SEs understate the fit error; inflate by the number of times
    k = math.sqrt(times.size)
    assert abs(b1 - spec.variance_unit) < 4 * k * math.sqrt(cov[1, 1])
    assert abs(b0) < 4 * k * math.sqrt(cov[0, 0])
    means = np.array([m.mean for m in mom])
    slope = np.polyfit(times, means, 1)[0]
    assert abs(slope - mu) < 4 * k * max(m.se_mean for m in mom) / times[0]


@pytest.mark.parametrize("p,mu", [(1.5, 1.0), (3, 1.0), (0, 0.0)])
def test_stationary_increments(p, mu):
    grid = TimeGrid(np.array([0.0, 0.7, 2.0, 2.7]))
    ens = simulate_hougaard(PowerFamilySpec(p, 1.0, mu), grid, 10_000, RandomStream(2, 1))
    first = ens.at(0.7)
    later = ens.at(2.7) - ens.at(2.0)
    rep = ks_two_sample(first, later)
    assert rep.verdict, rep.line()


@pytest.mark.parametrize("p,mu", [(1.5, 1.0), (4, 0.6), (-1, 1.0)])
def test_grid_refinement(p, mu):
    spec = PowerFamilySpec(p, 1.0, mu)
    coarse = simulate_hougaard(spec, TimeGrid.uniform(1.0, 0.5), 10_000, RandomStream(2, 2)).at(1.0)
    fine = simulate_hougaard(spec, TimeGrid.uniform(1.0, 0.25), 10_000, RandomStream(2, 3)).at(1.0)
    rep = ks_two_sample(coarse, fine)
    assert rep.verdict, rep.line()


def test_path_independent_of_ensemble_and_threads():
    spec = PowerFamilySpec(2.5, 1.0, 1.0)
    grid = TimeGrid.uniform(1.0, 0.1)
    s = RandomStream(9, 4)
    big = simulate_hougaard(spec, grid, 40, s)
    threaded = simulate_hougaard(spec, grid, 40, s, threads=4)
    small = simulate_hougaard(spec, grid, 5, s)
    assert np.array_equal(big.values, threaded.values)
    assert np.array_equal(big.values[:5], small.values)


def test_increment_budget():
    with pytest.raises(RuntimeError):
        simulate_hougaard(PowerFamilySpec(3), TimeGrid.uniform(1.0, 0.01), 100, RandomStream(0), increment_budget=50)


def test_two_sided():
    spec = PowerFamilySpec(3, 1.0, 1.5)
    ens = extend_two_sided(spec, 2.0, 0.5, 20_000, RandomStream(3, 0))
    assert ens.grid.two_sided and ens.times[0] == -2.0
    assert np.all(ens.at(0.0) == 0)
    neg = empirical_moments(ens.at(-1.5))
    assert abs(neg.mean + 1.5 * 1.5) < 4 * neg.se_mean
    inc = empirical_moments(ens.at(1.0) - ens.at(-0.5))
    assert abs(inc.mean - 1.5 * 1.5) < 4 * inc.se_mean
    a, b = ens.at(-1.0), ens.at(1.0)
    prod = (a - a.mean()) * (b - b.mean())
    assert abs(prod.mean()) < 4 * prod.std() / math.sqrt(prod.size)


def test_one_sided_required():
    grid = TimeGrid(np.array([-1.0, 0.0, 1.0]), two_sided=True)
    with pytest.raises(ValueError):
        simulate_hougaard(PowerFamilySpec(3), grid, 2, RandomStream(0))


def test_ensemble_shape_check():
    with pytest.raises(ValueError):
        PathEnsemble(TimeGrid.uniform(1.0, 0.5), np.zeros((2, 2)))


def test_poisson_pmf_identity():
    assert poisson_tv_distance(2.0, 4.0, 1.5) <= 1e-12
    assert poisson_tv_distance(2.0, 4.0, 1.5) == pytest.approx(0.0, abs=1e-15)


def test_inverse_gaussian_self_similarity():
    rep = marginal_ss_check(PowerFamilySpec(3, 1.0, 1.0), 2, 2.0, 1.0, 10_000, RandomStream(4, 0))
    assert rep.verdict, rep.line()
    assert abs(rep.estimate["mean_gap"]) < 4 * rep.std_error["mean_gap"]


def test_c_equal_one_redraws():
    rep = marginal_ss_check(PowerFamilySpec(1.5, 1.0, 1.0), -1, 1.0, 1.0, 10_000, RandomStream(4, 1))
    assert rep.statistic < rep.critical_value


def test_wrong_rate_exponent_detected():
    rep = marginal_ss_check(PowerFamilySpec(3, 1.0, 1.0), 2, 4.0, 1.0, 10_000, RandomStream(4, 2), rate_exponent=0.0)
    assert not rep.verdict


def test_ss_check_rejects_wrong_H():
    with pytest.raises(DomainError):
        marginal_ss_check(PowerFamilySpec(3), 1.5, 2.0, 1.0, 10, RandomStream(0))
