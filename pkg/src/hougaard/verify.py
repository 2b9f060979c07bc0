"""Verification suites A1-A11, shared by the CLI and the acceptance tests.

Each suite returns a list of :class:`StatReport`; a suite passes when every
report's verdict passes. ``quick=True`` shrinks Monte Carlo sizes.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np

from .covariance import H1FamilySpec, find_psd_counterexample, h1_variance_profile, increment_correlation, psd_check
from .family_params import CorrelationSign, PowerFamilySpec, correlation_sign, hurst_of_p
from .fhm import FHMConfig, fhm_cumulant_transform, fhm_variance, simulate_fhm
from .lamperti import DriftBrownianFamily, HougaardFamily, RandomWalkFamily, convergence_diagnostic, lamperti_marginal_sample
from .levy_paths import TimeGrid, marginal_ss_check, poisson_tv_distance, sample_marginal, simulate_hougaard
from .rng import RandomStream
from .stats import StatReport, TOLERANCES, ecf_test, empirical_moments, increment_corr_estimate, ks_two_sample, loglog_slope, moment_test
from .tweedie import ExpVarianceFamily, expvar_scaling_residual, expvar_translation_residual, mean_var, scaling_identity_residual

__all__ = ["DEFAULT_SEED", "SUITES", "ACCEPTANCE", "run_suite", "run_all"]

DEFAULT_SEED = 1729


def _stream(seed, k):
    return RandomStream(seed, k)


def suite_params(seed=DEFAULT_SEED, quick=False, **_):
    """A1: p -> H for the Poisson, inverse Gaussian and compound Poisson cases."""
    cases = [(1, 0), (3, 2), (Fraction(3, 2), -1)]
    out = []
    for p, H in cases:
        got = hurst_of_p(p)
        out.append(StatReport(f"A1 H(p={p})", statistic=abs(got - H), critical_value=0.0, estimate=str(got),
                              parameters={"p": str(p), "expected": H}))
    neg = hurst_of_p(Fraction(3, 2))
    out.append(StatReport("A1 H(1.5) < 0", statistic=0.0 if neg < 0 else 1.0, critical_value=0.0, estimate=str(neg)))
    return out


def suite_ss(seed=DEFAULT_SEED, quick=False, p=1, mu=2.0, c=4.0, t=1.5, n=None, **_):
    """A2: Poisson self-similarity, exact pmf identity plus Monte Carlo KS."""
    n = n or 10_000
    out = []
    if p == 1:
        tv = poisson_tv_distance(mu, c, t)
        out.append(StatReport("A2 Poisson pmf total variation", statistic=tv, critical_value=1e-12,
                              parameters={"mu": mu, "c": c, "t": t}))
    spec = PowerFamilySpec(p, 1.0, mu)
    rep = marginal_ss_check(spec, hurst_of_p(p), c, t, n, _stream(seed, 2))
    rep.label = f"A2 KS self-similarity p={p}"
    out.append(rep)
    return out


def suite_moments(seed=DEFAULT_SEED, quick=False, n=None, **_):
    """A3: mean mu t and variance sigma2 mu^p t of S_p(mu; t)."""
    n = n or (20_000 if quick else 100_000)
    out = []
    for k, p in enumerate([0, 1, 1.5, 2, 3]):
        spec = PowerFamilySpec(p, 0.8, 1.5)
        t = 2.0
        x = sample_marginal(spec, t, n, _stream(seed, 30 + k))
        m, v = mean_var(spec, t)
        out.append(moment_test(x, m, v, label=f"A3 moments p={p}", p=p, mu=1.5, sigma2=0.8, t=t))
    return out


def suite_tweedie_scaling(seed=DEFAULT_SEED, quick=False, **_):
    """A4: c Tw_p(mu, w) = Tw_p(c mu, c^(p-2) w) at the level of cumulant transforms."""
    z = np.linspace(-4.0, 4.0, 17)
    out = []
    for p in (1.5, 2, 3):
        for c in (0.5, 2.0, 5.0):
            r = scaling_identity_residual(PowerFamilySpec(p, 1.3, 0.7), 1.7, c, z)
            out.append(StatReport(f"A4 scaling p={p} c={c}", statistic=r, critical_value=1e-9, parameters={"p": p, "c": c}))
    return out


def _fhm_slope(p, H, mu, n, seed, k, target, tol):
    times = np.array([1.0, 2.0, 4.0, 8.0])
    cfg = FHMConfig(PowerFamilySpec(p, 1.0, mu), H, n_paths=n, stream=_stream(seed, k))
    ens = simulate_fhm(cfg, times)
    mom = [empirical_moments(ens.at(t)) for t in times]
    v = np.array([m.variance for m in mom])
    se = np.array([m.se_variance for m in mom])
    slope, sse = loglog_slope(times, v, se)
    return StatReport(
        f"A5 fhm variance slope p={p} H={H}",
        statistic=abs(slope - target),
        critical_value=tol,
        estimate=slope,
        std_error=sse,
        parameters={"p": p, "H": H, "mu": mu, "target": target, "n_paths": n},
        metadata={"variances": v, "theory": fhm_variance(times, cfg), **ens.metadata},
    )


def suite_fhm_variance(seed=DEFAULT_SEED, quick=False, p=None, H=None, n=None, **_):
    """A5: log-log slope of the fHm variance over t in {1, 2, 4, 8}."""
    n = n or (5_000 if quick else 20_000)
    cases = [(3, 1.8, 1.0, 0.6, 0.1), (0, 0.7, 0.0, 1.4, 0.05)]
    if p is not None:
        cases = [cs for cs in cases if cs[0] == p and (H is None or math.isclose(cs[1], H))]
        if not cases:
            h = H - 1 / PowerFamilySpec(p, 1.0, 1.0).alpha
            cases = [(p, H, 0.0 if p == 0 else 1.0, 1 + 2 * h, 0.1)]
    return [_fhm_slope(p_, H_, mu, n, seed, 50 + i, target, tol) for i, (p_, H_, mu, target, tol) in enumerate(cases)]


def suite_fhm_cgf(seed=DEFAULT_SEED, quick=False, n=None, **_):
    """A6: empirical CF of simulated fHm against exp of the quadrature cumulant transform."""
    n = n or (5_000 if quick else 20_000)
    z = np.linspace(0.2, 2.0, 10)
    out = []
    for i, (p, H) in enumerate([(1.5, -1.2), (3, 1.8)]):
        cfg = FHMConfig(PowerFamilySpec(p, 1.0, 1.0), H, n_paths=n, stream=_stream(seed, 60 + i))
        x = simulate_fhm(cfg, [1.0]).at(1.0)
        target = np.exp(fhm_cumulant_transform(z, 1.0, cfg))
        out.append(ecf_test(x, z, target, label=f"A6 fhm ecf p={p} H={H}", p=p, H=H))
    return out


SIGN_CELLS = [(0, 0.7, 0.0), (0, 0.85, 0.0), (0, 0.3, 0.0), (1.5, -1.2, 1.0), (1.5, -1.4, 1.0), (-1, 0.5, 1.0)]
ZERO_CELLS = [(3, 2.0, 1.0), (1.5, -1.0, 1.0)]


def suite_corr_sign(seed=DEFAULT_SEED, quick=False, n=None, **_):
    """A7: sign of the correlation of adjacent increments over [0,1] and [1,2].

    Sign cells use fractional motions; the statistic is the signed z-score
    ``-s * rho / SE`` in the predicted direction ``s`` and must not exceed
    ``-3``. The D = 1 cells use Lévy paths and need ``|rho| <= 3 SE``.
    """
    n = n or (5_000 if quick else 20_000)
    out = []
    for i, (p, H, mu) in enumerate(SIGN_CELLS):
        pred = correlation_sign(H, p)
        s = 1 if pred is CorrelationSign.POSITIVE else -1
        cfg = FHMConfig(PowerFamilySpec(p, 1.0, mu), H, n_paths=n, stream=_stream(seed, 70 + i))
        ens = simulate_fhm(cfg, [1.0, 2.0])
        rep = increment_corr_estimate(ens, 1.0, 1.0)
        zscore = rep.estimate / rep.std_error
        D = (H - 1) * (p - 2)
        out.append(StatReport(
            f"A7 sign p={p} H={H} predicted {pred.value}",
            statistic=-s * zscore,
            critical_value=-TOLERANCES.corr_se,
            estimate=rep.estimate,
            std_error=rep.std_error,
            parameters={"p": p, "H": H, "mu": mu, "D": D, "predicted": pred.value},
            metadata={"rho_theory": increment_correlation(1.0, 1 - 2 * cfg.h), "n": n},
        ))
    for j, (p, H, mu) in enumerate(ZERO_CELLS):
        assert correlation_sign(H, p) is CorrelationSign.ZERO
        ens = simulate_hougaard(PowerFamilySpec(p, 1.0, mu), TimeGrid(np.array([0.0, 1.0, 2.0])), n, _stream(seed, 80 + j))
        rep = increment_corr_estimate(ens, 1.0, 1.0, label=f"A7 D=1 p={p} H={H}")
        rep.parameters.update({"p": p, "H": H, "mu": mu, "D": 1.0})
        out.append(rep)
    return out


def suite_lamperti(seed=DEFAULT_SEED, quick=False, n=None, **_):
    """A8: stationarity of Lamperti marginals and a mismatched-H control."""
    n = n or 10_000
    s = _stream(seed, 90)
    out = []
    for k, (gen, H, name) in enumerate([(HougaardFamily(3), 2.0, "hougaard p=3"), (DriftBrownianFamily(), 0.5, "drift brownian")]):
        a = lamperti_marginal_sample(gen, 1.0, H, 0.0, n, s.child(2 * k))
        b = lamperti_marginal_sample(gen, 1.0, H, 1.0, n, s.child(2 * k + 1))
        out.append(ks_two_sample(a, b, label=f"A8 lamperti {name} H={H}"))
    gen = HougaardFamily(3)
    a = lamperti_marginal_sample(gen, 1.0, 1.5, 0.0, n, s.child(10))
    b = lamperti_marginal_sample(gen, 1.0, 1.5, 2.0, n, s.child(11))
    ks = ks_two_sample(a, b)
    out.append(StatReport("A8 negative control hougaard p=3 with H=1.5 (critical/KS ratio)",
                          statistic=ks.critical_value / ks.statistic, critical_value=1.0,
                          estimate=ks.statistic, parameters={"true_H": 2.0, "used_H": 1.5, "t": [0.0, 2.0]}))
    return out


def suite_psd(seed=DEFAULT_SEED, quick=False, **_):
    """A9: positive semidefiniteness of R_D inside [0, 2] and a violation at D = 2.5."""
    grids = [np.arange(1.0, 21.0), np.linspace(0.05, 1.0, 20), np.geomspace(0.01, 10.0, 20)]
    out = []
    for D in (0, 0.5, 1, 1.5, 2):
        worst = min(psd_check(D, g) for g in grids)
        out.append(StatReport(f"A9 psd D={D} (negated min eigenvalue)", statistic=-worst, critical_value=1e-10,
                              estimate=worst, parameters={"D": D}))
    grid, ev = find_psd_counterexample(2.5, seed=seed)
    out.append(StatReport("A9 counterexample D=2.5 (min eigenvalue)", statistic=ev, critical_value=-1e-6,
                          estimate=ev, parameters={"D": 2.5, "grid": grid}))
    return out


def suite_rg(seed=DEFAULT_SEED, quick=False, n=None, **_):
    """A10: random walk with drift renormalizes to Brownian motion with drift."""
    n = n or 10_000
    rep = convergence_diagnostic(RandomWalkFamily(), DriftBrownianFamily(), 0.5, [4, 16, 64, 256], 1.0, [1.0], n,
                                 _stream(seed, 100), threshold=0.02)
    rep.label = "A10 RG convergence (distance at c=256; infinite if not monotone)"
    return [rep]


def suite_h1(seed=DEFAULT_SEED, quick=False, **_):
    """A11: translation and scaling identities of the exponential variance family."""
    z = np.linspace(-3.0, 3.0, 13)
    fam = ExpVarianceFamily(b=1.0, sigma2=1.0, mu=0.4, weight=1.5)
    out = [
        StatReport("A11 translation c=0.5", statistic=expvar_translation_residual(fam, 0.5, z), critical_value=1e-9),
        StatReport("A11 scaling c=2", statistic=expvar_scaling_residual(fam, 2.0, z), critical_value=1e-9),
    ]
    h1 = H1FamilySpec(a=0.0, b=1.0, sigma2=1.0, mu=0.4)
    ts = np.array([0.01, 0.1, 0.5, 1.0, 2.0, 3.7, 10.0, 100.0])
    v1 = h1_variance_profile(h1, 1.0)
    dev = max(abs(h1_variance_profile(h1, t) / (t * v1) - 1) for t in ts)
    out.append(StatReport("A11 V1 linear in t (max relative deviation)", statistic=dev, critical_value=1e-12))
    return out


SUITES = {
    "params": suite_params,
    "ss": suite_ss,
    "moments": suite_moments,
    "tweedie-scaling": suite_tweedie_scaling,
    "fhm-variance": suite_fhm_variance,
    "fhm-cgf": suite_fhm_cgf,
    "corr-sign": suite_corr_sign,
    "lamperti": suite_lamperti,
    "psd": suite_psd,
    "rg": suite_rg,
    "h1": suite_h1,
}

ACCEPTANCE = {
    "A1": "params", "A2": "ss", "A3": "moments", "A4": "tweedie-scaling", "A5": "fhm-variance",
    "A6": "fhm-cgf", "A7": "corr-sign", "A8": "lamperti", "A9": "psd", "A10": "rg", "A11": "h1",
}


def run_suite(name: str, seed: int = DEFAULT_SEED, quick: bool = False, **kw) -> tuple[list[StatReport], float]:
    """Run one suite; returns its reports and the elapsed seconds."""
    if name in ACCEPTANCE:
        name = ACCEPTANCE[name]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    t0 = time.perf_counter()
    reports = SUITES[name](seed=seed, quick=quick, **kw)
    return reports, time.perf_counter() - t0


def run_all(seed: int = DEFAULT_SEED, quick: bool = False) -> dict:
    return {name: run_suite(name, seed, quick) for name in SUITES}
