"""Hougaard Lévy process paths on time grids.

Path ``i`` of an ensemble built from stream ``s`` draws from ``s.child(i)``,
so a path is the same whether it is simulated alone or with others.
Increments over a step ``dt`` are exact draws of ``S_p(mu; dt)``; values
between grid points are not defined.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _sps

from .family_params import DomainError, PowerFamilySpec, hurst_of_p
from .rng import RandomStream
from .samplers import sample_hougaard_increments
from .stats import StatReport, empirical_moments, ks_two_sample
from .tweedie import mean_var

__all__ = [
    "TimeGrid",
    "PathEnsemble",
    "simulate_hougaard",
    "extend_two_sided",
    "sample_marginal",
    "marginal_ss_check",
    "poisson_tv_distance",
    "DEFAULT_INCREMENT_BUDGET",
]

DEFAULT_INCREMENT_BUDGET = 200_000_000


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing finite times; one-sided grids start at 0."""

    times: np.ndarray
    two_sided: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("times must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(t)):
            raise ValueError("times must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.two_sided:
            if not np.any(t == 0.0):
                raise ValueError("a two-sided grid must contain 0")
        elif t[0] != 0.0:
            raise ValueError("a one-sided grid must start at 0")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, t_max: float, step: float) -> "TimeGrid":
        if not (t_max > 0 and step > 0):
            raise ValueError("t_max and step must be positive")
        k = int(round(t_max / step))
        if k >= 1 and math.isclose(k * step, t_max, rel_tol=1e-9):
            return cls(np.linspace(0.0, t_max, k + 1))
        t = np.arange(0.0, t_max, step)
        return cls(np.append(t, t_max))

    @classmethod
    def from_times(cls, times) -> "TimeGrid":
        """One-sided grid through 0 and the given positive times."""
        t = np.unique(np.asarray(times, dtype=float))
        if np.any(t < 0):
            raise ValueError("times must be non-negative")
        if t[0] != 0.0:
            t = np.concatenate([[0.0], t])
        return cls(t)

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.times)

    def index(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t))
        for j in (i - 1, i):
            if 0 <= j < self.times.size and math.isclose(self.times[j], t, rel_tol=1e-12, abs_tol=1e-12):
                return j
        raise KeyError(f"time {t} is not a grid point")


@dataclass
class PathEnsemble:
    grid: TimeGrid
    values: np.ndarray
    spec: object = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != self.grid.times.size:
            raise ValueError("values must be n_paths x n_times")

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def at(self, t: float) -> np.ndarray:
        """Column of values at grid time ``t``."""
        return self.values[:, self.grid.index(t)]

    def increments(self) -> np.ndarray:
        return np.diff(self.values, axis=1)


def _check_budget(n: int, budget: int):
    if n > budget:
        raise RuntimeError(f"run needs {n} increments, above the budget of {budget}")


def _spec_meta(spec: PowerFamilySpec) -> dict:
    return {"p": float(spec.p), "sigma2": float(spec.sigma2), "mu": float(spec.mu)}


def fill_rows(out, row_fn, threads: int = 1):
    """``out[i] = row_fn(i)`` for every row; rows are independent, so any
    worker count gives the same array."""
    n = out.shape[0]
    if threads <= 1 or n < 2:
        for i in range(n):
            out[i] = row_fn(i)
        return out

    def work(block):
        for i in block:
            out[i] = row_fn(i)

    blocks = np.array_split(np.arange(n), min(threads, n))
    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(work, blocks))
    return out


def _paths(spec, steps, n_paths, stream, threads=1):
    out = np.zeros((n_paths, steps.size + 1))
    fill_rows(out[:, 1:], lambda i: np.cumsum(sample_hougaard_increments(spec, steps, stream.child(i))), threads)
    return out


def simulate_hougaard(spec: PowerFamilySpec, grid: TimeGrid, n_paths: int, stream: RandomStream,
                      increment_budget: int = DEFAULT_INCREMENT_BUDGET, threads: int = 1) -> PathEnsemble:
    """Paths of ``S_p(mu; t)`` on a one-sided grid (cumulated exact increments).

    Path ``i`` uses ``stream.child(i)``, so ``threads`` never changes the result.
    """
    if grid.two_sided:
        raise ValueError("simulate_hougaard needs a one-sided grid")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    _check_budget(n_paths * grid.steps.size, increment_budget)
    values = _paths(spec, grid.steps, n_paths, stream, threads)
    meta = {"kind": "hougaard", "spec": _spec_meta(spec), "stream": stream.metadata(), "n_paths": n_paths}
    return PathEnsemble(grid, values, spec, meta)


def extend_two_sided(spec: PowerFamilySpec, T: float, step: float, n_paths: int, stream: RandomStream,
                     increment_budget: int = DEFAULT_INCREMENT_BUDGET) -> PathEnsemble:
    """Paths on ``[-T, T]`` with ``X(-t) = -X'(t)`` for an independent copy ``X'``.

    Path ``i`` uses ``stream.child(i).child(0)`` for t >= 0 and
    ``stream.child(i).child(1)`` for t <= 0.
    """
    if not (T > 0 and step > 0):
        raise ValueError("T and step must be positive")
    half = TimeGrid.uniform(T, step)
    steps = half.steps
    _check_budget(2 * n_paths * steps.size, increment_budget)
    pos = np.zeros((n_paths, half.times.size))
    neg = np.zeros_like(pos)
    for i in range(n_paths):
        s = stream.child(i)
        pos[i, 1:] = np.cumsum(sample_hougaard_increments(spec, steps, s.child(0)))
        neg[i, 1:] = np.cumsum(sample_hougaard_increments(spec, steps, s.child(1)))
    times = np.concatenate([-half.times[:0:-1], half.times])
    values = np.concatenate([-neg[:, :0:-1], pos], axis=1)
    meta = {"kind": "hougaard-two-sided", "spec": _spec_meta(spec), "stream": stream.metadata(),
            "n_paths": n_paths, "T": T, "step": step}
    return PathEnsemble(TimeGrid(times, two_sided=True), values, spec, meta)


def sample_marginal(spec: PowerFamilySpec, t: float, n: int, stream) -> np.ndarray:
    """``n`` independent draws of ``S_p(mu; t)``."""
    return sample_hougaard_increments(spec, np.full(int(n), float(t)), stream)


def poisson_tv_distance(mu: float, c: float, t: float) -> float:
    """Total variation between the pmfs of ``S_1(mu/c; ct)`` and ``S_1(mu; t)``."""
    lam1 = (mu / c) * (c * t)
    lam2 = mu * t
    hi = int(max(lam1, lam2) + 40 * math.sqrt(max(lam1, lam2)) + 40)
    k = np.arange(hi + 1)
    return 0.5 * float(np.abs(_sps.poisson.pmf(k, lam1) - _sps.poisson.pmf(k, lam2)).sum())


def marginal_ss_check(spec: PowerFamilySpec, H, c: float, t: float, n: int, stream: RandomStream,
                      rate_exponent=None) -> StatReport:
    """KS comparison of ``c^-H S_p(mu c^(H-1); ct)`` with ``S_p(mu; t)``.

    ``H`` must be the Lévy value ``1/alpha``. ``rate_exponent`` overrides the
    default rate map exponent ``H - 1``.
    """
    if not math.isclose(float(H), float(hurst_of_p(spec.p)), rel_tol=1e-12, abs_tol=1e-12):
        raise DomainError(f"H={H} is not the self-similarity index {hurst_of_p(spec.p)} for p={spec.p}")
    if not (c > 0 and t > 0):
        raise DomainError("c and t must be positive")
    k = H - 1 if rate_exponent is None else rate_exponent
    scaled = spec.with_mu(spec.mu * c**k)
    a = c ** (-H) * sample_marginal(scaled, c * t, n, stream.child(0))
    b = sample_marginal(spec, t, n, stream.child(1))
    rep = ks_two_sample(a, b, label=f"marginal-ss p={spec.p} c={c} t={t}")
    ma, mb = empirical_moments(a), empirical_moments(b)
    m, v = mean_var(spec, t)
    rep.parameters.update({"p": float(spec.p), "H": float(H), "mu": float(spec.mu), "c": c, "t": t})
    rep.estimate = {"ks": rep.statistic, "mean_gap": ma.mean - mb.mean, "var_gap": ma.variance - mb.variance}
    rep.std_error = {"mean_gap": math.hypot(ma.se_mean, mb.se_mean), "var_gap": math.hypot(ma.se_variance, mb.se_variance)}
    rep.metadata.update({"stream": stream.metadata(), "target_mean": m, "target_variance": v})
    return rep
