"""Lamperti transforms, the renormalization operator and a convergence harness.

Families are represented by marginal samplers (:class:`FamilyGenerator`).
A generator declares its Hurst exponent ``H`` and the rate-map exponent
``k`` under which it is self-similar, ``X(mu c^k; ct) = c^H X(mu; t)`` in
law. For Lévy families ``k = H - 1``; fractional Hougaard motions use
``k = 1/alpha - 1``. Lamperti and renormalization maps use the declared
``k`` when called with the generator's own ``H`` and ``H - 1`` otherwise.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .family_params import DomainError, Interval, PowerFamilySpec, hurst_of_p, mu_domain
from .fhm import FHMConfig, fhm_rate_exponent, simulate_fhm
from .levy_paths import sample_marginal
from .rng import RandomStream
from scipy import stats as _sps

from .stats import StatReport, ks_critical_value, ks_one_sample, ks_two_sample

__all__ = [
    "FamilyGenerator",
    "HougaardFamily",
    "DriftBrownianFamily",
    "RandomWalkFamily",
    "FHMFamily",
    "ShiftFamily",
    "LampertiFamily",
    "RenormalizedFamily",
    "lamperti_marginal_params",
    "lamperti_marginal_sample",
    "inverse_lamperti_marginal",
    "rg_parameter_map",
    "rg_apply",
    "convergence_diagnostic",
]


class FamilyGenerator(ABC):
    """Marginal sampler for a one-parameter family ``X(mu; t)``."""

    H: float
    domain: Interval

    @property
    def rate_exponent(self) -> float:
        return self.H - 1

    @abstractmethod
    def sample(self, mu: float, t: float, n: int, stream: RandomStream) -> np.ndarray:
        """``n`` draws of ``X(mu; t)``."""

    def cdf(self, mu, t):
        """Exact marginal CDF of ``X(mu; t)`` as a callable, or None if unavailable."""
        return None

    def check_mu(self, mu):
        if not self.domain.contains(mu):
            raise DomainError(f"mu={mu} is outside the family domain {self.domain}")

    def exponent_for(self, H) -> float:
        return self.rate_exponent if math.isclose(H, self.H) else H - 1


@dataclass(frozen=True)
class HougaardFamily(FamilyGenerator):
    p: float
    sigma2: float = 1.0

    @property
    def H(self):
        return float(hurst_of_p(self.p))

    @property
    def domain(self):
        return mu_domain(self.p)

    def sample(self, mu, t, n, stream):
        self.check_mu(mu)
        return sample_marginal(PowerFamilySpec(self.p, self.sigma2, mu), t, n, stream)


@dataclass(frozen=True)
class DriftBrownianFamily(FamilyGenerator):
    """``X(mu; t) = sigma B(t) + mu t``."""

    sigma: float = 1.0
    H: float = 0.5
    domain: Interval = Interval(-math.inf, math.inf)

    def sample(self, mu, t, n, stream):
        if t < 0:
            raise DomainError("t must be non-negative")
        g = stream.generator()
        return self.sigma * math.sqrt(t) * g.standard_normal(int(n)) + mu * t

    def cdf(self, mu, t):
        if not t > 0:
            return None
        return _sps.norm(mu * t, self.sigma * math.sqrt(t)).cdf

    def lamperti_paths(self, mu, times, n_paths, stream):
        """Pathwise ``Y(mu; t) = e^{-t/2} X(mu e^{-t/2}; e^t)`` on ``times``.

        Under the drift coupling ``Y(mu; t) = e^{-t/2} sigma B(e^t) + mu``, a
        stationary Ornstein-Uhlenbeck path shifted by ``mu``.
        """
        times = np.asarray(times, dtype=float)
        s = np.exp(times)
        ds = np.diff(np.concatenate([[0.0], s]))
        g = stream.generator()
        b = np.cumsum(g.standard_normal((int(n_paths), s.size)) * np.sqrt(ds), axis=1)
        return np.exp(-0.5 * times) * self.sigma * b + mu


@dataclass(frozen=True)
class RandomWalkFamily(FamilyGenerator):
    """``X(mu; t) = sum_{k <= floor(t)} xi_k + mu t`` with ``xi = E - 1``, E ~ Exp(1).

    Centered, unit variance, skewness 2. The partial sum is a shifted gamma
    variable, drawn by inversion so that one stream couples every t monotonically.
    """

    H: float = 0.5
    domain: Interval = Interval(-math.inf, math.inf)

    def sample(self, mu, t, n, stream):
        k = math.floor(t)
        g = stream.generator()
        if k == 0:
            return np.full(int(n), mu * t)
        return _sps.gamma.ppf(g.uniform(size=int(n)), k) - k + mu * t


@dataclass(frozen=True)
class ShiftFamily(FamilyGenerator):
    """Stationary family ``Y(mu; t) = sigma Z + mu``, Z standard normal."""

    sigma: float = 1.0
    H: float = 0.5
    domain: Interval = Interval(-math.inf, math.inf)

    def sample(self, mu, t, n, stream):
        return self.sigma * stream.generator().standard_normal(int(n)) + mu


@dataclass(frozen=True)
class FHMFamily(FamilyGenerator):
    """Fractional Hougaard motion marginals ``S_{p,H}(mu; t)``."""

    p: float
    H: float
    sigma2: float = 1.0
    options: dict = field(default_factory=dict, hash=False, compare=False)

    @property
    def domain(self):
        return mu_domain(self.p)

    @property
    def rate_exponent(self):
        return fhm_rate_exponent(PowerFamilySpec(self.p, self.sigma2, 1.0).alpha)

    def sample(self, mu, t, n, stream):
        self.check_mu(mu)
        cfg = FHMConfig(PowerFamilySpec(self.p, self.sigma2, mu), self.H, n_paths=int(n), stream=stream, **self.options)
        return simulate_fhm(cfg, [t]).at(t)


@dataclass(frozen=True)
class LampertiFamily(FamilyGenerator):
    """The stationary family ``Y(mu; t)`` obtained from ``base`` with exponent ``H``."""

    base: FamilyGenerator
    H: float

    @property
    def domain(self):
        return self.base.domain

    @property
    def rate_exponent(self):
        return self.base.exponent_for(self.H)

    def sample(self, mu, t, n, stream):
        return lamperti_marginal_sample(self.base, mu, self.H, t, n, stream)


def lamperti_marginal_params(mu, H, t, rate_exponent=None):
    """``(mu e^{t k}, e^t, e^{-t H})`` with ``k = H - 1`` unless given."""
    k = H - 1 if rate_exponent is None else rate_exponent
    return mu * math.exp(t * k), math.exp(t), math.exp(-t * H)


def lamperti_marginal_sample(gen: FamilyGenerator, mu, H, t, n, stream) -> np.ndarray:
    """Draws of ``Y(mu; t) = e^{-tH} X(mu e^{tk}; e^t)``."""
    mu2, s, scale = lamperti_marginal_params(mu, H, t, gen.exponent_for(H))
    if not gen.domain.contains(mu2):
        raise DomainError(f"transformed rate {mu2} leaves the family domain {gen.domain}")
    return scale * gen.sample(mu2, s, n, stream)


def inverse_lamperti_marginal(stationary_gen: FamilyGenerator, H, mu, t, n, stream) -> np.ndarray:
    """Draws of ``X(mu; t) = t^H Y(mu t^{-k}; log t)``."""
    if not t > 0:
        raise DomainError("t must be positive")
    k = stationary_gen.exponent_for(H)
    mu2 = mu * t ** (-k)
    if not stationary_gen.domain.contains(mu2):
        raise DomainError(f"transformed rate {mu2} leaves the family domain")
    return t**H * stationary_gen.sample(mu2, math.log(t), n, stream)


def rg_parameter_map(c, H, rate_exponent=None):
    """``(mu factor, time factor, value scale) = (c^k, c, c^-H)``."""
    if not c > 0:
        raise DomainError("c must be positive")
    k = H - 1 if rate_exponent is None else rate_exponent
    return c**k, c, c ** (-H)


@dataclass(frozen=True)
class RenormalizedFamily(FamilyGenerator):
    """``R_c X(mu; t) = c^-H X(mu c^k; ct)``."""

    base: FamilyGenerator
    c: float
    H: float
    k: float

    @property
    def domain(self):
        return self.base.domain

    @property
    def rate_exponent(self):
        return self.base.exponent_for(self.H)

    def parameter_map(self):
        return rg_parameter_map(self.c, self.H, self.k)

    def sample(self, mu, t, n, stream):
        fm, ft, sc = self.parameter_map()
        return sc * self.base.sample(mu * fm, t * ft, n, stream)


def rg_apply(gen: FamilyGenerator, c: float, H) -> FamilyGenerator:
    """Renormalization operator; repeated application merges the factors."""
    if not c > 0:
        raise DomainError("c must be positive")
    if isinstance(gen, RenormalizedFamily) and math.isclose(gen.H, H):
        c = gen.c * c
        gen = gen.base
    if c == 1:
        return gen
    return RenormalizedFamily(gen, c, H, gen.exponent_for(H))


def convergence_diagnostic(prelimit_gen: FamilyGenerator, target_gen: FamilyGenerator, H, c_schedule, mu,
                           t_grid, n: int, stream: RandomStream, threshold: float | None = None,
                           common_random_numbers: bool = True, require_monotone: bool = True) -> StatReport:
    """KS distances between ``R_c`` of the prelimit family and the target.

    When the target exposes an exact CDF the distance is one-sample;
    otherwise a target sample per t is drawn from ``stream.child(0).child(j)``
    and shared across c. The prelimit for cell ``(i, j)`` uses
    ``stream.child(1).child(j)`` for every c (common random numbers), or
    ``stream.child(1).child(j).child(i)`` when ``common_random_numbers`` is
    False. The statistic is the distance at the last c (worst over t),
    compared with ``threshold`` (default: the 1% KS critical value);
    ``metadata['monotone']`` records whether every t row decreases strictly
    along the schedule; with ``require_monotone`` a non-monotone run gets an
    infinite statistic (the last distance is kept in ``metadata``).
    """
    cs = [float(c) for c in c_schedule]
    ts = [float(t) for t in t_grid]
    dist = np.empty((len(cs), len(ts)))
    one_sample = all(target_gen.cdf(mu, t) is not None for t in ts)
    for j, t in enumerate(ts):
        if one_sample:
            cdf = target_gen.cdf(mu, t)
        else:
            target = target_gen.sample(mu, t, n, stream.child(0).child(j))
        for i, c in enumerate(cs):
            sub = stream.child(1).child(j)
            if not common_random_numbers:
                sub = sub.child(i)
            a = rg_apply(prelimit_gen, c, H).sample(mu, t, n, sub)
            dist[i, j] = (ks_one_sample(a, cdf) if one_sample else ks_two_sample(a, target)).statistic
    monotone = bool(np.all(np.diff(dist, axis=0) < 0))
    if threshold is None:
        threshold = ks_critical_value(n, n) if not one_sample else math.sqrt(-0.5 * math.log(0.005) / n)
    last = float(dist[-1].max())
    return StatReport(
        label="rg-convergence",
        statistic=last if (monotone or not require_monotone) else math.inf,
        critical_value=float(threshold),
        estimate={"distances": dist, "c": cs, "t": ts},
        parameters={"H": float(H), "mu": float(mu), "n": int(n)},
        metadata={"monotone": monotone, "last_distance": last, "one_sample": one_sample, "common_random_numbers": common_random_numbers,
                  "stream": stream.metadata()},
    )
