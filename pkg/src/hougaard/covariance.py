"""Second-order structure of self-similar families.

Convention: ``|t - s|^(2-D) := 0`` when ``s = t``, including D = 2, so that
``cov(s, s) = V_H(s)`` throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .family_params import DomainError, Interval, check_power, mu_domain

__all__ = [
    "VarianceFunction",
    "H1FamilySpec",
    "variance_profile",
    "cov",
    "r_d",
    "increment_correlation",
    "gram_matrix",
    "psd_check",
    "find_psd_counterexample",
    "h1_variance_profile",
    "h1_cov",
    "mean_structure",
    "PSD_TOL",
]

PSD_TOL = -1e-10


@dataclass(frozen=True)
class VarianceFunction:
    """A map ``mu -> V(mu)`` on ``domain``: power, exponential or custom."""

    kind: str
    sigma2: float = 1.0
    p: float | None = None
    b: float | None = None
    func: Callable | None = None
    domain: Interval = Interval(-math.inf, math.inf)

    @classmethod
    def power(cls, p, sigma2=1.0) -> "VarianceFunction":
        check_power(p)
        return cls("power", sigma2, p=p, domain=mu_domain(p))

    @classmethod
    def exponential(cls, b, sigma2=1.0) -> "VarianceFunction":
        if b == 0:
            raise DomainError("the exponential variance function needs b != 0")
        return cls("exponential", sigma2, b=b)

    @classmethod
    def custom(cls, func, domain: Interval = Interval(-math.inf, math.inf)) -> "VarianceFunction":
        return cls("custom", 1.0, func=func, domain=domain)

    def __call__(self, mu):
        if not self.domain.contains(mu):
            raise DomainError(f"mu={mu} is outside {self.domain}")
        if self.kind == "power":
            return self.sigma2 * (1.0 if self.p == 0 else mu**self.p)
        if self.kind == "exponential":
            return self.sigma2 * math.exp(self.b * mu)
        return float(self.func(mu))


def variance_profile(V: VarianceFunction, H, mu, t):
    """``V_H(mu; t) = t^(2H) V(mu t^(1-H))``; zero at t = 0."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return 0.0
    return t ** (2 * H) * V(mu * t ** (1 - H))


def cov(V: VarianceFunction, H, mu, s, t):
    """``(V_H(s) + V_H(t) - V_H(|t-s|)) / 2``."""
    if s <= 0 or t <= 0:
        raise DomainError("s and t must be positive")
    return 0.5 * (variance_profile(V, H, mu, s) + variance_profile(V, H, mu, t) - variance_profile(V, H, mu, abs(t - s)))


def _check_D(D):
    if not 0 <= D <= 2:
        raise DomainError(f"D={D} outside [0, 2]")


def _pow0(x, e):
    """``x**e`` with ``0**e := 0`` for every exponent."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(x == 0, 0.0, np.abs(x) ** e)
    return out


def r_d(s, t, D, check: bool = True):
    """``R_D(s, t) = (s^(2-D) + t^(2-D) - |t-s|^(2-D)) / 2``."""
    if check:
        _check_D(D)
    e = 2 - D
    out = 0.5 * (_pow0(s, e) + _pow0(t, e) - _pow0(np.subtract(t, s), e))
    return out if np.ndim(out) else float(out)


def increment_correlation(r, D):
    """Correlation of ``X(s)`` and ``X(s+t) - X(s)`` with ``r = sqrt(s/t)``."""
    _check_D(D)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("r must be positive")
    e = 2 - D
    out = 0.5 * ((1 / r + r) ** e - r**e - r ** (-e))
    return out if out.ndim else float(out)


def gram_matrix(D, grid, check: bool = True) -> np.ndarray:
    t = np.asarray(grid, dtype=float)
    return r_d(t[:, None], t[None, :], D, check=check)


def psd_check(D, grid, check: bool = True) -> float:
    """Smallest eigenvalue of ``[R_D(t_i, t_j)]`` on the grid scaled to max 1."""
    t = np.asarray(grid, dtype=float)
    if t.size == 0 or np.any(t <= 0) or np.unique(t).size != t.size:
        raise ValueError("grid must hold distinct positive times")
    return float(np.linalg.eigvalsh(gram_matrix(D, t / t.max(), check=check))[0])


def find_psd_counterexample(D, sizes=(2, 3, 4, 5), trials: int = 200, seed: int = 0):
    """Search small random grids for the most negative Gram eigenvalue.

    Meant for D outside [0, 2]; returns ``(grid, eigenvalue)``.
    """
    rng = np.random.default_rng(seed)
    best = (None, math.inf)
    for k in sizes:
        for _ in range(trials):
            g = np.sort(rng.uniform(0.05, 1.0, k))
            if np.unique(g).size != k:
                continue
            ev = psd_check(D, g, check=False)
            if ev < best[1]:
                best = (g, ev)
    return best


@dataclass(frozen=True)
class H1FamilySpec:
    """H = 1 family with mean ``a e^(b mu) + mu t`` and variance function ``sigma2 e^(b mu)``."""

    a: float = 0.0
    b: float = 1.0
    sigma2: float = 1.0
    mu: float = 0.0

    def __post_init__(self):
        if self.b == 0:
            raise DomainError("b must be nonzero")

    def shift(self, c):
        """``f(c) = log(c) / b``."""
        return math.log(c) / self.b

    def mean(self, t):
        return self.a * math.exp(self.b * self.mu) + self.mu * t

    @property
    def variance_function(self) -> VarianceFunction:
        return VarianceFunction.exponential(self.b, self.sigma2)


def h1_variance_profile(fam: H1FamilySpec, t):
    """``V_1(mu; t) = t^2 V(mu + f(1/t))``, equal to ``sigma2 e^(b mu) t``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return 0.0
    return t**2 * fam.sigma2 * math.exp(fam.b * (fam.mu + fam.shift(1.0 / t)))


def h1_cov(fam: H1FamilySpec, s, t):
    if s <= 0 or t <= 0:
        raise DomainError("s and t must be positive")
    return 0.5 * (h1_variance_profile(fam, s) + h1_variance_profile(fam, t) - h1_variance_profile(fam, abs(t - s)))


def mean_structure(H, mu, t, a_pair=(0.0, 0.0), b_pair=(1.0, -1.0)):
    """``a(sgn mu) |mu|^(H/(H-1)) + b(sgn mu) |mu| t``.

    ``a_pair`` and ``b_pair`` hold the values at sign +1 and -1. With
    ``a = 0`` and ``b = (1, -1)`` this is the centered mean ``mu t``.
    """
    if H == 1:
        raise DomainError("H = 1 has its own mean structure (see H1FamilySpec)")
    e = H / (H - 1)
    idx = 0 if mu >= 0 else 1
    a, b = a_pair[idx], b_pair[idx]
    if mu == 0:
        if a != 0 and e <= 0:
            raise DomainError("the constant term is undefined at mu = 0 for H/(H-1) <= 0")
        return 0.0
    return a * abs(mu) ** e + b * abs(mu) * t
