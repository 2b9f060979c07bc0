"""Parameter algebra for power-variance families.

Maps the power parameter ``p`` to the stable index ``alpha``, the Lévy Hurst
exponent ``H = 1/alpha`` and the fractal dimension ``D = (H - 1)(p - 2)``, and
validates the rate and Hurst domains.

All functions are written with plain arithmetic so they accept
``fractions.Fraction`` inputs and then return exact results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from numbers import Real

__all__ = [
    "INF_POWER",
    "DomainError",
    "Interval",
    "PowerFamilySpec",
    "HurstProfile",
    "CorrelationSign",
    "alpha_of_p",
    "hurst_of_p",
    "fractal_dimension",
    "mu_domain",
    "hurst_domain",
    "correlation_sign",
    "correlation_sign_map",
    "hurst_profile",
    "check_power",
]


class DomainError(ValueError):
    """A parameter lies outside the domain where an operation is defined."""


class _InfPower:
    """Marker for the p = infinity (exponential variance) family."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF_POWER"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_InfPower, ())


INF_POWER = _InfPower()


def _is_inf_power(p) -> bool:
    return p is INF_POWER


def check_power(p) -> None:
    """Raise if ``p`` is in the excluded gap (0, 1) or is not a real number."""
    if _is_inf_power(p):
        return
    if not isinstance(p, Real) or isinstance(p, bool):
        raise DomainError(f"power parameter must be real or INF_POWER, got {p!r}")
    if isinstance(p, float) and math.isinf(p):
        raise DomainError("use INF_POWER for p = infinity, not a float infinity")
    if math.isnan(p):
        raise DomainError("power parameter is NaN")
    if 0 < p < 1:
        raise DomainError(f"p={p} lies in the excluded interval (0, 1)")


@dataclass(frozen=True)
class Interval:
    """Real interval with explicit endpoint inclusion; endpoints may be +-inf.

    ``hi_closed`` with ``hi = inf`` means the point at infinity belongs to the
    extended domain (e.g. ``(0, inf]`` for p > 2).
    """

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def contains(self, x) -> bool:
        if isinstance(x, float) and math.isnan(x):
            return False
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    __contains__ = contains

    def interior_contains(self, x) -> bool:
        return self.lo < x < self.hi

    def __str__(self) -> str:
        def fmt(v):
            if v == math.inf:
                return "inf"
            if v == -math.inf:
                return "-inf"
            return f"{float(v):g}"

        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{fmt(self.lo)}, {fmt(self.hi)}{right}"


def alpha_of_p(p):
    """Stable index ``alpha = 1 + 1/(1 - p)``.

    ``alpha(1) = -inf`` and ``alpha(INF_POWER) = 1`` by convention.
    """
    check_power(p)
    if _is_inf_power(p):
        return 1
    if p == 1:
        return -math.inf
    return 1 + 1 / (1 - p)


def hurst_of_p(p):
    """Hurst exponent ``1/alpha`` of the Hougaard Lévy family with power p."""
    check_power(p)
    if _is_inf_power(p):
        return 1
    if p == 2:
        raise DomainError("p=2 (alpha=0) is not self-similar as a Lévy family")
    if p == 1:
        return 0
    return (1 - p) / (2 - p)


def fractal_dimension(H, p):
    """Fractal dimension ``D = (H - 1)(p - 2)``; range is not checked here."""
    check_power(p)
    if _is_inf_power(p):
        raise DomainError("D is undefined for p = infinity")
    return (H - 1) * (p - 2)


def mu_domain(p, b: float | None = None) -> Interval:
    """Extended rate domain for power ``p``.

    For ``INF_POWER`` the sign of the slope ``b`` decides which infinity is
    adjoined: ``(-inf, inf]`` for b > 0 and ``[-inf, inf)`` for b < 0.
    """
    check_power(p)
    if _is_inf_power(p):
        if b is None or b == 0:
            raise DomainError("the p = infinity domain needs a nonzero slope b")
        if b > 0:
            return Interval(-math.inf, math.inf, False, True)
        return Interval(-math.inf, math.inf, True, False)
    if p < 0:
        return Interval(0.0, math.inf, True, False)
    if p == 0:
        return Interval(-math.inf, math.inf, False, False)
    if p <= 2:
        return Interval(0.0, math.inf, False, False)
    return Interval(0.0, math.inf, False, True)


def hurst_domain(p) -> Interval:
    """Closed interval of admissible H, with endpoints 1 and (2 - alpha)/alpha."""
    check_power(p)
    if not _is_inf_power(p) and p == 2:
        raise DomainError("the H-domain is not defined for p=2")
    alpha = alpha_of_p(p)
    if alpha == -math.inf:
        other = -1
    else:
        other = (2 - alpha) / alpha
    lo, hi = (other, 1) if other <= 1 else (1, other)
    return Interval(lo, hi, True, True)


class CorrelationSign(str, Enum):
    POSITIVE = "positive"
    ZERO = "zero"
    NEGATIVE = "negative"


def correlation_sign(H, p) -> CorrelationSign:
    """Sign of the correlation between adjacent non-overlapping increments.

    Zero iff D = 1, positive for 0 <= D < 1, negative for 1 < D <= 2.
    """
    if H not in hurst_domain(p):
        raise DomainError(f"H={H} is outside the admissible domain {hurst_domain(p)} for p={p}")
    D = fractal_dimension(H, p)
    if not 0 <= D <= 2:
        raise DomainError(f"D={D} outside [0, 2]")
    if D == 1:
        return CorrelationSign.ZERO
    return CorrelationSign.POSITIVE if D < 1 else CorrelationSign.NEGATIVE


def correlation_sign_map(p) -> list[tuple[Interval, CorrelationSign]]:
    """Split the H-domain of ``p`` by increment-correlation sign.

    D runs from 0 at H = 1 to 2 at the other endpoint, and D = 1 at
    ``H = 1 + 1/(p - 2)``.
    """
    dom = hurst_domain(p)
    if dom.lo == dom.hi:
        raise DomainError(f"the H-domain for p={p} is a single point")
    h1 = 1 + 1 / (p - 2)
    lo_sign = correlation_sign(dom.lo, p)
    hi_sign = correlation_sign(dom.hi, p)
    return [
        (Interval(dom.lo, h1, True, False), lo_sign),
        (Interval(h1, h1, True, True), CorrelationSign.ZERO),
        (Interval(h1, dom.hi, False, True), hi_sign),
    ]


@dataclass(frozen=True)
class PowerFamilySpec:
    """The (p, sigma2, mu) triple identifying one Tweedie/Hougaard family member.

    ``mu`` may be ``math.inf`` for p > 2 (untilted positive stable member).
    """

    p: object
    sigma2: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        check_power(self.p)
        if _is_inf_power(self.p):
            raise DomainError("use ExpVarianceFamily for the p = infinity family")
        if not self.sigma2 > 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        dom = mu_domain(self.p)
        if not dom.contains(self.mu):
            raise DomainError(f"mu={self.mu} is outside the rate domain {dom} for p={self.p}")

    @property
    def alpha(self):
        return alpha_of_p(self.p)

    @property
    def variance_unit(self) -> float:
        """V(mu) = sigma2 * mu**p."""
        if self.p == 0:
            return float(self.sigma2)
        if self.mu == 0:
            return math.inf
        return float(self.sigma2 * self.mu ** self.p)

    def with_mu(self, mu) -> "PowerFamilySpec":
        return PowerFamilySpec(self.p, self.sigma2, mu)


@dataclass(frozen=True)
class HurstProfile:
    p: object
    alpha: float
    hurst: float
    fractal_dim: float
    hurst_range: Interval


def hurst_profile(p, H=None) -> HurstProfile:
    """Bundle alpha, H, D and the admissible H-range for power ``p``.

    ``H`` defaults to the Lévy value ``1/alpha``.
    """
    if H is None:
        H = hurst_of_p(p)
    dom = hurst_domain(p)
    if H not in dom:
        raise DomainError(f"H={H} outside {dom}")
    D = fractal_dimension(H, p)
    return HurstProfile(p, alpha_of_p(p), H, D, dom)
