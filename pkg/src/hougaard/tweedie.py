"""Cumulant generators and cumulant transforms of Tweedie models.

Conventions
-----------
``kappa_alpha`` is the unit cumulant generator with variance function
``mu**p``.  Dispersion is absorbed into the canonical parameter: the process
``S_p(mu; t)`` has cumulant transform

    C(z) = (t / sigma2) * [kappa_alpha(theta + i sigma2 z) - kappa_alpha(theta)]

with ``theta = theta_of_mu(mu, alpha)``, so that its mean is ``mu t`` and its
variance ``sigma2 mu**p t``.  The Tweedie dispersion model ``Tw_p(mu, t)`` is
the law of ``S_p(mu; t) / t``.

All cumulant transforms use the principal branch and are evaluated in the
form ``kappa(theta) * expm1(alpha * log1p(i y / theta))`` to avoid cancellation
near ``z = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .family_params import (
    DomainError,
    Interval,
    PowerFamilySpec,
    alpha_of_p,
    mu_domain,
    INF_POWER,
)

__all__ = [
    "kappa_alpha",
    "kappa_alpha_d1",
    "kappa_alpha_d2",
    "theta_of_mu",
    "canonical_theta",
    "CumulantFunction",
    "tilt",
    "cumulant_transform",
    "tweedie_cumulant",
    "TweedieDistribution",
    "mean_var",
    "scaling_identity_residual",
    "numerical_moments",
    "variance_from_cumulant",
    "ExpVarianceFamily",
    "expvar_kappa",
    "expvar_cumulant",
    "expvar_ed_cumulant",
    "expvar_translation_residual",
    "expvar_scaling_residual",
]

DEFAULT_DIFF_STEP = 1e-4


def _clog1p(w):
    """Complex log1p, accurate for small |w|."""
    w = np.asarray(w, dtype=complex)
    shape = w.shape
    w = w.reshape(-1)
    out = np.log1p(w)
    small = np.abs(w) < 1e-3
    if np.any(small):
        ws = w[small]
        # log1p series to w**7 is exact to double precision for |w| < 1e-3
        acc = np.zeros_like(ws)
        term = ws.copy()
        for k in range(1, 8):
            acc += (-1) ** (k + 1) * term / k
            term = term * ws
        out[small] = acc
    return out.reshape(shape)


def _cexpm1(v):
    v = np.asarray(v, dtype=complex)
    shape = v.shape
    v = v.reshape(-1)
    out = np.exp(v) - 1.0
    small = np.abs(v) < 1e-3
    if np.any(small):
        vs = v[small]
        acc = np.zeros_like(vs)
        term = vs.copy()
        fact = 1.0
        for k in range(1, 8):
            fact *= k
            acc += term / fact
            term = term * vs
        out[small] = acc
    return out.reshape(shape)


def _check_alpha(alpha):
    if alpha == 1 or (not math.isinf(alpha) and alpha > 2):
        raise DomainError(f"alpha={alpha} is not a Tweedie stable index")


def _kappa_domain_ok(x, alpha) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if alpha == -math.inf or alpha == 2:
        return np.ones(x.shape, dtype=bool)
    if alpha == 0:
        return (-x).real > 0
    r = (x / (alpha - 1)).real
    if alpha > 0:
        return r >= 0
    return r > 0


def kappa_alpha(x, alpha):
    """Unit cumulant generator ``((alpha-1)/alpha) (x/(alpha-1))**alpha``.

    Closed forms replace the formula at alpha = 0 (``-log(-x)``) and at
    alpha = -inf (``exp(x)``).  Raises ``DomainError`` outside the region of
    analyticity (extended to the imaginary axis when alpha > 0).
    """
    _check_alpha(alpha)
    alpha = float(alpha)
    x = np.asarray(x, dtype=complex)
    if not np.all(_kappa_domain_ok(x, alpha)):
        raise DomainError(f"argument outside the analyticity region of kappa_alpha (alpha={alpha})")
    if alpha == -math.inf:
        out = np.asarray(np.exp(x))
    elif alpha == 0:
        out = np.asarray(-np.log(-x))
    else:
        out = np.asarray((alpha - 1) / alpha * np.power(x / (alpha - 1), alpha))
    return out if out.ndim else out[()]


def kappa_alpha_d1(x, alpha):
    """First derivative: the mean map ``(x/(alpha-1))**(alpha-1)``."""
    _check_alpha(alpha)
    alpha = float(alpha)
    x = np.asarray(x, dtype=complex)
    if alpha == -math.inf:
        out = np.asarray(np.exp(x))
    elif alpha == 0:
        out = np.asarray(-1.0 / x)
    else:
        out = np.asarray(np.power(x / (alpha - 1), alpha - 1))
    return out if out.ndim else out[()]


def kappa_alpha_d2(x, alpha):
    _check_alpha(alpha)
    alpha = float(alpha)
    x = np.asarray(x, dtype=complex)
    if alpha == -math.inf:
        out = np.asarray(np.exp(x))
    elif alpha == 0:
        out = np.asarray(1.0 / x**2)
    else:
        out = np.asarray(np.power(x / (alpha - 1), alpha - 2))
    return out if out.ndim else out[()]


def theta_of_mu(mu, alpha):
    """Canonical parameter ``(alpha-1) mu**(1/(alpha-1))`` for interior ``mu``."""
    _check_alpha(alpha)
    if alpha == 2:
        return float(mu)
    if not (0 < mu < math.inf):
        raise DomainError(f"mu={mu} is not in the interior of the rate domain")
    if alpha == -math.inf:
        return math.log(mu)
    return (alpha - 1) * mu ** (1 / (alpha - 1))


def canonical_theta(spec: PowerFamilySpec) -> float:
    """Unit canonical parameter for ``spec``, including the closed boundary.

    The boundary members (mu = 0 for p < 0, mu = inf for p > 2) map to
    theta = 0, the untilted stable law.
    """
    alpha = alpha_of_p(spec.p)
    if spec.p < 0 and spec.mu == 0:
        return 0.0
    if spec.p > 2 and spec.mu == math.inf:
        return 0.0
    return theta_of_mu(spec.mu, alpha)


def _unit_increment(y, alpha, theta):
    """``kappa_alpha(theta + i y) - kappa_alpha(theta)`` for real ``y``."""
    y = np.asarray(y, dtype=float)
    iy = 1j * y
    if alpha == 2:
        return iy * theta - 0.5 * y**2
    if alpha == -math.inf:
        return math.exp(theta) * _cexpm1(iy)
    if theta == 0:
        return kappa_alpha(iy, alpha)
    if alpha == 0:
        return -_clog1p(iy / theta)
    k0 = (alpha - 1) / alpha * (theta / (alpha - 1)) ** alpha
    return k0 * _cexpm1(alpha * _clog1p(iy / theta))


@dataclass(frozen=True)
class CumulantFunction:
    """Cumulant generator ``u -> K(u + shift) - offset`` of a dispersion family.

    ``K(u) = kappa_alpha(sigma2 u) / sigma2``.  A base generator has
    ``shift = offset = 0``; :func:`tilt` produces shifted, normalized copies.
    """

    alpha: float
    sigma2: float = 1.0
    shift: float = 0.0
    offset: float = 0.0

    def _K(self, u):
        return kappa_alpha(self.sigma2 * np.asarray(u, dtype=complex), self.alpha) / self.sigma2

    def __call__(self, u):
        return self._K(np.asarray(u, dtype=complex) + self.shift) - self.offset

    def d1(self, u):
        return kappa_alpha_d1(self.sigma2 * (np.asarray(u, dtype=complex) + self.shift), self.alpha)

    def d2(self, u):
        return self.sigma2 * kappa_alpha_d2(self.sigma2 * (np.asarray(u, dtype=complex) + self.shift), self.alpha)

    @property
    def effective_domain(self) -> Interval:
        a = self.alpha
        if a == -math.inf or a == 2:
            base = Interval(-math.inf, math.inf)
        elif a <= 0:
            base = Interval(-math.inf, 0.0, False, False)
        elif a < 1:
            base = Interval(-math.inf, 0.0, False, True)
        else:
            base = Interval(0.0, math.inf, True, False)
        return Interval(base.lo - self.shift, base.hi - self.shift, base.lo_closed, base.hi_closed)


def tilt(base: CumulantFunction, theta0: float) -> CumulantFunction:
    """Exponential tilt: ``u -> kappa(u + theta0) - kappa(theta0)``."""
    dom = base.effective_domain
    if not dom.interior_contains(theta0):
        raise DomainError(f"theta0={theta0} is not interior to the effective domain {dom}")
    shift = base.shift + theta0
    fresh = CumulantFunction(base.alpha, base.sigma2, shift, 0.0)
    offset = complex(fresh._K(shift)).real
    return CumulantFunction(base.alpha, base.sigma2, shift, offset)


def cumulant_transform(z, spec: PowerFamilySpec, t: float = 1.0):
    """Log characteristic function of the Hougaard process ``S_p(mu; t)``.

    Mean ``mu t`` and variance ``sigma2 mu**p t``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    alpha = alpha_of_p(spec.p)
    theta = canonical_theta(spec)
    y = spec.sigma2 * np.asarray(z, dtype=float)
    out = (t / spec.sigma2) * _unit_increment(y, alpha, theta)
    out = np.asarray(out, dtype=complex)
    return out if out.ndim else out[()]


def tweedie_cumulant(z, spec: PowerFamilySpec, weight: float = 1.0):
    """Log characteristic function of ``Tw_p(mu, weight)`` (mean mu, variance V(mu)/weight)."""
    if not weight > 0:
        raise DomainError("weight must be positive")
    return cumulant_transform(np.asarray(z, dtype=float) / weight, spec, weight)


@dataclass(frozen=True)
class TweedieDistribution:
    spec: PowerFamilySpec
    weight: float = 1.0

    def __post_init__(self):
        if not self.weight > 0:
            raise DomainError("weight must be positive")

    @property
    def mean(self) -> float:
        return float(self.spec.mu)

    @property
    def variance(self) -> float:
        return self.spec.variance_unit / self.weight

    def cumulant(self, z):
        return tweedie_cumulant(z, self.spec, self.weight)


def mean_var(spec: PowerFamilySpec, t: float = 1.0) -> tuple[float, float]:
    """Mean and variance of ``S_p(mu; t)``: ``(mu t, sigma2 mu**p t)``."""
    return float(spec.mu * t), spec.variance_unit * t


def scaling_identity_residual(spec: PowerFamilySpec, t: float, c: float, z_grid) -> float:
    """Max |C(z; c Tw_p(mu, t)) - C(z; Tw_p(c mu, c**(p-2) t))| over ``z_grid``."""
    if not c > 0:
        raise DomainError("c must be positive")
    z = np.asarray(z_grid, dtype=float)
    lhs = tweedie_cumulant(c * z, spec, t)
    rhs = tweedie_cumulant(z, spec.with_mu(c * spec.mu), c ** (spec.p - 2) * t)
    return float(np.max(np.abs(lhs - rhs)))


def numerical_moments(cgf, step: float = DEFAULT_DIFF_STEP) -> tuple[float, float]:
    """Mean and variance from central differences of a cumulant transform at 0."""
    cp, c0, cm = cgf(step), cgf(0.0), cgf(-step)
    mean = ((cp - cm) / (2 * step) / 1j).real
    var = (-(cp - 2 * c0 + cm) / step**2).real
    return float(mean), float(var)


def variance_from_cumulant(spec: PowerFamilySpec, mu_grid) -> np.ndarray:
    """V(mu) as kappa'' composed with the numerically inverted mean map.

    The mean map is inverted by bracketing root finding, independently of the
    closed-form canonical parameter.
    """
    from scipy.optimize import brentq

    base = CumulantFunction(alpha_of_p(spec.p), spec.sigma2)
    dom = base.effective_domain
    out = []
    for mu in np.atleast_1d(mu_grid):
        def f(th):
            return complex(base.d1(th)).real - mu

        lo, hi = _bracket(f, dom)
        th = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
        out.append(complex(base.d2(th)).real)
    return np.asarray(out)


def _bracket(f, dom: Interval):
    if dom.hi == 0 and dom.lo == -math.inf:
        hi = -1e-12
        lo = -1.0
        while f(lo) > 0:
            lo *= 2.0
        while f(hi) < 0:
            hi /= 2.0
        return lo, hi
    if dom.lo == 0 and dom.hi == math.inf:
        lo, hi = 1e-12, 1.0
        while f(hi) < 0:
            hi *= 2.0
        return lo, hi
    lo, hi = -1.0, 1.0
    while f(lo) > 0:
        lo *= 2.0
    while f(hi) < 0:
        hi *= 2.0
    return lo, hi


# -- exponential variance family (p = infinity) ------------------------------


@dataclass(frozen=True)
class ExpVarianceFamily:
    """Exponential-variance family: ``V(mu) = sigma2 exp(b mu)`` on the real line.

    ``mu = +inf`` (b > 0) or ``mu = -inf`` (b < 0) selects the extreme
    1-stable boundary member.
    """

    b: float
    sigma2: float = 1.0
    mu: float = 0.0
    weight: float = 1.0
    p: object = field(default=INF_POWER, init=False, repr=False)

    def __post_init__(self):
        if self.b == 0:
            raise DomainError("b must be nonzero")
        if not self.sigma2 > 0 or not self.weight > 0:
            raise DomainError("sigma2 and weight must be positive")
        dom = mu_domain(INF_POWER, self.b)
        if not dom.contains(self.mu):
            raise DomainError(f"mu={self.mu} outside {dom}")

    @property
    def theta(self) -> float:
        """Canonical parameter, normalized so that theta = 0 has mean 0."""
        return -math.expm1(-self.b * self.mu) / (self.b * self.sigma2)

    def replace(self, **kw) -> "ExpVarianceFamily":
        d = dict(b=self.b, sigma2=self.sigma2, mu=self.mu, weight=self.weight)
        d.update(kw)
        return ExpVarianceFamily(**d)


def _xlogx_increment(eps):
    """``(1 + eps) log1p(eps) - eps``, with a series for small |eps|."""
    eps = np.asarray(eps, dtype=complex)
    shape = eps.shape
    eps = eps.reshape(-1)
    out = (1 + eps) * _clog1p(eps) - eps
    small = np.abs(eps) < 1e-2
    if np.any(small):
        e = eps[small]
        acc = np.zeros_like(e)
        term = e * e
        for k in range(2, 14):
            acc += (-1) ** k * term / (k * (k - 1))
            term = term * e
        out[small] = acc
    return out.reshape(shape)


def expvar_kappa(theta, b: float, sigma2: float = 1.0):
    """Cumulant generator solving ``kappa'' = sigma2 exp(b kappa')``, ``kappa'(0) = 0``.

    ``kappa(theta) = (w log w - w + 1) / (b**2 sigma2)`` with
    ``w = 1 - b sigma2 theta``; branch point at ``w = 0``.
    """
    theta = np.asarray(theta, dtype=complex)
    w = 1 - b * sigma2 * theta
    if np.any((w.real <= 0) & (w.imag == 0) & (w.real != 0)):
        raise DomainError("theta beyond the branch point 1 - b sigma2 theta = 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(w == 0, 0.0, w * np.log(np.where(w == 0, 1.0, w)))
    out = (val - w + 1) / (b * b * sigma2)
    return out if out.ndim else out[()]


def _expvar_unit_increment(z, b, sigma2, mu):
    """``kappa(theta_mu + i z) - kappa(theta_mu)`` for real ``z``."""
    z = np.asarray(z, dtype=float)
    if math.isinf(mu):
        wp = -1j * b * sigma2 * z
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(z == 0, 0.0, wp * np.log(np.where(z == 0, 1.0, wp)) - wp)
        return val / (b * b * sigma2)
    w = math.exp(-b * mu)
    eps = -1j * b * sigma2 * z / w
    return w * (eps * math.log(w) + _xlogx_increment(eps)) / (b * b * sigma2)


def expvar_cumulant(z, fam: ExpVarianceFamily):
    """Log characteristic function of the Lévy process ``S_inf(mu, b; t)``, t = ``fam.weight``.

    Mean ``mu t``, variance ``sigma2 exp(b mu) t``.
    """
    out = fam.weight * _expvar_unit_increment(z, fam.b, fam.sigma2, fam.mu)
    out = np.asarray(out, dtype=complex)
    return out if out.ndim else out[()]


def expvar_ed_cumulant(z, fam: ExpVarianceFamily):
    """Log characteristic function of ``Tw_inf(mu, b, t)`` (mean mu, variance V(mu)/t)."""
    t = fam.weight
    return expvar_cumulant(np.asarray(z, dtype=float) / t, fam)


def expvar_translation_residual(fam: ExpVarianceFamily, c: float, z_grid) -> float:
    """Residual of ``c + Tw_inf(mu, b, t) = Tw_inf(c + mu, b, t exp(b c))``."""
    z = np.asarray(z_grid, dtype=float)
    lhs = 1j * z * c + expvar_ed_cumulant(z, fam)
    rhs = expvar_ed_cumulant(z, fam.replace(mu=fam.mu + c, weight=fam.weight * math.exp(fam.b * c)))
    return float(np.max(np.abs(lhs - rhs)))


def expvar_scaling_residual(fam: ExpVarianceFamily, c: float, z_grid) -> float:
    """Residual of ``c Tw_inf(mu, b, t) = Tw_inf(c mu, b/c, t/c**2)``."""
    if not c > 0:
        raise DomainError("c must be positive")
    z = np.asarray(z_grid, dtype=float)
    lhs = expvar_ed_cumulant(c * z, fam)
    rhs = expvar_ed_cumulant(z, fam.replace(mu=c * fam.mu, b=fam.b / c, weight=fam.weight / c**2))
    return float(np.max(np.abs(lhs - rhs)))
