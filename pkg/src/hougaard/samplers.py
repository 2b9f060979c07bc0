"""Random variate generation for Tweedie distributions and Hougaard increments.

Every case reduces to a variable ``G`` with log moment generating function
``lam * (kappa(theta + v) - kappa(theta))`` where ``kappa`` is the unit
cumulant generator of stable index ``alpha`` and ``theta`` the canonical
parameter. The Tweedie variable with weight ``w`` is ``G / lam`` with
``lam = w / sigma2``; the Hougaard increment over a step ``dt`` is
``sigma2 * G`` with ``lam = dt / sigma2``.

============  ==========================================================
p             law of G
============  ==========================================================
0             normal ``N(lam theta, lam)``
1             Poisson ``(lam mu)``
(1, 2)        compound Poisson sum of gamma variables
2             gamma with shape ``lam`` and scale ``mu``
3             inverse Gaussian, mean ``lam mu``, shape ``lam**2``
p > 2         positive stable tilted by ``exp(theta x)``
p < 0         spectrally negative stable tilted by ``exp(theta x)``
============  ==========================================================

For p < 0 and mu > 0 no exact generator is used; the distribution function is
tabulated by FFT inversion of the characteristic function and sampled by
inversion (absolute CDF error below about 1e-8).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .family_params import DomainError, PowerFamilySpec, alpha_of_p
from .rng import RandomStream
from .tweedie import _unit_increment, canonical_theta, cumulant_transform, kappa_alpha

__all__ = [
    "ACCEPTANCE_FLOOR",
    "SamplerGuardError",
    "PoissonGammaParams",
    "poisson_gamma_params",
    "sample_tweedie",
    "sample_hougaard_increments",
    "sample_positive_stable",
    "sample_tilted_stable",
    "sample_extreme_one_stable",
    "positive_stable_scale",
]

ACCEPTANCE_FLOOR = 1e-6


class SamplerGuardError(RuntimeError):
    """A rejection sampler would run with acceptance below ``ACCEPTANCE_FLOOR``."""


def _rng(stream) -> np.random.Generator:
    if isinstance(stream, RandomStream):
        return stream.generator()
    if isinstance(stream, np.random.Generator):
        return stream
    raise TypeError("stream must be a RandomStream or numpy Generator")


@dataclass(frozen=True)
class PoissonGammaParams:
    """Compound Poisson sum of ``Gamma(shape, scale)`` variables, ``Poisson(rate)`` many."""

    rate: float
    shape: float
    scale: float

    def cumulant(self, z):
        z = np.asarray(z, dtype=float)
        return self.rate * np.expm1(-self.shape * np.log1p(-1j * z * self.scale))

    @property
    def zero_mass(self) -> float:
        return math.exp(-self.rate)


def poisson_gamma_params(spec: PowerFamilySpec, t: float = 1.0) -> PoissonGammaParams:
    """Compound Poisson-gamma representation of the increment ``S_p(mu; t)``, 1 < p < 2.

    The Tweedie variable ``Tw_p(mu, w)`` uses the same rate and shape with
    ``t = w`` and the scale divided by ``w``.
    """
    if not 1 < spec.p < 2:
        raise DomainError("the compound Poisson-gamma form needs 1 < p < 2")
    if not t > 0:
        raise DomainError("t must be positive")
    alpha = alpha_of_p(spec.p)
    theta = canonical_theta(spec)
    lam = t / spec.sigma2
    rate = lam * float(np.real(kappa_alpha(theta, alpha)))
    return PoissonGammaParams(rate=rate, shape=-alpha, scale=spec.sigma2 / (-theta))


def positive_stable_scale(alpha: float, lam) -> np.ndarray:
    """Scale ``(lam (1-alpha)^(1-alpha)/alpha)^(1/alpha)`` mapping the unit positive stable to G."""
    return (np.asarray(lam, float) * (1 - alpha) ** (1 - alpha) / alpha) ** (1 / alpha)


# ------------------------------------------------------------ p < 0 table ----

@lru_cache(maxsize=256)
def _extreme_stable_table(alpha: float, lam: float, theta: float):
    """(x, cdf) table for G when p < 0 and theta > 0."""
    k2 = lam * (theta / (alpha - 1)) ** (alpha - 2)
    mean = lam * (theta / (alpha - 1)) ** (alpha - 1)
    sd = math.sqrt(k2)
    lo = mean - 12 * sd - 35.0 / theta
    hi = mean + 12 * sd
    width = hi - lo
    n = int(2 ** np.clip(math.ceil(math.log2(width / (sd / 64))), 12, 22))
    dx = width / n
    dz = 2 * math.pi / (n * dx)
    z = (np.arange(n) - n // 2) * dz
    phi = np.exp(lam * _unit_increment(z, alpha, theta))
    dens = np.fft.fft(phi * np.exp(-1j * z * lo)).real
    dens *= dz / (2 * math.pi) * (-1.0) ** np.arange(n)
    dens = np.clip(dens, 0.0, None)
    x = lo + dx * np.arange(n)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * dx)])
    cdf /= cdf[-1]
    return x, cdf


def _draw_extreme_tilted(rng, alpha, lam, theta):
    out = np.empty(lam.size)
    u = rng.random(lam.size)
    for val in np.unique(lam):
        sel = lam == val
        x, cdf = _extreme_stable_table(float(alpha), float(val), float(theta))
        out[sel] = np.interp(u[sel], cdf, x)
    return out


# ------------------------------------------------------------- core draw ----

def _draw_G(spec: PowerFamilySpec, lam: np.ndarray, rng) -> np.ndarray:
    p = spec.p
    alpha = alpha_of_p(p)
    theta = canonical_theta(spec)
    lam = np.asarray(lam, dtype=float)
    if p == 0:
        return rng.normal(lam * theta, np.sqrt(lam))
    if p == 1:
        return rng.poisson(lam * spec.mu).astype(float)
    if 1 < p < 2:
        rate = lam * float(np.real(kappa_alpha(theta, alpha)))
        return _kernels.compound_poisson_gamma(rng, rate, -alpha, np.full(lam.shape, 1.0 / (-theta)))
    if p == 2:
        return rng.gamma(lam, float(spec.mu))
    if p == 3 and spec.mu != math.inf:
        mu = float(spec.mu)
        return _kernels.inverse_gaussian(rng, lam * mu, lam * lam)
    if p > 2:
        scale = positive_stable_scale(alpha, lam)
        return scale * _kernels.tilted_stable(rng, alpha, -theta * scale)
    # p < 0: alpha in (1, 2), spectrally negative
    if theta == 0:
        c = (alpha - 1) ** (1 - alpha) / alpha
        gamma = (-lam * c * math.cos(math.pi * alpha / 2)) ** (1 / alpha)
        return gamma * _kernels.cms_stable(rng, alpha, -1.0, lam.size).reshape(lam.shape)
    return _draw_extreme_tilted(rng, alpha, lam.ravel(), theta).reshape(lam.shape)


def sample_tweedie(spec: PowerFamilySpec, t: float, n: int, stream) -> np.ndarray:
    """``n`` i.i.d. draws of ``Tw_p(mu, t)``: mean mu, variance ``sigma2 mu**p / t``."""
    if not t > 0:
        raise DomainError("t must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    lam = t / spec.sigma2
    g = _draw_G(spec, np.full(int(n), lam), _rng(stream))
    return g / lam


def sample_hougaard_increments(spec: PowerFamilySpec, dt, stream) -> np.ndarray:
    """One draw of ``S_p(mu; dt_k)`` for each entry of ``dt``."""
    dt = np.asarray(dt, dtype=float)
    if np.any(dt <= 0):
        raise DomainError("time steps must be positive")
    return spec.sigma2 * _draw_G(spec, dt / spec.sigma2, _rng(stream))


def sample_positive_stable(alpha: float, n: int, stream, scale: float = 1.0) -> np.ndarray:
    """Positive stable draws with Laplace transform ``exp(-(scale s)**alpha)``."""
    if not 0 < alpha < 1:
        raise DomainError("positive stable laws need 0 < alpha < 1")
    return scale * _kernels.positive_stable(_rng(stream), alpha, n)


def sample_tilted_stable(alpha: float, tilt: float, n: int, stream, method: str = "auto") -> np.ndarray:
    """Positive stable law with density reweighted by ``exp(-tilt x)``, ``tilt >= 0``.

    Laplace transform ``exp(tilt**alpha - (tilt + s)**alpha)``. ``method`` is
    ``"auto"`` (plain rejection for ``tilt**alpha <= 1``, double rejection
    above), ``"rejection"`` or ``"double"``. Plain rejection accepts with
    probability ``exp(-tilt**alpha)`` and raises ``SamplerGuardError`` when
    that falls below ``ACCEPTANCE_FLOOR``.
    """
    if not 0 < alpha < 1:
        raise DomainError("positive stable laws need 0 < alpha < 1")
    if not (tilt >= 0 and math.isfinite(tilt)):
        raise DomainError("tilt must be finite and non-negative")
    rng = _rng(stream)
    tau = np.full(int(n), float(tilt))
    if method == "auto":
        return _kernels.tilted_stable(rng, alpha, tau)
    if method == "rejection":
        if math.exp(-tilt**alpha) < ACCEPTANCE_FLOOR:
            raise SamplerGuardError(
                f"rejection acceptance exp(-{tilt**alpha:.3g}) is below {ACCEPTANCE_FLOOR}; use method='double'"
            )
        return _kernels.tilted_stable(rng, alpha, tau, naive_limit=math.inf)
    if method == "double":
        if tilt == 0:
            return _kernels.positive_stable(rng, alpha, n)
        return _kernels.tilted_stable(rng, alpha, tau, naive_limit=-1.0)
    raise ValueError(f"unknown method {method!r}")


def sample_extreme_one_stable(sign: int, n: int, stream) -> np.ndarray:
    """Totally skewed 1-stable draws, skewness ``sign`` (+1 heavy upper tail).

    Characteristic function ``exp(-|z| (1 + i sign (2/pi) sgn(z) log|z|))``.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    return _kernels.cms_stable(_rng(stream), 1.0, float(sign), n)


def _cgf_check(spec: PowerFamilySpec, t: float, z_grid) -> float:
    """Max residual between the compound Poisson-gamma and Hougaard cumulants."""
    params = poisson_gamma_params(spec, t)
    return float(np.max(np.abs(params.cumulant(z_grid) - cumulant_transform(z_grid, spec, t))))
