"""Random-variate kernels with a numba backend and a pure-numpy fallback.

The backend is chosen once at import from the ``HOUGAARD_NUMBA`` environment
variable (``0``/``false``/``off`` disables numba) and can be switched at run
time with :func:`set_backend`. Both backends draw from the same distribution
but consume the generator differently, so their variates are not identical.

Stable-law convention used throughout: ``positive_stable(alpha)`` has Laplace
transform ``exp(-s**alpha)``; ``tilted_stable(alpha, tau)`` is that law
reweighted by ``exp(-tau x)``.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

__all__ = [
    "HAVE_NUMBA",
    "backend",
    "set_backend",
    "inverse_gaussian",
    "positive_stable",
    "tilted_stable",
    "cms_stable",
    "compound_poisson_gamma",
    "NAIVE_TILT_LIMIT",
]

# Naive rejection is used while tau**alpha <= NAIVE_TILT_LIMIT (acceptance >= e^-1).
NAIVE_TILT_LIMIT = 1.0


def _env_wants_numba() -> bool:
    return os.environ.get("HOUGAARD_NUMBA", "1").strip().lower() not in {"0", "false", "no", "off"}


_use_numba = HAVE_NUMBA and _env_wants_numba()


def backend() -> str:
    return "numba" if _use_numba else "numpy"


def set_backend(name: str) -> None:
    global _use_numba
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _use_numba = name == "numba"


if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
else:  # pragma: no cover
    def _jit(f):
        return f


# ---------------------------------------------------------------- numba ----

@_jit
def _sinc(x):
    if abs(x) < 1e-4:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


@_jit
def _ig_nb(rng, mean, shape):
    n = mean.size
    out = np.empty(n)
    for i in range(n):
        m = mean[i]
        lam = shape[i]
        nu = rng.standard_normal()
        r = m * nu * nu / lam
        x = m / (1.0 + 0.5 * r + math.sqrt(r + 0.25 * r * r))
        if rng.random() <= m / (m + x):
            out[i] = x
        else:
            out[i] = m * m / x
    return out


@_jit
def _kanter_one(rng, alpha):
    u = 0.0
    while u == 0.0:
        u = math.pi * rng.random()
    e = rng.standard_exponential()
    logz = (math.log(math.sin(alpha * u)) - math.log(math.sin(u)) / alpha
            + (1.0 - alpha) / alpha * (math.log(math.sin((1.0 - alpha) * u)) - math.log(e)))
    return math.exp(logz)


@_jit
def _pstable_nb(rng, alpha, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = _kanter_one(rng, alpha)
    return out


@_jit
def _tilted_dr_one(rng, alpha, lam):
    b = (1.0 - alpha) / alpha
    lam_a = lam ** alpha
    gam = lam_a * alpha * (1.0 - alpha)
    sg = math.sqrt(gam)
    c1 = math.sqrt(math.pi / 2.0)
    c3 = (2.0 + c1) * sg
    xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
    psi = c3 * math.exp(-gam * math.pi * math.pi / 8.0) / math.sqrt(math.pi)
    w1 = c1 * xi / sg
    w2 = 2.0 * math.sqrt(math.pi) * psi
    w3 = xi * math.pi
    while True:
        # auxiliary angle U and the uniform Z reused for the outer test
        while True:
            v = rng.random()
            if gam >= 1.0:
                if v < w1 / (w1 + w2):
                    u = abs(rng.standard_normal()) / sg
                else:
                    w = rng.random()
                    u = math.pi * (1.0 - w * w)
            else:
                w = rng.random()
                if v < w3 / (w2 + w3):
                    u = math.pi * w
                else:
                    u = math.pi * (1.0 - w * w)
            if u >= math.pi:
                continue
            zeta = math.sqrt(_sinc(u) / (_sinc(alpha * u) ** alpha * _sinc((1.0 - alpha) * u) ** (1.0 - alpha)))
            zz = 1.0 / (1.0 - (1.0 + alpha * zeta / sg) ** (-1.0 / alpha))
            d = 0.0
            if gam >= 1.0:
                d += xi * math.exp(-gam * u * u / 2.0)
            if u > 0.0:
                d += psi / math.sqrt(math.pi - u)
            if gam < 1.0:
                d += xi
            rho = (math.pi * math.exp(-lam_a * (1.0 - 1.0 / (zeta * zeta)))
                   / ((1.0 + c1) * sg / zeta + zz) * d)
            Z = rng.random() * rho
            if Z <= 1.0:
                break
        a = ((1.0 - alpha) * _sinc((1.0 - alpha) * u)) ** (1.0 - alpha) * (alpha * _sinc(alpha * u)) ** alpha / _sinc(u)
        a = a ** (1.0 / (1.0 - alpha))
        m = (b / a) ** alpha * lam_a
        delta = math.sqrt(m * alpha / a)
        a1 = delta * c1
        a3 = zz / a
        s = a1 + delta + a3
        v2 = rng.random()
        nrm = 0.0
        ex = 0.0
        if v2 < a1 / s:
            nrm = rng.standard_normal()
            x = m - delta * abs(nrm)
        elif v2 < (a1 + delta) / s:
            x = m + delta * rng.random()
        else:
            ex = rng.standard_exponential()
            x = m + delta + ex * a3
        if x > 0.0 and Z > 0.0:
            c = a * (x - m) + lam * m ** (-b) * ((m / x) ** b - 1.0)
            if x < m:
                c -= nrm * nrm / 2.0
            elif x > m + delta:
                c -= ex
            if c <= -math.log(Z):
                return x ** (-b)


@_jit
def _tilted_nb(rng, alpha, tau, naive_limit):
    n = tau.size
    out = np.empty(n)
    for i in range(n):
        t = tau[i]
        if t == 0.0:
            out[i] = _kanter_one(rng, alpha)
        elif t ** alpha <= naive_limit:
            while True:
                x = _kanter_one(rng, alpha)
                if rng.random() <= math.exp(-t * x):
                    out[i] = x
                    break
        else:
            out[i] = _tilted_dr_one(rng, alpha, t)
    return out


@_jit
def _cms_nb(rng, alpha, beta, n):
    out = np.empty(n)
    half_pi = 0.5 * math.pi
    if alpha == 1.0:
        for i in range(n):
            v = math.pi * (rng.random() - 0.5)
            w = rng.standard_exponential()
            hb = half_pi + beta * v
            out[i] = (hb * math.tan(v) - beta * math.log(half_pi * w * math.cos(v) / hb)) / half_pi
        return out
    zeta = -beta * math.tan(half_pi * alpha)
    xi0 = math.atan(-zeta) / alpha
    fac = (1.0 + zeta * zeta) ** (0.5 / alpha)
    for i in range(n):
        v = math.pi * (rng.random() - 0.5)
        w = rng.standard_exponential()
        av = alpha * (v + xi0)
        out[i] = (fac * math.sin(av) / math.cos(v) ** (1.0 / alpha)
                  * (math.cos(v - av) / w) ** ((1.0 - alpha) / alpha))
    return out


@_jit
def _cpg_nb(rng, rate, shape, scale):
    n = rate.size
    out = np.empty(n)
    for i in range(n):
        k = rng.poisson(rate[i])
        if k == 0:
            out[i] = 0.0
        else:
            out[i] = rng.gamma(shape * k, scale[i])
    return out


# ---------------------------------------------------------------- numpy ----

def _sinc_np(x):
    return np.sinc(x / np.pi)


def _ig_np(rng, mean, shape):
    nu = rng.standard_normal(mean.size)
    r = mean * nu * nu / shape
    x = mean / (1.0 + 0.5 * r + np.sqrt(r + 0.25 * r * r))
    u = rng.random(mean.size)
    return np.where(u <= mean / (mean + x), x, mean * mean / x)


def _kanter_np(rng, alpha, n):
    u = math.pi * (1.0 - rng.random(n))  # in (0, pi]
    u = np.minimum(u, math.pi * (1 - 1e-16))
    e = rng.standard_exponential(n)
    logz = (np.log(np.sin(alpha * u)) - np.log(np.sin(u)) / alpha
            + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * u)) - np.log(e)))
    return np.exp(logz)


def _tilted_naive_np(rng, alpha, tau):
    out = np.empty(tau.size)
    todo = np.arange(tau.size)
    while todo.size:
        x = _kanter_np(rng, alpha, todo.size)
        ok = rng.random(todo.size) <= np.exp(-tau[todo] * x)
        out[todo[ok]] = x[ok]
        todo = todo[~ok]
    return out


@np.errstate(over="ignore", divide="ignore", invalid="ignore")
def _tilted_dr_np(rng, alpha, lam_all):
    out = np.empty(lam_all.size)
    todo = np.arange(lam_all.size)
    b = (1.0 - alpha) / alpha
    c1 = math.sqrt(math.pi / 2.0)
    while todo.size:
        lam = lam_all[todo]
        k = lam.size
        lam_a = lam ** alpha
        gam = lam_a * alpha * (1.0 - alpha)
        sg = np.sqrt(gam)
        c3 = (2.0 + c1) * sg
        xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
        psi = c3 * np.exp(-gam * math.pi ** 2 / 8.0) / math.sqrt(math.pi)
        w1 = c1 * xi / sg
        w2 = 2.0 * math.sqrt(math.pi) * psi
        w3 = xi * math.pi
        big = gam >= 1.0
        u = np.empty(k)
        Z = np.empty(k)
        zz = np.empty(k)
        pend = np.arange(k)
        while pend.size:
            g = big[pend]
            v = rng.random(pend.size)
            nr = np.abs(rng.standard_normal(pend.size))
            w = rng.random(pend.size)
            uu = np.where(
                g,
                np.where(v < w1[pend] / (w1[pend] + w2[pend]), nr / sg[pend], math.pi * (1 - w * w)),
                np.where(v < w3[pend] / (w2[pend] + w3[pend]), math.pi * w, math.pi * (1 - w * w)),
            )
            inside = uu < math.pi
            uc = np.where(inside, uu, 0.0)
            zeta = np.sqrt(_sinc_np(uc) / (_sinc_np(alpha * uc) ** alpha * _sinc_np((1 - alpha) * uc) ** (1 - alpha)))
            z_ = 1.0 / (1.0 - (1.0 + alpha * zeta / sg[pend]) ** (-1.0 / alpha))
            d = (np.where(g, xi[pend] * np.exp(-gam[pend] * uc * uc / 2.0), 0.0)
                 + np.where(uc > 0, psi[pend] / np.sqrt(math.pi - uc), 0.0)
                 + np.where(g, 0.0, xi[pend]))
            rho = (math.pi * np.exp(-lam_a[pend] * (1.0 - 1.0 / zeta ** 2))
                   / ((1.0 + c1) * sg[pend] / zeta + z_) * d)
            zs = rng.random(pend.size) * rho
            ok = inside & (zs <= 1.0)
            idx = pend[ok]
            u[idx], Z[idx], zz[idx] = uc[ok], zs[ok], z_[ok]
            pend = pend[~ok]
        a = ((1 - alpha) * _sinc_np((1 - alpha) * u)) ** (1 - alpha) * (alpha * _sinc_np(alpha * u)) ** alpha / _sinc_np(u)
        a = a ** (1.0 / (1.0 - alpha))
        m = (b / a) ** alpha * lam_a
        delta = np.sqrt(m * alpha / a)
        a1 = delta * c1
        a3 = zz / a
        s = a1 + delta + a3
        v2 = rng.random(k)
        nrm = rng.standard_normal(k)
        ur = rng.random(k)
        ex = rng.standard_exponential(k)
        left = v2 < a1 / s
        mid = ~left & (v2 < (a1 + delta) / s)
        right = ~left & ~mid
        x = np.where(left, m - delta * np.abs(nrm), np.where(mid, m + delta * ur, m + delta + ex * a3))
        xp = np.where(x > 0, x, 1.0)
        c = a * (xp - m) + lam * m ** (-b) * ((m / xp) ** b - 1.0)
        c = c - np.where(left & (x < m), nrm * nrm / 2.0, 0.0) - np.where(right & (x > m + delta), ex, 0.0)
        ok = (x > 0) & (Z > 0) & (c <= -np.log(Z))
        out[todo[ok]] = x[ok] ** (-b)
        todo = todo[~ok]
    return out


def _tilted_np(rng, alpha, tau, naive_limit):
    out = np.empty(tau.size)
    zero = tau == 0.0
    naive = ~zero & (tau ** alpha <= naive_limit)
    dr = ~zero & ~naive
    if zero.any():
        out[zero] = _kanter_np(rng, alpha, int(zero.sum()))
    if naive.any():
        out[naive] = _tilted_naive_np(rng, alpha, tau[naive])
    if dr.any():
        out[dr] = _tilted_dr_np(rng, alpha, tau[dr])
    return out


def _cms_np(rng, alpha, beta, n):
    v = math.pi * (rng.random(n) - 0.5)
    w = rng.standard_exponential(n)
    if alpha == 1.0:
        hb = 0.5 * math.pi + beta * v
        return (hb * np.tan(v) - beta * np.log(0.5 * math.pi * w * np.cos(v) / hb)) / (0.5 * math.pi)
    zeta = -beta * math.tan(0.5 * math.pi * alpha)
    xi0 = math.atan(-zeta) / alpha
    av = alpha * (v + xi0)
    return ((1 + zeta * zeta) ** (0.5 / alpha) * np.sin(av) / np.cos(v) ** (1 / alpha)
            * (np.cos(v - av) / w) ** ((1 - alpha) / alpha))


def _cpg_np(rng, rate, shape, scale):
    k = rng.poisson(rate)
    g = rng.gamma(np.where(k > 0, shape * k, 1.0), scale)
    return np.where(k > 0, g, 0.0)


# ------------------------------------------------------------- dispatch ----

def _f64(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64).ravel())


def inverse_gaussian(rng, mean, shape):
    """Inverse Gaussian draws (Michael-Schucany-Haas), elementwise parameters."""
    mean, shape = np.broadcast_arrays(np.asarray(mean, float), np.asarray(shape, float))
    out_shape = mean.shape
    m, s = _f64(mean), _f64(shape)
    out = _ig_nb(rng, m, s) if _use_numba else _ig_np(rng, m, s)
    return out.reshape(out_shape)


def positive_stable(rng, alpha: float, n: int):
    """Positive alpha-stable draws with Laplace transform exp(-s**alpha), 0<alpha<1."""
    return _pstable_nb(rng, float(alpha), int(n)) if _use_numba else _kanter_np(rng, float(alpha), int(n))


def tilted_stable(rng, alpha: float, tau, naive_limit: float = NAIVE_TILT_LIMIT):
    """Positive stable law tilted by exp(-tau x), one draw per entry of ``tau``."""
    tau = np.asarray(tau, float)
    t = _f64(tau)
    if _use_numba:
        out = _tilted_nb(rng, float(alpha), t, float(naive_limit))
    else:
        out = _tilted_np(rng, float(alpha), t, float(naive_limit))
    return out.reshape(tau.shape)


def cms_stable(rng, alpha: float, beta: float, n: int):
    """Standard stable draws (scale 1, location 0).

    Characteristic function ``exp(-|z|^a (1 - i b sign(z) tan(pi a/2)))`` for
    a != 1 and ``exp(-|z| (1 + i b (2/pi) sign(z) log|z|))`` for a = 1.
    """
    if _use_numba:
        return _cms_nb(rng, float(alpha), float(beta), int(n))
    return _cms_np(rng, float(alpha), float(beta), int(n))


def compound_poisson_gamma(rng, rate, shape: float, scale):
    """Sum of Poisson(rate) i.i.d. Gamma(shape, scale) variables."""
    rate, scale = np.broadcast_arrays(np.asarray(rate, float), np.asarray(scale, float))
    out_shape = rate.shape
    r, s = _f64(rate), _f64(scale)
    out = _cpg_nb(rng, r, float(shape), s) if _use_numba else _cpg_np(rng, r, float(shape), s)
    return out.reshape(out_shape)
