"""Independent high-precision reference values for the test suite.

Uses only mpmath and the defining formulas, never the package itself.
Run ``python tools/derive_oracles.py`` and paste the output into
``tests/oracles.py``.
"""
import mpmath as mp

mp.mp.dps = 30


def logquad(f, lo, hi):
    """``int_lo^hi f(s) ds`` for 0 <= lo < hi <= inf, integrated in ``y = log s``."""
    a = -mp.inf if lo == 0 else mp.log(lo)
    b = mp.inf if hi == mp.inf else mp.log(hi)
    pts = [a] + [y for y in (-20, -5, 0, 5, 20) if a < y < b] + [b]
    return mp.quad(lambda y: f(mp.exp(y)) * mp.exp(y), pts)


def kappa(x, a):
    """Unit cumulant generator for stable index a (a != 0, 1, -inf)."""
    return (a - 1) / a * mp.power(x / (a - 1), a)


def unit_cgf(y, p, mu):
    a = 1 + mp.mpf(1) / (1 - p)
    th = (a - 1) * mp.power(mu, 1 / (a - 1))
    return kappa(th + 1j * y, a) - kappa(th, a)


def w_inside(v, h):
    return mp.power(v, h)


def w_past(t, s, h):
    return mp.power(t + s, h) - mp.power(s, h)


def kernel_l2(h):
    inside = 1 / (2 * h + 1)
    past = logquad(lambda s: w_past(1, s, h) ** 2, 0, mp.inf)
    return inside + past


def tail(h, T):
    return logquad(lambda s: w_past(1, s, h) ** 2, T, mp.inf)


def fhm_cgf(z, t, p, H, mu):
    a = 1 + mp.mpf(1) / (1 - p)
    h = H - 1 / a

    def g(w):
        return unit_cgf(z * w, p, mu) - 1j * z * mu * w

    inside = logquad(lambda v: g(mp.power(v, h)), 0, t)
    past = logquad(lambda s: g(w_past(t, s, h)), 0, mp.inf)
    return inside + past


def expvar_kappa_ode(theta, b, sigma2):
    """kappa(theta) from mu' = sigma2 exp(b mu), mu(0) = 0, kappa(0) = 0.

    Negative theta is reached by integrating the reflected system forward.
    """
    sgn = 1 if theta >= 0 else -1
    f = mp.odefun(lambda s, y: [sgn * sigma2 * mp.exp(b * y[0]), sgn * y[0]], 0, [0, 0])
    return f(abs(theta))[1]


def show(name, v):
    if isinstance(v, mp.mpc):
        print(f"{name} = complex({mp.nstr(v.real, 17)}, {mp.nstr(v.imag, 17)})")
    else:
        print(f"{name} = {mp.nstr(v, 17)}")


if __name__ == "__main__":
    # kappa at alpha = 1/2 by integrating the mean map from 0 (kappa(0-) = 0)
    show("KAPPA_HALF_AT_MINUS1", -mp.quad(lambda x: mp.power(-2 * x, -0.5), [-1, 0]))
    # canonical parameter for mu = 4, alpha = 1/2 by root finding on the mean map
    show("THETA_MU4_ALPHA_HALF", mp.findroot(lambda th: mp.power(th / (-0.5), -0.5) - 4, (-1, -0.01), solver="anderson"))
    for h in (-0.4, -0.25, -0.1, 0.2, 0.35):
        show(f"KERNEL_L2[{h}]", kernel_l2(mp.mpf(h)))
    h = mp.mpf(-0.25)
    show("TAIL_SHARE_HM025_T1E3", tail(h, 1000) / kernel_l2(h))
    show("TAIL_ASYMPTOTE_HM025_T1E3", h**2 * mp.power(1000, 2 * h - 1) / (1 - 2 * h) / kernel_l2(h))
    # Levy(0, 1/2) median: Laplace transform exp(-sqrt(s))
    show("LEVY_HALF_MEDIAN", mp.mpf(0.5) / (2 * mp.erfinv(mp.mpf(0.5)) ** 2))
    for z in (0.25, 0.5, 1.0):
        show(f"FHM_CGF_P15_HM12[{z}]", fhm_cgf(mp.mpf(z), 1, mp.mpf(1.5), mp.mpf(-1.2), 1))
    for z in (0.5, 1.0):
        show(f"FHM_CGF_P3_H18[{z}]", fhm_cgf(mp.mpf(z), 1, 3, mp.mpf(1.8), 1))
    show("EXPVAR_KAPPA_B1_S1_TH03", expvar_kappa_ode(mp.mpf(0.3), 1, 1))
    show("EXPVAR_KAPPA_BM2_S05_THM07", expvar_kappa_ode(mp.mpf(-0.7), -2, mp.mpf(0.5)))
