"""Fractional Hougaard motion as a moving average of a two-sided Hougaard process.

``S_{p,H}(mu; t) = int w_h(t, u) dS_p(mu; u)`` with kernel exponent
``h = H - 1/alpha`` and ``w_h(t, u) = (t-u)_+^h - (-u)_+^h``.

Simulation discretizes the integral on cells: a uniform fine grid of step
``step`` on ``[-L, t_max]`` (evaluation times are nodes), then geometric
cells of ratio ``geom_ratio`` back to ``-T``. Each cell carries the kernel
value at its midpoint, except the cells just left of ``u = t`` and
``u = 0``, where the weight is rescaled to the cell's exact kernel L² mass.
Compensated increments ``dS - mu du`` are used, so the truncated sum has mean
zero exactly (the kernel integrates to zero over the full line).

Besides the Lévy range ``-1/2 < h < 0`` the Gaussian case (p = 0, mu = 0)
also accepts ``0 <= h < 1/2``, which is fractional Brownian motion with
``H = h + 1/2`` in the moving-average form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special

from .family_params import DomainError, PowerFamilySpec, alpha_of_p
from .levy_paths import PathEnsemble, TimeGrid, fill_rows
from .rng import RandomStream
from .samplers import sample_hougaard_increments
from .stats import StatReport, ks_two_sample
from .tweedie import cumulant_transform

__all__ = [
    "WeightKernel",
    "FHMConfig",
    "FHMDiscretization",
    "weight",
    "kernel_l2",
    "kernel_l2_closed_form",
    "kernel_tail_variance",
    "choose_truncation",
    "fhm_discretization",
    "simulate_fhm",
    "fhm_variance",
    "fhm_cumulant_transform",
    "discretized_cumulant",
    "fhm_ss_check",
    "fhm_rate_exponent",
]

_QUAD = dict(epsabs=1e-13, epsrel=1e-10, limit=400)


def _w_past(t, s, h):
    """``(t+s)^h - s^h`` for s > 0, computed without cancellation."""
    return s**h * np.expm1(h * np.log1p(t / s))


def weight(t, u, h):
    """Kernel ``w_h(t, u)``; zero for ``u >= t``."""
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    t, u = np.broadcast_arrays(t, u)
    out = np.zeros(t.shape)
    mid = (u >= 0) & (u < t)
    out[mid] = (t[mid] - u[mid]) ** h
    past = u < 0
    out[past] = _w_past(t[past], -u[past], h)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class WeightKernel:
    h: float
    H: float
    alpha: float

    def __call__(self, t, u):
        return weight(t, u, self.h)


def _check_l2_exponent(h):
    if not -0.5 < h < 0.5:
        raise DomainError(f"the kernel has infinite L2 norm for h={h}; need -1/2 < h < 1/2")


@lru_cache(maxsize=512)
def kernel_l2(h: float) -> float:
    """``int w_h(1, v)^2 dv`` by quadrature split at v = 0 and v = 1."""
    _check_l2_exponent(h)
    if h == 0:
        return 1.0
    inside = 1.0 / (2 * h + 1)
    f = lambda s: _w_past(1.0, s, h) ** 2
    near, _ = integrate.quad(f, 0.0, 1.0, **_QUAD)
    return inside + near + _tail_l2(h, 1.0)


def kernel_l2_closed_form(h: float) -> float:
    """``Gamma(h+1)^2 / (Gamma(2h+2) sin(pi (h + 1/2)))``."""
    _check_l2_exponent(h)
    return special.gamma(h + 1) ** 2 / (special.gamma(2 * h + 2) * math.sin(math.pi * (h + 0.5)))


def _tail_l2(h, T):
    """``int_T^inf w_h(1, -s)^2 ds`` with ``s = T e^y`` so the integrand decays exponentially."""
    def f(y):
        if y > 600.0:
            return 0.0
        s = T * math.exp(y)
        return s * float(_w_past(1.0, s, h)) ** 2

    val, _ = integrate.quad(f, 0.0, np.inf, **_QUAD)
    return val


def kernel_tail_variance(h: float, T: float) -> float:
    """Share of the kernel L2 mass lying in ``v < -T`` (for t = 1)."""
    _check_l2_exponent(h)
    if not T > 0:
        raise DomainError("T must be positive")
    if h == 0:
        return 0.0
    return _tail_l2(h, T) / kernel_l2(h)


def choose_truncation(h: float, t_max: float, eps: float) -> float:
    """Smallest window ``T`` with tail share at most ``eps`` for every t <= t_max."""
    if h == 0:
        return t_max
    g = lambda x: math.log(kernel_tail_variance(h, math.exp(x))) - math.log(eps)
    guess = (h * h / ((1 - 2 * h) * kernel_l2(h) * eps)) ** (1.0 / (1 - 2 * h))
    lo, hi = math.log(max(guess, 1e-3)) - 2.0, math.log(max(guess, 1e-3)) + 2.0
    while g(lo) < 0:
        lo -= 2.0
    while g(hi) > 0:
        hi += 2.0
    return t_max * math.exp(optimize.brentq(g, lo, hi, xtol=1e-6))


def fhm_rate_exponent(alpha) -> float:
    """Exponent ``k`` with ``S_{p,H}(mu c^k; ct) = c^H S_{p,H}(mu; t)`` in law: ``1/alpha - 1``."""
    return 1.0 / alpha - 1.0


@dataclass(frozen=True)
class FHMConfig:
    """Parameters of a fractional Hougaard motion simulation.

    ``T`` (window) and ``step`` default to automatic choices driven by
    ``eps_tail`` and ``max_deficit``.
    """

    spec: PowerFamilySpec
    H: float
    T: float | None = None
    step: float | None = None
    n_paths: int = 1000
    stream: RandomStream = field(default_factory=lambda: RandomStream(0))
    eps_tail: float = 1e-3
    max_deficit: float = 1e-2
    geom_ratio: float = 0.05

    def __post_init__(self):
        p = self.spec.p
        if p in (1, 2):
            raise DomainError("fractional Hougaard motion is not defined for p = 1 or p = 2")
        h = self.h
        gaussian = p == 0 and self.spec.mu == 0
        if h >= 0 and not (gaussian and h < 0.5):
            raise DomainError(f"need H < 1/alpha (h = {h:g} >= 0)")
        if h <= -1:
            raise DomainError(f"need H > 1/alpha - 1 for the integral to exist (h = {h:g})")
        if self.T is not None and not self.T > 0:
            raise DomainError("T must be positive")
        if self.step is not None and not self.step > 0:
            raise DomainError("step must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")
        if not 0 < self.geom_ratio <= 0.5:
            raise ValueError("geom_ratio must be in (0, 0.5]")

    @property
    def alpha(self):
        return alpha_of_p(self.spec.p)

    @property
    def h(self) -> float:
        return float(self.H - 1.0 / self.alpha)

    @property
    def kernel(self) -> WeightKernel:
        return WeightKernel(self.h, self.H, self.alpha)

    def replace(self, **kw) -> "FHMConfig":
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return FHMConfig(**d)


def _require_variance_band(cfg: FHMConfig):
    if cfg.h <= -0.5:
        raise DomainError(f"infinite variance: need H > 1/alpha - 1/2 (h = {cfg.h:g})")


@dataclass
class FHMDiscretization:
    edges: np.ndarray  # cell boundaries, increasing, last = max eval time
    eval_times: np.ndarray
    weights: np.ndarray  # n_eval x n_cells
    T: float
    step: float
    deficit: np.ndarray  # relative variance deficit per eval time
    tail_share: float

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.edges)

    def metadata(self) -> dict:
        return {"T": self.T, "step": self.step, "n_cells": int(self.lengths.size),
                "max_deficit": float(np.max(np.abs(self.deficit))), "tail_share": self.tail_share}


def _cell_mass_past(t, a, b, h):
    """Exact ``int_a^b w_h(t, u)^2 du`` for a < b <= 0.

    Beyond ``s = -u = t`` the integral runs in ``log s`` so long windows stay accurate.
    """
    lo, hi = -b, -a
    val = 0.0
    if lo < t:
        f = lambda s: _w_past(t, s, h) ** 2
        val += integrate.quad(f, lo, min(hi, t), **_QUAD)[0]
    if hi > t:
        g = lambda y: math.exp(y) * float(_w_past(t, math.exp(y), h)) ** 2
        val += integrate.quad(g, math.log(max(lo, t)), math.log(hi), **_QUAD)[0]
    return val


def _window_mass(t, T, h):
    """Exact ``int_{-T}^{t} w_h(t, u)^2 du``."""
    return t ** (2 * h + 1) / (2 * h + 1) + _cell_mass_past(t, -T, 0.0, h)


def _build_edges(eval_times, T, step, ratio):
    t_max = float(eval_times.max())
    L = step / ratio
    n_fine = int(math.ceil((t_max + L) / step))
    fine = t_max - step * np.arange(n_fine + 1)[::-1]
    nodes = np.union1d(fine, np.concatenate([eval_times, [0.0]]))
    nodes = nodes[nodes >= fine[0] - 1e-15]
    # drop nodes that would create slivers next to inserted points
    keep = np.concatenate([[True], np.diff(nodes) > 1e-9 * step])
    nodes = nodes[keep]
    start = nodes[0]
    past = []
    x = start
    while x > -T:
        x = max(x * (1 + ratio), -T) if x < 0 else x - step
        past.append(x)
    return np.concatenate([np.array(past[::-1]), nodes])


def _weights_for(edges, t, h):
    a, b = edges[:-1], edges[1:]
    mid = 0.5 * (a + b)
    w = np.where(b <= t + 1e-12, weight(t, mid, h), 0.0)
    lens = b - a
    # singular-aware cells
    k_t = int(np.argmin(np.abs(b - t)))
    if abs(b[k_t] - t) < 1e-9 * lens[k_t] + 1e-14:
        ln = lens[k_t]
        mass = ln ** (2 * h + 1) / (2 * h + 1)
        w[k_t] = math.sqrt(mass / ln)
    k_0 = int(np.argmin(np.abs(b)))
    if abs(b[k_0]) < 1e-14 and b[k_0] <= t:
        mass = _cell_mass_past(t, a[k_0], 0.0, h)
        w[k_0] = math.copysign(math.sqrt(mass / lens[k_0]), w[k_0] if w[k_0] != 0 else -h)
    return w


def fhm_discretization(cfg: FHMConfig, eval_times) -> FHMDiscretization:
    """Cell grid and weight matrix for ``eval_times``; applies both guards."""
    ev = np.unique(np.asarray(eval_times, dtype=float))
    if ev.size == 0 or np.any(ev <= 0):
        raise DomainError("evaluation times must be positive")
    h = cfg.h
    t_max = float(ev.max())
    T = cfg.T if cfg.T is not None else choose_truncation(h, t_max, cfg.eps_tail)
    if T <= t_max:
        raise DomainError("the window T must exceed the largest evaluation time")
    tail = kernel_tail_variance(h, T / t_max) if h != 0 else 0.0
    if tail > cfg.eps_tail * (1 + 1e-6):
        raise DomainError(f"tail share {tail:.3g} exceeds eps_tail={cfg.eps_tail}; increase T")
    exact = np.array([_window_mass(t, T, h) for t in ev])
    step = cfg.step if cfg.step is not None else float(ev.min()) / 16
    for _ in range(12):
        edges = _build_edges(ev, T, step, cfg.geom_ratio)
        W = np.vstack([_weights_for(edges, t, h) for t in ev])
        approx = (W**2) @ np.diff(edges)
        deficit = 1.0 - approx / exact
        if np.max(np.abs(deficit)) <= cfg.max_deficit:
            return FHMDiscretization(edges, ev, W, float(T), float(step), deficit, float(tail))
        if cfg.step is not None:
            break
        step /= 2
    raise DomainError(
        f"discretization variance deficit {np.max(np.abs(deficit)):.3g} exceeds {cfg.max_deficit} at step {step:g}"
    )


def simulate_fhm(cfg: FHMConfig, eval_times, threads: int = 1) -> PathEnsemble:
    """Riemann-sum paths of ``S_{p,H}(mu; t)`` at ``eval_times`` (plus t = 0).

    Path ``i`` uses ``cfg.stream.child(i)`` and is summed on its own, so
    neither ``threads`` nor ``n_paths`` changes its values.
    """
    _require_variance_band(cfg)
    disc = fhm_discretization(cfg, eval_times)
    lens = disc.lengths
    spec = cfg.spec
    comp = 0.0 if (spec.p == 0 and spec.mu == 0) else float(spec.mu)
    if not math.isfinite(comp):
        raise DomainError("compensation needs a finite mean")
    W = np.ascontiguousarray(disc.weights)
    drift = comp * lens

    def row(i):
        return W @ (sample_hougaard_increments(spec, lens, cfg.stream.child(i)) - drift)

    n = cfg.n_paths
    vals = np.zeros((n, disc.eval_times.size + 1))
    fill_rows(vals[:, 1:], row, threads)
    grid = TimeGrid(np.concatenate([[0.0], disc.eval_times]))
    meta = {
        "kind": "fhm",
        "spec": {"p": float(spec.p), "sigma2": float(spec.sigma2), "mu": float(spec.mu)},
        "H": float(cfg.H),
        "h": cfg.h,
        "eps_tail": cfg.eps_tail,
        "stream": cfg.stream.metadata(),
        "n_paths": n,
        **disc.metadata(),
    }
    return PathEnsemble(grid, vals, spec, meta)


def fhm_variance(t, cfg: FHMConfig):
    """``sigma2 mu^p t^(1+2h) int w_h(1,v)^2 dv`` (``mu^p`` read as 1 when p = 0)."""
    _require_variance_band(cfg)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t must be positive")
    h = cfg.h
    out = cfg.spec.variance_unit * t ** (1 + 2 * h) * kernel_l2(h)
    return out if out.ndim else float(out)


def _unit_cgf(y, spec):
    return cumulant_transform(y, spec, 1.0)


def fhm_cumulant_transform(z, t: float, cfg: FHMConfig, truncate: bool = False):
    """Log characteristic function of ``S_{p,H}(mu; t)`` by quadrature.

    Integrates ``C_1(z w) - i z mu w`` over ``u < t`` split at 0 and t;
    the subtracted term integrates to zero and only speeds convergence.
    ``truncate=True`` stops at ``-cfg.T`` like the simulation does.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    h = cfg.h
    spec = cfg.spec
    mu = 0.0 if (spec.p == 0 and spec.mu == 0) else float(spec.mu)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    lower = -(cfg.T if (truncate and cfg.T is not None) else np.inf)
    out = np.empty(zs.shape, dtype=complex)
    for k, zk in enumerate(zs):
        if zk == 0:
            out[k] = 0.0
            continue

        def g(w):
            return complex(_unit_cgf(zk * w, spec)) - 1j * zk * mu * w

        inside = lambda v, part: getattr(g(v**h), part)  # v = t - u in (0, t)
        past = lambda s, part: getattr(g(float(_w_past(t, s, h))), part)  # s = -u > 0
        acc = 0.0 + 0.0j
        for part, unit in (("real", 1.0), ("imag", 1j)):
            a, _ = integrate.quad(inside, 0.0, t, args=(part,), **_QUAD)
            b, _ = integrate.quad(past, 0.0, t, args=(part,), **_QUAD)
            c, _ = integrate.quad(past, t, -lower, args=(part,), **_QUAD)
            acc += unit * (a + b + c)
        out[k] = acc
    return out if np.ndim(z) else out[0]


def discretized_cumulant(z, t: float, disc: FHMDiscretization, spec: PowerFamilySpec):
    """Exact log characteristic function of the simulated Riemann sum at ``t``."""
    row = disc.weights[int(np.argmin(np.abs(disc.eval_times - t)))]
    lens = disc.lengths
    mu = 0.0 if (spec.p == 0 and spec.mu == 0) else float(spec.mu)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.array([np.sum(lens * (cumulant_transform(zk * row, spec, 1.0) - 1j * zk * mu * row)) for zk in zs])
    return out if np.ndim(z) else out[0]


def fhm_ss_check(cfg: FHMConfig, c: float, t: float, n: int = 0, z_grid=None,
                 rate_exponent=None, tol: float = 1e-4) -> StatReport:
    """Compare ``c^-H S_{p,H}(mu c^k; ct)`` with ``S_{p,H}(mu; t)``.

    ``k`` defaults to ``H - 1``; pass ``fhm_rate_exponent(alpha)`` for the
    map under which the moving average is self-similar. The statistic is the
    largest cumulant-transform gap on ``z_grid``; with ``n > 0`` a
    Monte Carlo KS comparison is added to the metadata.
    """
    if not (c > 0 and t > 0):
        raise DomainError("c and t must be positive")
    k = cfg.H - 1 if rate_exponent is None else rate_exponent
    spec = cfg.spec
    scaled = cfg.replace(spec=spec.with_mu(spec.mu * c**k))
    if z_grid is None:
        z_grid = np.linspace(-2.0, 2.0, 9)
    z = np.asarray(z_grid, dtype=float)
    lhs = fhm_cumulant_transform(c ** (-cfg.H) * z, c * t, scaled)
    rhs = fhm_cumulant_transform(z, t, cfg)
    resid = float(np.max(np.abs(lhs - rhs)))
    meta = {"rate_exponent": k}
    if n > 0:
        a = c ** (-cfg.H) * simulate_fhm(scaled.replace(n_paths=n, stream=cfg.stream.child(0)), [c * t]).at(c * t)
        b = simulate_fhm(cfg.replace(n_paths=n, stream=cfg.stream.child(1)), [t]).at(t)
        ks = ks_two_sample(a, b)
        meta.update({"ks_statistic": ks.statistic, "ks_critical": ks.critical_value, "ks_verdict": ks.verdict,
                     "var_ratio": float(np.var(a, ddof=1) / np.var(b, ddof=1))})
    return StatReport(
        label=f"fhm-ss p={spec.p} H={cfg.H} c={c}",
        statistic=resid,
        critical_value=tol,
        estimate={"z": z, "lhs": [complex(v) for v in lhs], "rhs": [complex(v) for v in rhs]},
        parameters={"p": float(spec.p), "H": float(cfg.H), "mu": float(spec.mu), "c": c, "t": t},
        metadata=meta,
    )
