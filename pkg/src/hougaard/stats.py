"""Estimators and tests with standard errors, and the StatReport record.

Acceptance tolerances live in one place, :data:`TOLERANCES`.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy import stats as _sps

__all__ = [
    "SCHEMA_VERSION",
    "Tolerances",
    "TOLERANCES",
    "StatReport",
    "Moments",
    "ECFResult",
    "empirical_moments",
    "ecf",
    "ecf_test",
    "ks_critical_value",
    "ks_two_sample",
    "ks_one_sample",
    "loglog_slope",
    "increment_corr_estimate",
    "moment_test",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Tolerances:
    """Acceptance bands: moments in SE units, ECF and correlation in SE units, KS level."""

    moment_se: float = 4.0
    ecf_se: float = 3.0
    corr_se: float = 3.0
    ks_level: float = 0.01


TOLERANCES = Tolerances()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    return str(x)


@dataclass
class StatReport:
    """Result of one check. ``verdict`` is ``statistic <= critical_value``.

    JSON fields: schema_version, label, parameters, estimate, std_error,
    statistic, critical_value, verdict, metadata.
    """

    label: str
    statistic: float
    critical_value: float
    estimate: Any = None
    std_error: Any = None
    parameters: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        s, c = float(self.statistic), float(self.critical_value)
        return bool(math.isfinite(s) and s <= c)

    passed = verdict

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        d["schema_version"] = SCHEMA_VERSION
        return _jsonable(d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "StatReport":
        keys = ("label", "statistic", "critical_value", "estimate", "std_error", "parameters", "metadata")
        kw = {k: d[k] for k in keys if k in d}
        kw["statistic"] = float(kw["statistic"])
        kw["critical_value"] = float(kw["critical_value"])
        return cls(**kw)

    def line(self) -> str:
        tag = "PASS" if self.verdict else "FAIL"
        return f"{tag} {self.label}: statistic={float(self.statistic):.4g} critical={float(self.critical_value):.4g}"


@dataclass(frozen=True)
class Moments:
    n: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float


def empirical_moments(sample) -> Moments:
    """Mean, unbiased variance and their standard errors.

    The variance SE uses the fourth central moment: ``sqrt((m4 - s^4)/n)``.
    """
    x = np.asarray(sample, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    # shift by the first value so a constant sample has exactly zero spread
    d = x - x[0]
    mean = float(x[0] + d.mean())
    d = d - d.mean()
    var = float(d @ d / (n - 1))
    m4 = float(np.mean(d**4))
    return Moments(n, mean, var, math.sqrt(var / n), math.sqrt(max(m4 - var * var, 0.0) / n))


def moment_test(sample, mean, variance, label="moments", tol: Tolerances = TOLERANCES, **meta) -> StatReport:
    """Largest SE-standardized gap between sample and target mean/variance."""
    m = empirical_moments(sample)
    zm = abs(m.mean - mean) / m.se_mean if m.se_mean > 0 else (0.0 if m.mean == mean else math.inf)
    zv = abs(m.variance - variance) / m.se_variance if m.se_variance > 0 else (0.0 if m.variance == variance else math.inf)
    return StatReport(
        label=label,
        statistic=max(zm, zv),
        critical_value=tol.moment_se,
        estimate={"mean": m.mean, "variance": m.variance},
        std_error={"mean": m.se_mean, "variance": m.se_variance},
        parameters={"target_mean": mean, "target_variance": variance},
        metadata={"n": m.n, **meta},
    )


@dataclass(frozen=True)
class ECFResult:
    z: np.ndarray
    values: np.ndarray
    se: np.ndarray


def ecf(sample, z_grid) -> ECFResult:
    """Empirical characteristic function with SE ``sqrt((1 - |phi|^2)/n)``."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    z = np.atleast_1d(np.asarray(z_grid, dtype=float))
    vals = np.array([np.mean(np.exp(1j * zk * x)) for zk in z])
    vals[z == 0] = 1.0
    se = np.sqrt(np.clip(1.0 - np.abs(vals) ** 2, 0.0, None) / x.size)
    return ECFResult(z, vals, se)


def ecf_test(sample, z_grid, target_cf, label="ecf", tol: Tolerances = TOLERANCES, **meta) -> StatReport:
    """Max over z of ``|phi_hat - phi| / SE``; SE is computed from the target law."""
    res = ecf(sample, z_grid)
    target = np.atleast_1d(np.asarray(target_cf, dtype=complex))
    n = np.asarray(sample).size
    se = np.sqrt(np.clip(1.0 - np.abs(target) ** 2, 0.0, None) / n)
    dev = np.abs(res.values - target)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(se > 0, dev / se, np.where(dev == 0, 0.0, np.inf))
    return StatReport(
        label=label,
        statistic=float(ratio.max()),
        critical_value=tol.ecf_se,
        estimate={"z": res.z, "ecf": [complex(v) for v in res.values]},
        std_error=se,
        parameters={"target": [complex(v) for v in target]},
        metadata={"n": n, "ratios": ratio, **meta},
    )


def ks_critical_value(n: int, m: int, level: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value ``c(level) sqrt((n+m)/(nm))``."""
    c = math.sqrt(-0.5 * math.log(level / 2.0))
    return c * math.sqrt((n + m) / (n * m))


def ks_two_sample(a, b, label="ks", level: float | None = None, tol: Tolerances = TOLERANCES, **meta) -> StatReport:
    """Two-sample Kolmogorov-Smirnov distance with its asymptotic critical value."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    level = tol.ks_level if level is None else level
    stat = float(_sps.ks_2samp(a, b, method="asymp").statistic)
    return StatReport(
        label=label,
        statistic=stat,
        critical_value=ks_critical_value(a.size, b.size, level),
        parameters={"level": level},
        metadata={"n_a": a.size, "n_b": b.size, **meta},
    )


def ks_one_sample(sample, cdf, label="ks", level: float | None = None, tol: Tolerances = TOLERANCES, **meta) -> StatReport:
    """One-sample Kolmogorov-Smirnov distance to an exact ``cdf``."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    level = tol.ks_level if level is None else level
    stat = float(_sps.kstest(x, cdf, method="asymp").statistic)
    return StatReport(
        label=label,
        statistic=stat,
        critical_value=math.sqrt(-0.5 * math.log(level / 2.0) / x.size),
        parameters={"level": level},
        metadata={"n": x.size, **meta},
    )


def loglog_slope(t_grid, estimates, std_errors=None) -> tuple[float, float]:
    """Weighted least-squares slope of ``log V`` on ``log t`` and its SE.

    The log-scale SE of each point is ``se/V``; without SEs all points get
    unit weight and the SE comes from the residuals.
    """
    t = np.asarray(t_grid, dtype=float)
    v = np.asarray(estimates, dtype=float)
    if t.size < 3:
        raise ValueError("need at least three grid points")
    if np.any(v <= 0) or np.any(t <= 0):
        raise ValueError("estimates and times must be positive")
    x = np.log(t)
    y = np.log(v)
    X = np.column_stack([np.ones_like(x), x])
    if std_errors is None:
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        resid = y - X @ coef
        s2 = float(resid @ resid) / (t.size - 2)
        cov = s2 * np.linalg.inv(X.T @ X)
        return float(coef[1]), float(math.sqrt(max(cov[1, 1], 0.0)))
    sig = np.asarray(std_errors, dtype=float) / v
    w = 1.0 / sig**2
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    coef = cov @ (XtW @ y)
    return float(coef[1]), float(math.sqrt(cov[1, 1]))


def increment_corr_estimate(ensemble, s: float, t: float, expected: float = 0.0,
                            label="increment-corr", tol: Tolerances = TOLERANCES) -> StatReport:
    """Correlation of ``X(s)`` with ``X(s+t) - X(s)`` across paths.

    The SE is the Fisher-z one, ``(1 - rho^2)/sqrt(n - 3)``; the statistic is
    the Fisher-z distance to ``expected`` in SE units.
    """
    a = ensemble.at(s)
    b = ensemble.at(s + t) - a
    n = a.size
    if n < 4:
        raise ValueError("need at least four paths")
    rho = float(np.corrcoef(a, b)[0, 1])
    zse = 1.0 / math.sqrt(n - 3)
    stat = abs(math.atanh(np.clip(rho, -0.999999, 0.999999)) - math.atanh(expected)) / zse
    return StatReport(
        label=label,
        statistic=stat,
        critical_value=tol.corr_se,
        estimate=rho,
        std_error=(1.0 - rho * rho) * zse,
        parameters={"s": s, "t": t, "expected": expected},
        metadata={"n": n, **getattr(ensemble, "metadata", {})},
    )
