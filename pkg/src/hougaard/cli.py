"""Command-line entry point: ``hougaard <command> ...``.

Exit codes: 0 success or all checks pass, 1 statistical failure, 2 usage or
domain error. Parameter values come from built-in defaults, then the
``--config`` JSON file, then explicit flags (flags win). The master seed
defaults to ``$HOUGAARD_SEED`` and then to the verification seed. Every
output embeds the resolved run configuration and the library version, and
nothing time-dependent, so identical invocations give identical bytes.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from ._version import __version__
from .covariance import VarianceFunction, cov, increment_correlation
from .family_params import (
    INF_POWER,
    DomainError,
    PowerFamilySpec,
    alpha_of_p,
    correlation_sign_map,
    hurst_domain,
    hurst_of_p,
    mu_domain,
)
from .fhm import FHMConfig, fhm_cumulant_transform, fhm_discretization, fhm_variance, simulate_fhm
from .io import format_csv, write_ensemble_binary, write_ensemble_csv
from .lamperti import (
    DriftBrownianFamily,
    HougaardFamily,
    LampertiFamily,
    RandomWalkFamily,
    convergence_diagnostic,
    inverse_lamperti_marginal,
    lamperti_marginal_sample,
    rg_apply,
)
from .levy_paths import TimeGrid, extend_two_sided, simulate_hougaard
from .rng import RandomStream
from .samplers import sample_tweedie
from .stats import StatReport, _jsonable, ks_two_sample
from .tweedie import cumulant_transform
from .verify import ACCEPTANCE, DEFAULT_SEED, SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# Parameter flags share one namespace with the config file.
PARAM_DEFAULTS = {
    "p": None,
    "H": None,
    "mu": 1.0,
    "sigma2": 1.0,
    "b": None,
    "t": 1.0,
    "n": None,
    "c": None,
    "T": None,
    "step": None,
    "eps": 1e-3,
    "D": None,
    "grid": None,
    "z": "-2:2:9",
    "family": "hougaard",
    "threshold": None,
    "two_sided": False,
}


class UsageError(Exception):
    pass


def parse_power(text):
    """``--p`` value: an exact fraction such as ``3/2`` or ``1.5``, or ``inf``."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(str(text))
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "+inf"):
        return INF_POWER
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse p={text!r}; use e.g. 3, 1.5 or 3/2") from exc


def parse_grid(text) -> np.ndarray:
    """``a:b`` (integers a..b), ``a:b:n`` (n points from a to b) or ``x,y,...``."""
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    s = str(text).strip()
    try:
        if ":" in s:
            parts = s.split(":")
            if len(parts) == 2:
                a, b = (float(x) for x in parts)
                if a != int(a) or b != int(b) or b < a:
                    raise ValueError
                return np.arange(int(a), int(b) + 1, dtype=float)
            if len(parts) == 3:
                a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
                if k < 1:
                    raise ValueError
                return np.linspace(a, b, k)
            raise ValueError
        return np.asarray([float(x) for x in s.split(",") if x.strip()], dtype=float)
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}; use a:b, a:b:n or a comma list") from exc


def _num(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if x is INF_POWER:
        return "inf"
    return x


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    explicit: frozenset = frozenset()

    def metadata(self) -> dict:
        d = asdict(self)
        d.pop("explicit")
        d["params"] = {k: _num(v) for k, v in self.params.items() if v is not None}
        return {"run_config": d, "version": __version__}

    def stream(self, k: int = 0) -> RandomStream:
        return RandomStream(self.seed, k)

    def need(self, *names):
        missing = [f"--{n.replace('_', '-')}" for n in names if self.params.get(n) is None]
        if missing:
            raise UsageError(f"{self.command} needs {', '.join(missing)}")
        return [self.params[n] for n in names]

    def spec(self) -> PowerFamilySpec:
        (p,) = self.need("p")
        mu = self.params["mu"]
        return PowerFamilySpec(p, float(self.params["sigma2"]), float(mu))


def _default_seed() -> int:
    env = os.environ.get("HOUGAARD_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"HOUGAARD_SEED={env!r} is not an integer") from exc


def _resolve(args, command: str) -> RunConfig:
    params = dict(PARAM_DEFAULTS)
    cfg_file = {}
    if args.config:
        try:
            with open(args.config) as f:
                cfg_file = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg_file, dict):
            raise UsageError("the config file must hold a JSON object")
        known = {k for k in PARAM_DEFAULTS if hasattr(args, k)}
        unknown = set(cfg_file) - known - {"seed", "out", "format", "threads"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        params.update({k: v for k, v in cfg_file.items() if k in PARAM_DEFAULTS})
    explicit = {k for k in cfg_file if k in PARAM_DEFAULTS}
    for k in PARAM_DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            params[k] = v
            explicit.add(k)
    params = {k: v for k, v in params.items() if hasattr(args, k)}
    if params.get("p") is not None:
        params["p"] = parse_power(params["p"])
    for k in ("H", "mu", "sigma2", "b", "t", "T", "step", "eps", "D", "threshold"):
        if params.get(k) is not None:
            params[k] = float(params[k]) if str(params[k]).lower() != "inf" else math.inf
    if params.get("n") is not None:
        params["n"] = int(params["n"])
        if params["n"] < 1:
            raise UsageError("--n must be positive")
    seed = args.seed if args.seed is not None else cfg_file.get("seed", _default_seed())
    out = args.out if args.out is not None else cfg_file.get("out")
    fmt = args.format if args.format is not None else cfg_file.get("format", "csv")
    threads = args.threads if args.threads is not None else cfg_file.get("threads", 1)
    if int(threads) < 1:
        raise UsageError("--threads must be positive")
    return RunConfig(command, params, int(seed), out, fmt, int(threads), frozenset(explicit))


# output helpers

def _emit_text(rc: RunConfig, text: str):
    if rc.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(rc.out, "w") as f:
            f.write(text)


def _emit_table(rc: RunConfig, header, rows, extra: dict | None = None):
    meta = {**rc.metadata(), **(extra or {})}
    if rc.format == "json":
        recs = [dict(zip(header, r)) for r in rows]
        _emit_text(rc, json.dumps(_jsonable({**meta, "rows": recs}), indent=2, sort_keys=True) + "\n")
    elif rc.format == "csv":
        _emit_text(rc, format_csv(header, rows, meta))
    else:
        raise UsageError(f"format {rc.format!r} is not available for {rc.command}")


def _emit_reports(rc: RunConfig, reports: list[StatReport]) -> int:
    ok = all(r.verdict for r in reports)
    for r in reports:
        print(r.line(), file=sys.stderr)
    doc = {**rc.metadata(), "verdict": "pass" if ok else "fail", "reports": [r.to_dict() for r in reports]}
    _emit_text(rc, json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def _emit_ensemble(rc: RunConfig, ens):
    if rc.format == "csv":
        write_ensemble_csv(rc.out if rc.out else "-", ens, rc.metadata())
    elif rc.format == "binary":
        if rc.out in (None, "-"):
            raise UsageError("--format binary needs --out FILE")
        write_ensemble_binary(rc.out, ens, rc.metadata())
    elif rc.format == "json":
        doc = {**rc.metadata(), **ens.metadata, "times": ens.times, "values": ens.values}
        _emit_text(rc, json.dumps(_jsonable(doc), sort_keys=True) + "\n")
    else:
        raise UsageError(f"unknown format {rc.format!r}")
    return EXIT_OK


# commands

def _fmt_interval(iv) -> str:
    return str(iv)


def cmd_params(rc: RunConfig) -> int:
    (p,) = rc.need("p")
    if p is INF_POWER:
        b = rc.params["b"]
        if b is None:
            raise UsageError("p=inf needs --b for its rate domain")
        row = ["inf", 1, 1, "undefined", "undefined", _fmt_interval(mu_domain(p, b)), "[1, 1]", "undefined"]
    else:
        alpha = alpha_of_p(p)
        mu_dom = _fmt_interval(mu_domain(p))
        if p == 2:
            row = [_num(p), 0, "undefined", "undefined", "undefined", mu_dom, "undefined", "undefined"]
        else:
            H = hurst_of_p(p)
            smap = "; ".join((f"H = {float(iv.lo):g}" if iv.lo == iv.hi else f"H in {iv}") + f": {s.value}"
                             for iv, s in correlation_sign_map(p))
            row = [_num(p), float(alpha), float(H), 0.0, 2.0, mu_dom, _fmt_interval(hurst_domain(p)), smap]
    header = ["p", "alpha", "H", "D_min", "D_max", "mu_domain", "H_domain", "correlation_sign"]
    _emit_table(rc, header, [row])
    return EXIT_OK


def cmd_cgf(rc: RunConfig) -> int:
    spec = rc.spec()
    z = parse_grid(rc.params["z"])
    c = np.atleast_1d(cumulant_transform(z, spec, rc.params["t"]))
    _emit_table(rc, ["z", "re", "im"], [(float(a), float(v.real), float(v.imag)) for a, v in zip(z, c)])
    return EXIT_OK


def cmd_sample(rc: RunConfig) -> int:
    spec = rc.spec()
    n = rc.params["n"] or 1000
    t = rc.params["t"]
    x = sample_tweedie(spec, t, n, rc.stream())
    col = f"Tw(p={_num(spec.p)};mu={spec.mu:g};sigma2={spec.sigma2:g};w={t:g})"
    _emit_table(rc, [col], [(float(v),) for v in x], {"stream": rc.stream().metadata()})
    return EXIT_OK


def cmd_process(rc: RunConfig) -> int:
    spec = rc.spec()
    n = rc.params["n"] or 100
    if rc.params["two_sided"]:
        T, step = rc.need("T", "step")
        ens = extend_two_sided(spec, T, step, n, rc.stream())
    elif rc.params["grid"] is not None:
        ens = simulate_hougaard(spec, TimeGrid.from_times(parse_grid(rc.params["grid"])), n, rc.stream(),
                                threads=rc.threads)
    else:
        T, step = rc.need("T", "step")
        ens = simulate_hougaard(spec, TimeGrid.uniform(T, step), n, rc.stream(), threads=rc.threads)
    return _emit_ensemble(rc, ens)


def _fhm_config(rc: RunConfig, n: int) -> FHMConfig:
    (H,) = rc.need("H")
    return FHMConfig(rc.spec(), H, T=rc.params["T"], step=rc.params["step"], n_paths=n, stream=rc.stream(),
                     eps_tail=rc.params["eps"])


def _fhm_times(rc: RunConfig) -> np.ndarray:
    g = rc.params["grid"]
    return parse_grid(g) if g is not None else np.array([rc.params["t"]])


def cmd_fhm(rc: RunConfig, action: str) -> int:
    if action == "simulate":
        cfg = _fhm_config(rc, rc.params["n"] or 1000)
        return _emit_ensemble(rc, simulate_fhm(cfg, _fhm_times(rc), threads=rc.threads))
    if action == "variance":
        ts = _fhm_times(rc)
        n = rc.params["n"] or 0
        cfg = _fhm_config(rc, max(n, 1))
        theory = np.atleast_1d(fhm_variance(ts, cfg))
        if n > 0:
            ens = simulate_fhm(cfg, ts, threads=rc.threads)
            rows = []
            for t, v in zip(ts, theory):
                x = ens.at(t)
                m4 = np.mean((x - x.mean()) ** 4)
                s2 = x.var(ddof=1)
                rows.append((float(t), float(v), float(s2), float(math.sqrt(max(m4 - s2 * s2, 0.0) / x.size))))
            _emit_table(rc, ["t", "variance", "mc_variance", "mc_se"], rows, {"fhm": ens.metadata})
        else:
            disc = fhm_discretization(cfg, ts)
            _emit_table(rc, ["t", "variance"], [(float(t), float(v)) for t, v in zip(ts, theory)],
                        {"fhm": {"eps_tail": cfg.eps_tail, **disc.metadata()}})
        return EXIT_OK
    if action == "cgf":
        cfg = _fhm_config(rc, 1)
        z = parse_grid(rc.params["z"])
        t = rc.params["t"]
        c = np.atleast_1d(fhm_cumulant_transform(z, t, cfg))
        _emit_table(rc, ["z", "re", "im"], [(float(a), float(v.real), float(v.imag)) for a, v in zip(z, c)],
                    {"fhm": {"t": t, "h": cfg.h}})
        return EXIT_OK
    raise UsageError(f"unknown fhm action {action!r}")


def _family(rc: RunConfig):
    fam = rc.params["family"]
    if fam == "hougaard":
        (p,) = rc.need("p")
        return HougaardFamily(p, float(rc.params["sigma2"]))
    if fam == "brownian":
        return DriftBrownianFamily(math.sqrt(rc.params["sigma2"]))
    if fam == "random-walk":
        return RandomWalkFamily()
    raise UsageError(f"unknown family {fam!r}; use hougaard, brownian or random-walk")


def cmd_lamperti(rc: RunConfig, action: str) -> int:
    n = rc.params["n"] or 10_000
    mu = rc.params["mu"]
    stream = rc.stream()
    if action == "converge":
        cs = parse_grid(rc.params["c"]) if rc.params["c"] is not None else [4, 16, 64, 256]
        ts = parse_grid(rc.params["grid"]) if rc.params["grid"] is not None else [rc.params["t"]]
        rep = convergence_diagnostic(RandomWalkFamily(), DriftBrownianFamily(), 0.5, cs, mu, ts, n, stream,
                                     threshold=rc.params["threshold"])
        rep.label = "random walk -> Brownian motion with drift"
        return _emit_reports(rc, [rep])
    gen = _family(rc)
    H = rc.params["H"] if rc.params["H"] is not None else gen.H
    reports = []
    if action == "forward":
        ts = parse_grid(rc.params["grid"]) if rc.params["grid"] is not None else np.array([0.0, 1.0])
        base = lamperti_marginal_sample(gen, mu, H, float(ts[0]), n, stream.child(0))
        for j, t in enumerate(ts[1:], start=1):
            y = lamperti_marginal_sample(gen, mu, H, float(t), n, stream.child(j))
            reports.append(ks_two_sample(base, y, label=f"stationarity Y(t={ts[0]:g}) vs Y(t={t:g})",
                                         H=H, mu=mu, t0=float(ts[0]), t=float(t)))
    elif action == "inverse":
        t = rc.params["t"]
        x = inverse_lamperti_marginal(LampertiFamily(gen, H), H, mu, t, n, stream.child(0))
        y = gen.sample(mu, t, n, stream.child(1))
        reports.append(ks_two_sample(x, y, label=f"inverse Lamperti round trip t={t:g}", H=H, mu=mu, t=t))
    elif action == "rg":
        cs = parse_grid(rc.params["c"]) if rc.params["c"] is not None else [2.0]
        t = rc.params["t"]
        y = gen.sample(mu, t, n, stream.child(0))
        for i, c in enumerate(cs, start=1):
            x = rg_apply(gen, float(c), H).sample(mu, t, n, stream.child(i))
            reports.append(ks_two_sample(x, y, label=f"fixed point R_c c={c:g} t={t:g}", H=H, mu=mu, c=float(c), t=t))
    else:
        raise UsageError(f"unknown lamperti action {action!r}")
    return _emit_reports(rc, reports)


def cmd_cov(rc: RunConfig, action: str) -> int:
    if action == "table":
        (H,) = rc.need("H")
        grid = parse_grid(rc.params["grid"] if rc.params["grid"] is not None else "1:4")
        if rc.params["b"] is not None:
            V = VarianceFunction.exponential(rc.params["b"], rc.params["sigma2"])
        else:
            (p,) = rc.need("p")
            V = VarianceFunction.power(p, rc.params["sigma2"])
        mu = rc.params["mu"]
        rows = [(float(s), float(t), float(cov(V, H, mu, s, t))) for s in grid for t in grid]
        _emit_table(rc, ["s", "t", "value"], rows)
        return EXIT_OK
    if action == "corr":
        D = rc.params["D"]
        if D is None:
            p, H = rc.need("p", "H")
            D = float((H - 1) * (p - 2))
        r = parse_grid(rc.params["grid"] if rc.params["grid"] is not None else "0.25:4:16")
        rho = np.atleast_1d(increment_correlation(r, D))
        _emit_table(rc, ["r", "D", "rho"], [(float(a), D, float(b)) for a, b in zip(r, rho)])
        return EXIT_OK
    raise UsageError(f"unknown cov action {action!r}")


def cmd_verify(rc: RunConfig, suite: str | None, run_all: bool, quick: bool) -> int:
    if run_all == (suite is not None):
        raise UsageError("verify needs exactly one of a suite name or --all")
    names = list(SUITES) if run_all else [suite]
    for name in names:
        if name not in SUITES and name not in ACCEPTANCE:
            raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    kw = {}
    if not run_all:
        kw = {k: rc.params[k] for k in ("p", "H", "mu", "n", "t", "c") if k in rc.explicit}
        if "p" in kw and isinstance(kw["p"], Fraction) and kw["p"].denominator == 1:
            kw["p"] = int(kw["p"])
        if "c" in kw:
            kw["c"] = float(kw["c"])
    reports = []
    for name in names:
        reps, secs = run_suite(name, rc.seed, quick, **kw)
        print(f"== {name} ({secs:.1f} s)", file=sys.stderr)
        reports.extend(reps)
    rc.params["quick"] = quick
    return _emit_reports(rc, reports)


# parser

def _add_common(sp: argparse.ArgumentParser, *flags):
    g = sp.add_argument_group("parameters")
    table = {
        "p": dict(help="variance power (exact: 3, 1.5, 3/2 or inf)"),
        "H": dict(type=float, help="Hurst exponent"),
        "mu": dict(help="rate parameter mu"),
        "sigma2": dict(type=float, help="dispersion sigma^2"),
        "b": dict(type=float, help="slope b of the exponential variance function"),
        "t": dict(type=float, help="time or weight"),
        "n": dict(type=int, help="sample size or number of paths"),
        "c": dict(help="scale factor(s), a grid spec"),
        "T": dict(type=float, help="window or horizon"),
        "step": dict(type=float, help="time step"),
        "eps": dict(type=float, help="tail-mass budget for the fHm window"),
        "D": dict(type=float, help="fractal dimension"),
        "grid": dict(help="grid spec a:b, a:b:n or x,y,..."),
        "z": dict(help="argument grid for transforms"),
        "family": dict(help="hougaard, brownian or random-walk"),
        "threshold": dict(type=float, help="KS distance threshold"),
    }
    for f in flags:
        g.add_argument(f"--{f}", dest=f, default=None, **table[f])
    o = sp.add_argument_group("run")
    o.add_argument("--seed", type=int, default=None, help="master seed (default $HOUGAARD_SEED or 1729)")
    o.add_argument("--config", default=None, help="JSON file of parameters; explicit flags win")
    o.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
    o.add_argument("--out", default=None, help="output file (default stdout)")
    o.add_argument("--format", default=None, choices=["csv", "json", "binary"], help="output format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hougaard", description="Self-similar Tweedie/Hougaard process toolkit")
    ap.add_argument("--version", action="version", version=f"hougaard {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("params", help="alpha, H, D range, domains and correlation signs for a power p")
    _add_common(sp, "p", "b")

    sp = sub.add_parser("cgf", help="cumulant transform of S_p(mu; t)")
    sp.add_argument("action", choices=["eval"])
    _add_common(sp, "p", "mu", "sigma2", "t", "z")

    sp = sub.add_parser("sample", help="draws of Tw_p(mu, w) with weight w = --t")
    _add_common(sp, "p", "mu", "sigma2", "t", "n")

    sp = sub.add_parser("process", help="Hougaard Lévy paths")
    sp.add_argument("action", choices=["simulate"])
    sp.add_argument("--two-sided", dest="two_sided", action="store_true", default=None,
                    help="paths on [-T, T]")
    _add_common(sp, "p", "mu", "sigma2", "n", "T", "step", "grid")

    sp = sub.add_parser("fhm", help="fractional Hougaard motion")
    sp.add_argument("action", choices=["simulate", "variance", "cgf"])
    _add_common(sp, "p", "H", "mu", "sigma2", "t", "n", "T", "step", "eps", "grid", "z")

    sp = sub.add_parser("lamperti", help="Lamperti transforms and renormalization")
    sp.add_argument("action", choices=["forward", "inverse", "rg", "converge"])
    _add_common(sp, "family", "p", "H", "mu", "sigma2", "t", "n", "c", "grid", "threshold")

    sp = sub.add_parser("cov", help="covariance tables and increment correlations")
    sp.add_argument("action", choices=["table", "corr"])
    _add_common(sp, "p", "H", "mu", "sigma2", "b", "D", "grid")

    sp = sub.add_parser("verify", help="run verification suites")
    sp.add_argument("suite", nargs="?", default=None, help=f"one of {', '.join(SUITES)} (or A1..A11)")
    sp.add_argument("--all", dest="run_all", action="store_true", help="run every suite")
    sp.add_argument("--quick", action="store_true", help="smaller Monte Carlo sizes")
    _add_common(sp, "p", "H", "mu", "t", "n", "c")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        rc = _resolve(args, args.command)
        cmd = args.command
        if cmd == "params":
            return cmd_params(rc)
        if cmd == "cgf":
            return cmd_cgf(rc)
        if cmd == "sample":
            return cmd_sample(rc)
        if cmd == "process":
            return cmd_process(rc)
        if cmd == "fhm":
            return cmd_fhm(rc, args.action)
        if cmd == "lamperti":
            return cmd_lamperti(rc, args.action)
        if cmd == "cov":
            return cmd_cov(rc, args.action)
        if cmd == "verify":
            return cmd_verify(rc, args.suite, args.run_all, args.quick)
    except (UsageError, DomainError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"hougaard: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
