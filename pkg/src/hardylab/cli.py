"""Command-line front end: one subcommand per experiment.

Configuration is an INI file (sections ``run``, ``params``, ``sweep``,
``geometry``, ``solver``, ``sobolev``, ``thresholds``).  Flags override file
keys, and ``--set section.key=value`` overrides anything.  Every run writes
one or more CSV files and then ``<subcommand>.json``, which embeds the fully
resolved configuration.  Only the ``metadata`` block of that JSON carries a
timestamp; everything else is a pure function of (config, seed).

Exit codes: 0 all verdicts pass, 1 a verdict fails, 2 configuration or
parameter-regime error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import io
import json
import math
import sys
from importlib import metadata as _metadata
from pathlib import Path

import numpy as np

from . import certificates as cert
from . import geometry as geo
from . import minimizing_sequences as ms
from . import solver
from .errors import HardyLabError
from .functionals import hardy_functional, random_profiles, weighted_lq_norm
from .params import HardyParams
from .quadrature import WeightedIntegrand, integrate_singular
from .reports import SCHEMA_VERSION, SweepReport, format_number
from .weights import x_power_antiderivative

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "run": {"seed": "0", "out_dir": "hardylab-out"},
    "params": {"p": "2", "k": "3", "N": "3", "D": ""},
    "sweep": {
        "eps": ", ".join(repr(e) for e in ms.DEFAULT_EPS),
        "theta": "0.55",
        "gamma": "1.0",
        "q": "1",
        "beta": "1.2",
        "mode": "A",
        "delta": "1",
    },
    "geometry": {"variant": "point", "n_samples": "200"},
    "solver": {"kind": "plain", "r_min": "1e-30", "n": "400", "iterations": "20000", "t_max": "1e12"},
    "sobolev": {"q": "3", "weight": "hardy-sobolev", "n_profiles": "50"},
    "quad": {"cases": "50"},
    "thresholds": {
        "quad_rtol": "1e-8",
        "limit_rtol": "0.03",
        "exponent_tol": "0.1",
        "remainder_rtol": "0.02",
        "slope_tol": "0.05",
        "hp_margin": "0.1",
        "certificate_margin": "-1e-10",
        "condition_slack": "1e-4",
        "solver_rtol": "0.08",
        "lower_bound_slack": "1e-3",
        "sobolev_min_ratio": "0",
    },
}

SUBCOMMANDS = (
    "quad-selftest",
    "check-condition-c",
    "verify-constant",
    "verify-remainder",
    "verify-exponent",
    "verify-pk",
    "weak-norm-failure",
    "hp-optimality",
    "sobolev-check",
    "rayleigh-min",
)

# flag name -> (section, key)
FLAG_KEYS = {
    "p": ("params", "p"),
    "k": ("params", "k"),
    "N": ("params", "N"),
    "D": ("params", "D"),
    "theta": ("sweep", "theta"),
    "gamma": ("sweep", "gamma"),
    "q": ("sweep", "q"),
    "beta": ("sweep", "beta"),
    "eps": ("sweep", "eps"),
    "mode": ("sweep", "mode"),
    "variant": ("geometry", "variant"),
    "kind": ("solver", "kind"),
    "seed": ("run", "seed"),
    "out_dir": ("run", "out_dir"),
}


class ConfigError(HardyLabError, ValueError):
    """Malformed configuration."""


class RunConfig:
    """Resolved configuration: section -> key -> string, with typed accessors."""

    def __init__(self, sections: dict):
        self.sections = sections

    def get(self, section: str, key: str) -> str:
        try:
            return self.sections[section][key]
        except KeyError:
            raise ConfigError(f"missing config key {section}.{key}") from None

    def num(self, section: str, key: str) -> float:
        raw = self.get(section, key)
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{section}.{key} must be a number, got {raw!r}") from None

    def integer(self, section: str, key: str) -> int:
        x = self.num(section, key)
        if x != int(x):
            raise ConfigError(f"{section}.{key} must be an integer, got {x}")
        return int(x)

    def floats(self, section: str, key: str) -> list:
        raw = self.get(section, key)
        try:
            return [float(v) for v in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigError(f"{section}.{key} must be a list of numbers, got {raw!r}") from None

    @property
    def seed(self) -> int:
        return self.integer("run", "seed")

    def threshold(self, key: str) -> float:
        return self.num("thresholds", key)

    def params(self, D_default: float | None = None) -> HardyParams:
        raw_D = self.get("params", "D").strip()
        if raw_D:
            D = self.num("params", "D")
        else:
            D = math.e * self.num("sweep", "delta") if D_default is None else D_default
            self.sections["params"]["D"] = repr(D)
        return HardyParams(self.num("params", "p"), self.num("params", "k"), self.num("params", "N"), D)

    def to_dict(self) -> dict:
        return {s: dict(sorted(kv.items())) for s, kv in sorted(self.sections.items())}


def load_config(path: str | None, overrides: dict, sets: list) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp.read_dict(DEFAULTS)
    if path:
        if not Path(path).is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            cp.read(path, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
    for (section, key), value in overrides.items():
        cp[section][key] = str(value)
    for item in sets:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        lhs, value = item.split("=", 1)
        section, key = lhs.split(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][key] = value
    return RunConfig({s: dict(cp[s]) for s in cp.sections()})


# ---------------------------------------------------------------- outputs


class Outcome:
    """What a subcommand produced: CSV tables, a summary body and a verdict."""

    def __init__(self, verdict_ok: bool, line: str):
        self.ok = verdict_ok
        self.line = line
        self.tables: dict = {}
        self.summary: dict = {}


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _add_report(out: Outcome, name: str, rep: SweepReport):
    out.tables[name] = rep.to_csv()
    out.summary.setdefault("reports", {})[name] = rep.summary()


def _write(out_dir: Path, name: str, out: Outcome, cfg: RunConfig) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for table, text in sorted(out.tables.items()):
        fn = f"{name}-{table}.csv"
        (out_dir / fn).write_bytes(text.encode("utf-8"))
        files.append(fn)
    try:
        version = _metadata.version("artifact")
    except _metadata.PackageNotFoundError:
        version = "unknown"
    doc = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": name,
        "config": cfg.to_dict(),
        "verdict": "pass" if out.ok else "fail",
        "verdict_line": out.line,
        "files": files,
        "results": _jsonable(out.summary),
        "metadata": {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(), "version": version},
    }
    (out_dir / f"{name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------- subcommands


def cmd_quad_selftest(cfg: RunConfig) -> Outcome:
    """Closed-form oracle for r^-1 X^(beta+1) on (0, s2) at random (beta, s2)."""
    n = cfg.integer("quad", "cases")
    rtol = cfg.threshold("quad_rtol")
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(n):
        beta = float(rng.uniform(0.05, 4.0))
        s2 = float(rng.uniform(0.01, 0.95))
        exact = x_power_antiderivative(beta, 0.0, s2)
        got = integrate_singular(WeightedIntegrand(-1.0, beta + 1.0, 1.0), 0.0, s2, tol=rtol)
        rel = abs(got.value - exact) / abs(exact)
        rows.append((i, beta, s2, exact, float(got.value), rel))
    worst = max(r[-1] for r in rows)
    ok = worst <= rtol
    out = Outcome(ok, f"quad-selftest: {'PASS' if ok else 'FAIL'} worst relative error {worst:.3g} over {n} cases")
    out.tables["cases"] = _rows_csv(("case", "beta", "s2", "exact", "computed", "relative_error"), rows)
    out.summary = {"cases": n, "worst_relative_error": worst, "tolerance": rtol}
    return out


def cmd_check_condition_c(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    gcfg = dict(cfg.sections["geometry"])
    gcfg.setdefault("dimension", str(P.N))
    gcfg.setdefault("codimension", str(P.k))
    g = geo.geometry_from_config(gcfg)
    pts = geo.sample_domain(g, cfg.integer("geometry", "n_samples"), cfg.seed)
    rep = geo.check_condition_c(g, P, pts, slack=cfg.threshold("condition_slack"))
    rows = [(i, *(float(c) for c in x), val, int(ridge)) for i, (x, val, ridge) in enumerate(rep.samples)]
    header = ("sample",) + tuple(f"x{j + 1}" for j in range(g.N)) + ("condition_value", "on_ridge")
    # a "violated" verdict is a correct report, not a failed run
    out = Outcome(rep.verdict != "error", f"check-condition-c: {rep.verdict} (worst {rep.worst_value:.3g})")
    out.tables["samples"] = _rows_csv(header, rows)
    out.summary = rep.to_dict()
    return out


def _theta_eps(cfg):
    return cfg.num("sweep", "theta"), cfg.floats("sweep", "eps")


def cmd_verify_constant(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    theta, eps = _theta_eps(cfg)
    rep_i, _, _ = ms.optimality_sweep_A(P, theta, eps, gamma=cfg.num("sweep", "gamma"),
                                        delta=cfg.num("sweep", "delta"), geometry=_radial_geometry(P),
                                        limit_rtol=cfg.threshold("limit_rtol"))
    ok = rep_i.verdict == "pass"
    out = Outcome(ok, f"verify-constant: {'PASS' if ok else 'FAIL'} limit {rep_i.fitted_limit:.6g} "
                      f"vs {rep_i.expected['limit']:.6g}")
    _add_report(out, "constant", rep_i)
    return out


def cmd_verify_exponent(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    theta, eps = _theta_eps(cfg)
    _, rep_ii, _ = ms.optimality_sweep_A(P, theta, eps, gamma=cfg.num("sweep", "gamma"),
                                         delta=cfg.num("sweep", "delta"), geometry=_radial_geometry(P),
                                         exponent_tol=cfg.threshold("exponent_tol"))
    ok = rep_ii.verdict == "pass"
    out = Outcome(ok, f"verify-exponent: {'PASS' if ok else 'FAIL'} exponent {rep_ii.fitted_exponent:.4g} "
                      f"vs {rep_ii.expected['exponent']:.4g}")
    _add_report(out, "remainder-exponent", rep_ii)
    return out


def cmd_verify_remainder(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    theta, eps = _theta_eps(cfg)
    _, _, rep_iii = ms.optimality_sweep_A(P, theta, eps, gamma=cfg.num("sweep", "gamma"),
                                          delta=cfg.num("sweep", "delta"), geometry=_radial_geometry(P),
                                          remainder_rtol=cfg.threshold("remainder_rtol"))
    spec = cert.VectorFieldSpec(P)
    c = cert.certify(spec, sup_d=cfg.num("sweep", "delta"))
    c_ok = c.verified and c.min_margin >= cfg.threshold("certificate_margin")
    ok = rep_iii.verdict == "pass" and c_ok
    out = Outcome(ok, f"verify-remainder: {'PASS' if ok else 'FAIL'} limit {rep_iii.fitted_limit:.6g} "
                      f"<= {rep_iii.expected['upper_bound']:.6g}; certificate "
                      f"{'verified' if c_ok else 'not verified'} (D0 {c.D0:.6g})")
    _add_report(out, "remainder-coefficient", rep_iii)
    ts = np.linspace(0.0, c.M_checked, 201) if c.M_checked > 0 else np.zeros(1)
    out.tables["certificate"] = _rows_csv(("t", "margin"), zip(ts.tolist(), cert.margin(spec, ts).tolist()))
    out.summary["certificate"] = c.to_dict()
    return out


def cmd_verify_pk(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    theta, eps = _theta_eps(cfg)
    delta = cfg.num("sweep", "delta")
    geom = _radial_geometry(P)
    rep = ms.optimality_sweep_pk(P, theta, eps, delta=delta, geometry=geom,
                                 limit_rtol=cfg.threshold("limit_rtol"))
    probe = ms.optimality_sweep_pk(P, theta, eps, delta=delta, geometry=geom, probe_gamma=P.p - 0.5)
    ok = rep.verdict == "pass" and probe.verdict == "pass"
    out = Outcome(ok, f"verify-pk: {'PASS' if ok else 'FAIL'} limit {rep.fitted_limit:.6g} "
                      f"(sharp {P.degenerate_constant:.6g}); probe exponent {probe.fitted_exponent:.4g}")
    _add_report(out, "constant", rep)
    _add_report(out, "gamma-probe", probe)
    return out


def cmd_weak_norm_failure(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    theta, eps = _theta_eps(cfg)
    rep = ms.weak_norm_failure(P, theta, eps, mode=cfg.get("sweep", "mode").strip(),
                               delta=cfg.num("sweep", "delta"), slope_tol=cfg.threshold("slope_tol"))
    ok = rep.verdict == "pass"
    out = Outcome(ok, f"weak-norm-failure: {'PASS' if ok else 'FAIL'} ratio exponent {rep.fitted_exponent:.4g} "
                      f"(mode {rep.expected['mode']})")
    _add_report(out, "ratio", rep)
    return out


def cmd_hp_optimality(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    theta, eps = _theta_eps(cfg)
    q, beta = cfg.num("sweep", "q"), cfg.num("sweep", "beta")
    rep = ms.hp_optimality(P, q, beta, theta, eps, delta=cfg.num("sweep", "delta"),
                           margin=cfg.threshold("hp_margin"))
    critical = 1 + q / P.p
    # the probe is right when it flags failure exactly below the critical power
    expect_fail = beta < critical
    ok = (rep.verdict == "inequality fails") == expect_fail
    out = Outcome(ok, f"hp-optimality: {'PASS' if ok else 'FAIL'} {rep.verdict} at beta {beta:g} "
                      f"(critical {critical:.4g}, exponent {rep.fitted_exponent:.4g})")
    _add_report(out, "ratio", rep)
    return out


def cmd_sobolev_check(cfg: RunConfig) -> Outcome:
    P = cfg.params()
    N, p = P.N, P.p
    if P.k != N:
        raise HardyLabError("sobolev-check works radially: set k = N")
    if not 1 < p < N:
        raise HardyLabError(f"the improved Hardy-Sobolev inequality needs 1 < p < N, got p = {p}")
    q = cfg.num("sobolev", "q")
    weight = cfg.get("sobolev", "weight").strip()
    if weight == "hardy-sobolev":
        if not p <= q < N * p / (N - p):
            raise HardyLabError(f"need p <= q < Np/(N-p) = {N * p / (N - p):.6g}, got q = {q}")
        x_pow = 1 + q / p
    elif weight == "log-squared":
        if not p < q <= N * p / (N - p):
            raise HardyLabError(f"need p < q <= Np/(N-p) = {N * p / (N - p):.6g}, got q = {q}")
        x_pow = 2 * q / p
    else:
        raise HardyLabError(f"sobolev.weight must be 'hardy-sobolev' or 'log-squared', got {weight!r}")
    d_pow = -q - N + N * q / p
    profiles = random_profiles(cfg.integer("sobolev", "n_profiles"), cfg.seed, r_max=1.0)
    P = P if P.D > 1.0 else P.with_D(math.e)
    rows = []
    for i, u in enumerate(profiles):
        I = hardy_functional(P, u)
        nrm = weighted_lq_norm(u, q, d_pow, x_pow, P)
        rows.append((i, I, nrm, I / nrm ** p))
    inf = min(r[-1] for r in rows)
    ok = inf > cfg.threshold("sobolev_min_ratio")
    out = Outcome(ok, f"sobolev-check: {'PASS' if ok else 'FAIL'} empirical infimum {inf:.4g} over {len(rows)} profiles")
    out.tables["profiles"] = _rows_csv(("profile", "hardy_functional", "weighted_norm", "ratio"), rows)
    out.summary = {"q": q, "weight": weight, "d_power": d_pow, "x_power": x_pow, "empirical_infimum": inf,
                   "n_profiles": len(rows)}
    return out


def cmd_rayleigh_min(cfg: RunConfig) -> Outcome:
    kind = cfg.get("solver", "kind").strip()
    n = cfg.integer("solver", "n")
    if kind == "plain":
        P = cfg.params()
        prob = solver.RayleighProblem.plain(P, r_min=cfg.num("solver", "r_min"), n=n)
    else:
        P = cfg.params()
        prob = solver.RayleighProblem.weighted(P, kind, t_max=cfg.num("solver", "t_max"), n=n)
    res = solver.minimize(prob, iterations=cfg.integer("solver", "iterations"), seed=cfg.seed)
    target = prob.target
    if kind == "plain":
        ok = target - cfg.threshold("lower_bound_slack") <= res.value <= target * (1 + cfg.threshold("solver_rtol"))
    else:
        ok = res.value >= target - cfg.threshold("lower_bound_slack")
    out = Outcome(ok, f"rayleigh-min: {'PASS' if ok else 'FAIL'} {kind} quotient {res.value:.7g} "
                      f"(constant {target:.7g})")
    out.tables["history"] = res.history_csv()
    out.tables["minimizer"] = res.minimizer.to_csv()
    out.summary = {"kind": kind, "value": res.value, "target": target, "converged": res.converged,
                   "iterations": res.iterations, "message": res.message, "notes": res.notes}
    return out


def _radial_geometry(P: HardyParams) -> str:
    if P.k == P.N:
        return "point"
    if P.k == 1:
        return "boundary"
    return "affine"


COMMANDS = {
    "quad-selftest": cmd_quad_selftest,
    "check-condition-c": cmd_check_condition_c,
    "verify-constant": cmd_verify_constant,
    "verify-remainder": cmd_verify_remainder,
    "verify-exponent": cmd_verify_exponent,
    "verify-pk": cmd_verify_pk,
    "weak-norm-failure": cmd_weak_norm_failure,
    "hp-optimality": cmd_hp_optimality,
    "sobolev-check": cmd_sobolev_check,
    "rayleigh-min": cmd_rayleigh_min,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardylab", description="Numerical experiments on improved Hardy inequalities.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name, help=(COMMANDS[name].__doc__ or name).splitlines()[0])
        sp.add_argument("--config", help="INI file with run/params/sweep/... sections")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", dest="out_dir")
        for flag in ("p", "D", "theta", "gamma", "q", "beta"):
            sp.add_argument(f"--{flag}", type=float)
        sp.add_argument("--k", type=int)
        sp.add_argument("--N", type=int)
        sp.add_argument("--eps", help="comma-separated epsilon list")
        sp.add_argument("--mode", choices=("A", "B"))
        sp.add_argument("--variant", help="geometry variant")
        sp.add_argument("--kind", choices=solver.KINDS)
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    for flag, target in FLAG_KEYS.items():
        val = getattr(args, flag, None)
        if val is not None:
            overrides[target] = repr(val) if isinstance(val, float) else val
    try:
        cfg = load_config(args.config, overrides, args.set)
        cfg.seed  # validate early
        out = COMMANDS[args.command](cfg)
    except HardyLabError as exc:
        print(f"{args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write(Path(cfg.get("run", "out_dir")), args.command, out, cfg)
    print(out.line)
    return EXIT_PASS if out.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
