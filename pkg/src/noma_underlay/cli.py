"""Command-line front end.

    noma-underlay sweep        CSV of analytic and simulated metrics over an I grid
    noma-underlay validate     closed form / quadrature / Monte Carlo agreement report
    noma-underlay optimize-an  outage-minimizing power split

I and P_peak are given in dB relative to the unit noise power.  Any
long flag can also be set from a key=value file passed with --config;
flags on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import analytic, oracle, powalloc
from .channel import AntennaConfig, LinkParams
from .montecarlo import McConfig, point_seed, simulate, within_sigmas
from .policy import Scenario, ScenarioKind, db_to_linear, make_request

SWEEP_HEADER = [
    "i_db", "scenario", "scheme", "metric", "analytic_value", "mc_mean", "mc_stderr", "trials", "seed",
    "method", "a_n", "nn", "nf", "p_peak_db",
]
VALIDATE_HEADER = [
    "scenario", "metric", "scheme", "nn", "nf", "i_db", "p_peak_db", "closed", "quadrature", "rel_diff",
    "mc_mean", "mc_stderr", "mc_ok", "quad_ok", "method",
]
QUAD_REL_TOL = 1e-6


class ConfigError(ValueError):
    pass


# ---- parsing ------------------------------------------------------------


def _csv_list(conv):
    def parse(text):
        items = [t.strip() for t in str(text).split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return [conv(t) for t in items]

    return parse


def parse_grid(text: str) -> list[float]:
    """'start:stop:step' (stop inclusive) or a single value."""
    parts = str(text).split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if len(vals) == 1:
        return vals
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = vals
    if not step > 0:
        raise argparse.ArgumentTypeError("grid step must be positive")
    if stop < start:
        raise argparse.ArgumentTypeError(f"empty grid {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(n)]


def _an(text):
    if str(text).strip().lower() == "optimal":
        return "optimal"
    return float(text)


def _scenario(text):
    try:
        return ScenarioKind(text)
    except ValueError:
        choices = ", ".join(k.value for k in ScenarioKind)
        raise argparse.ArgumentTypeError(f"unknown scenario {text!r} (choose from {choices})") from None


def _common(p: argparse.ArgumentParser, grid_default: str):
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--scenario", type=_csv_list(_scenario), default="IntICSI")
    p.add_argument("--metric", type=_csv_list(str), default="outage")
    p.add_argument("--scheme", type=_csv_list(str), default="noma")
    p.add_argument("--nn", type=_csv_list(int), default="1", help="antennas at the near user (comma list)")
    p.add_argument("--nf", type=_csv_list(int), default="1", help="antennas at the far user (comma list)")
    p.add_argument("--an", type=_an, default="0.2", help="a_n value or 'optimal'")
    p.add_argument("--rate", type=float, default=1.0, help="target rate r (bits/s/Hz)")
    p.add_argument("--i-db", type=parse_grid, default=grid_default, help="start:stop:step in dB")
    p.add_argument("--ppeak-db", type=float, default=50.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--dn", type=float, default=30.0)
    p.add_argument("--df", type=float, default=100.0)
    p.add_argument("--dp", type=float, default=200.0)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=1 << 18)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--debug-linear", action="store_true", help="echo the linear I and P_peak values to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noma-underlay", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("sweep", help="metric sweep over I, written as CSV"), "0:40:5")
    v = sub.add_parser("validate", help="three-way agreement report")
    _common(v, "0:30:10")
    v.add_argument("--inject-omega-f-scale", type=float, default=1.0,
                   help="scale Ω_f in the quadrature and simulation only (self-test of the validator)")
    _common(sub.add_parser("optimize-an", help="outage-minimizing a_n"), "20")
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, val = (t.strip() for t in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = val
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        try:
            cfg = read_config(args.config)
        except (OSError, ConfigError) as e:
            parser.error(str(e))
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        if cfg.get("debug_linear") is not None:
            cfg["debug_linear"] = cfg["debug_linear"].lower() in ("1", "true", "yes")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


# ---- run configuration --------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    scenarios: tuple
    metrics: tuple
    schemes: tuple
    antennas: tuple
    a_n: object
    r_target: float
    i_db: tuple
    p_peak_db: float
    delta: float
    params: LinkParams
    mc: McConfig


def make_run_config(args) -> RunConfig:
    """Check every invariant before anything is computed."""
    for m in args.metric:
        if m not in ("sumrate", "outage"):
            raise ConfigError(f"metric must be sumrate or outage, got {m!r}")
    for s in args.scheme:
        if s not in ("noma", "oma"):
            raise ConfigError(f"scheme must be noma or oma, got {s!r}")
    nn, nf = args.nn, args.nf
    if len(nn) != len(nf):
        if len(nn) == 1:
            nn = nn * len(nf)
        elif len(nf) == 1:
            nf = nf * len(nn)
        else:
            raise ConfigError("--nn and --nf lists must have equal length (or one of them a single value)")
    antennas = tuple(AntennaConfig(a, b) for a, b in zip(nn, nf))
    if not args.i_db:
        raise ConfigError("empty interference grid")
    if not (0 < args.delta < 1):
        raise ConfigError(f"delta must lie in (0, 1), got {args.delta}")
    if not args.rate > 0:
        raise ConfigError(f"rate must be positive, got {args.rate}")
    if args.an != "optimal":
        theta = 2.0**args.rate - 1.0
        if not 0 < args.an < 0.5:
            raise ConfigError(f"a_n must lie in (0, 0.5) so that a_n < a_f, got {args.an}")
        if args.an >= 1.0 / (1.0 + theta):
            print(f"warning: a_n={args.an} >= 1/(1+θ); NOMA outage is 1 at every point", file=sys.stderr)
    if args.trials < 0:
        raise ConfigError("trials must be >= 0")
    params = LinkParams(args.dp, args.dn, args.df, args.alpha)
    mc = McConfig(max(args.trials, 1), args.seed, max(1, min(args.batch_size, max(args.trials, 1))))
    cfg = RunConfig(
        tuple(args.scenario), tuple(args.metric), tuple(args.scheme), antennas, args.an, args.rate,
        tuple(args.i_db), args.ppeak_db, args.delta, params, mc,
    )
    # build one request per scenario to surface constructor errors up front
    for kind in cfg.scenarios:
        _scenario_at(cfg, kind, cfg.i_db[0])
    if args.debug_linear:
        for i_db in cfg.i_db:
            print(f"debug: I={i_db} dB -> {db_to_linear(i_db)!r} linear", file=sys.stderr)
        print(f"debug: P_peak={cfg.p_peak_db} dB -> {db_to_linear(cfg.p_peak_db)!r} linear", file=sys.stderr)
    return cfg


def _scenario_at(cfg: RunConfig, kind: ScenarioKind, i_db: float) -> Scenario:
    return Scenario.build(kind, db_to_linear(i_db), delta=cfg.delta, p_peak=db_to_linear(cfg.p_peak_db))


def _a_n_for(cfg: RunConfig, kind, antennas, i_db) -> float:
    if cfg.a_n != "optimal":
        return cfg.a_n
    template = make_request(_scenario_at(cfg, kind, i_db), cfg.params, antennas, 0.1, cfg.r_target)
    return powalloc.optimal_an_numeric(template).a_n_star


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


# ---- sweep --------------------------------------------------------------


def _sweep_row(task):
    cfg, kind, antennas, scheme, metric, i_db, seed, simulate_it = task
    a_n = _a_n_for(cfg, kind, antennas, i_db)
    req = make_request(_scenario_at(cfg, kind, i_db), cfg.params, antennas, a_n, cfg.r_target)
    value, method = analytic.evaluate(metric, scheme, req)
    mean = se = None
    if simulate_it:
        est = simulate(metric, scheme, req, McConfig(cfg.mc.trials, seed, cfg.mc.batch_size))
        mean, se = est.mean, est.std_error
    return [
        _fmt(i_db), str(kind), scheme, metric, _fmt(value), _fmt(mean), _fmt(se),
        str(cfg.mc.trials if simulate_it else 0), str(seed), method, _fmt(a_n),
        str(antennas.n_n), str(antennas.n_f), _fmt(cfg.p_peak_db) if kind.uses_p_peak else "",
    ]


def _tasks(cfg: RunConfig, simulate_it: bool):
    for si, kind in enumerate(cfg.scenarios):
        for ai, ant in enumerate(cfg.antennas):
            for ci, scheme in enumerate(cfg.schemes):
                for mi, metric in enumerate(cfg.metrics):
                    for pi, i_db in enumerate(cfg.i_db):
                        seed = point_seed(cfg.mc.seed, si, ai, ci, mi, pi)
                        yield cfg, kind, ant, scheme, metric, i_db, seed, simulate_it


def _map(fn, tasks, workers):
    # results come back in task order whatever the completion order
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


def _write_csv(rows, header, path):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args) -> int:
    cfg = make_run_config(args)
    rows = _map(_sweep_row, list(_tasks(cfg, args.trials > 0)), args.workers)
    _write_csv(rows, SWEEP_HEADER, args.out)
    return 0


# ---- validate -----------------------------------------------------------


def _validate_row(task):
    cfg, kind, antennas, scheme, metric, i_db, seed, scale = task
    a_n = _a_n_for(cfg, kind, antennas, i_db)
    sc = _scenario_at(cfg, kind, i_db)
    req = make_request(sc, cfg.params, antennas, a_n, cfg.r_target)
    closed, method = analytic.evaluate(metric, scheme, req)
    # the independent paths see the (optionally perturbed) geometry
    test_params = cfg.params if scale == 1.0 else cfg.params.with_omega_f_scaled(scale)
    treq = make_request(sc, test_params, antennas, a_n, cfg.r_target)
    if metric == "sumrate":
        quad = (oracle.sumrate_noma_by_quadrature if scheme == "noma" else oracle.sumrate_oma_by_quadrature)(treq)
    else:
        quad = oracle.outage_by_quadrature(treq, scheme)
    rel = abs(closed - quad) / max(abs(quad), 1e-300) if closed != quad else 0.0
    est = simulate(metric, scheme, treq, McConfig(cfg.mc.trials, seed, cfg.mc.batch_size))
    mc_ok = within_sigmas(est, closed)
    quad_ok = rel <= QUAD_REL_TOL
    return [
        str(kind), metric, scheme, str(antennas.n_n), str(antennas.n_f), _fmt(i_db),
        _fmt(cfg.p_peak_db) if kind.uses_p_peak else "", _fmt(closed), _fmt(quad), _fmt(rel),
        _fmt(est.mean), _fmt(est.std_error), str(mc_ok), str(quad_ok), method,
    ]


def cmd_validate(args) -> int:
    cfg = make_run_config(args)
    if args.trials < 1:
        raise ConfigError("validate needs trials >= 1")
    scale = args.inject_omega_f_scale
    if not scale > 0:
        raise ConfigError("inject-omega-f-scale must be positive")
    tasks = [t[:-1] + (scale,) for t in _tasks(cfg, True)]
    rows = _map(_validate_row, tasks, args.workers)
    failures = [r for r in rows if r[12] != "True" or r[13] != "True"]
    for r in rows:
        status = "ok  " if r not in failures else "FAIL"
        print(
            f"{status} {r[0]:<13} {r[1]:<8} {r[2]:<5} N=({r[3]},{r[4]}) I={r[5]} dB"
            f"{' Pp=' + r[6] + ' dB' if r[6] else ''}: closed={r[7]} quad={r[8]} mc={r[10]}±{r[11]}",
            file=sys.stderr,
        )
    if args.out:
        _write_csv(rows, VALIDATE_HEADER, args.out)
    if failures:
        print(f"{len(failures)} of {len(rows)} checks failed:", file=sys.stderr)
        for r in failures:
            print(f"  {r[0]} {r[1]} {r[2]} N=({r[3]},{r[4]}) I={r[5]} dB", file=sys.stderr)
        return 1
    print(f"all {len(rows)} checks passed", file=sys.stderr)
    return 0


# ---- optimize-an --------------------------------------------------------


def cmd_optimize_an(args) -> int:
    cfg = make_run_config(args)
    for kind in cfg.scenarios:
        for ant in cfg.antennas:
            for i_db in cfg.i_db:
                sc = _scenario_at(cfg, kind, i_db)
                template = make_request(sc, cfg.params, ant, 0.1, cfg.r_target)
                num = powalloc.optimal_an_numeric(template)
                head = f"{kind} N=({ant.n_n},{ant.n_f}) I={i_db} dB"
                if kind.uses_p_peak:
                    head += f" P_peak={cfg.p_peak_db} dB"
                print(head)
                print(f"  a_n* = {num.a_n_star!r}  method={num.method}  outage={num.outage_at_optimum!r}"
                      + ("  (at branch kink)" if num.at_kink else "") + ("  (grid fallback)" if num.fallback else ""))
                if kind is not ScenarioKind.POWINT_ICSI and (ant.n_n, ant.n_f) == (1, 1):
                    closed = powalloc.optimal_an_closed(sc, cfg.params, cfg.r_target, ant)
                    ref = num if closed.objective == "outage" else powalloc.optimal_an_numeric(template, objective=closed.objective)
                    print(f"  closed form ({closed.objective} objective): a_n* = {closed.a_n_star!r}"
                          f"  numeric = {ref.a_n_star!r}  diff = {closed.a_n_star - ref.a_n_star:.3e}")
    return 0


COMMANDS = {"sweep": cmd_sweep, "validate": cmd_validate, "optimize-an": cmd_optimize_an}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValueError as e:
        print(f"noma-underlay {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["main", "build_parser", "parse_args", "parse_grid", "read_config", "RunConfig", "make_run_config"]
