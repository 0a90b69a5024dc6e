"""Command-line entry point: ``leader-election <command> [options]``.

Every command writes CSV (default) or JSON to ``--out`` or stdout. The first
CSV line is a ``#`` comment with the version, command, p and seed; JSON output
carries the same fields under ``"meta"``. Output depends only on the options,
so repeated runs are byte-identical.

Exit codes: 0 ok, 1 usage error, 2 numerical failure, 3 crossval failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import __version__
from .acceptance import CHECKS, run_checks
from .asymptotics import QuadratureError, asymptotic_mean, residual_exponent
from .exact import exact_cdf_dp, exact_mean_table, survival_table
from .intervals import K_CAP, cdf_exact, poisson_cdf
from .montecarlo import (
    default_xgrid,
    mc_conjecture,
    mc_lemma_check,
    mc_mean_cost_via_tau,
    mc_protocol_mean,
)
from .protocol import run_election, station_labels
from .splitchain import DEFAULT_MAX_STEPS, SplitParams
from .streams import trial_rng

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CROSSVAL = 0, 1, 2, 3

PEAK_NOTE = (
    "note: peak magnitudes of E(4^tau(x,x)) are not reproducible at this sample "
    "size; each estimate is dominated by a few trials (top_share) and the moment "
    "itself is infinite, so the curve is noise around a heavy tail."
)


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    p: float
    n: Optional[list]
    k: Optional[int]
    x: Optional[float]
    y: Optional[float]
    x_grid: Optional[list]
    trials: int
    seed: int
    max_steps: int
    out: Optional[str]
    fmt: str
    script: Optional[str] = None
    trace: bool = False
    workers: int = 1
    criteria: Optional[list] = None
    verbose: bool = False


# -- parsing ------------------------------------------------------------------

def _grid(text: str, cast=float) -> list:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid {text!r} must look like start:stop:step")
    a, b, step = (cast(v) for v in parts)
    if step <= 0 or b < a:
        raise UsageError(f"grid {text!r} is empty")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [cast(round(a + i * step, 12)) for i in range(count)]


def _x_grid(text: str) -> list[float]:
    if ":" in text:
        return _grid(text)
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leader-election", description="Biased leader election: exact, asymptotic and simulated costs.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, trials=10**5):
        sp.add_argument("--p", type=float, default=0.5, help="probability of flipping 1")
        sp.add_argument("--n", type=int, help="number of stations")
        sp.add_argument("--n-grid", help="station counts as start:stop:step")
        sp.add_argument("--k", type=int, help="round budget for distribution columns")
        sp.add_argument("--x", type=float)
        sp.add_argument("--y", type=float)
        sp.add_argument("--x-grid", help="comma list or start:stop:step")
        sp.add_argument("--trials", type=int, default=trials)
        sp.add_argument("--seed", type=int, default=1)
        sp.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
        sp.add_argument("--workers", type=int, default=1, help="processes for Monte Carlo blocks")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        return sp

    s = common(sub.add_parser("simulate", help="protocol traces and simulated mean cost"))
    s.add_argument("--script", help="replay coin flips, e.g. 1110,000,1000")
    s.add_argument("--trace", action="store_true", help="emit one random election trace")
    common(sub.add_parser("exact", help="mean table and recurrence cdf"))
    common(sub.add_parser("dist", help="distribution of the cost from the interval decomposition"))
    common(sub.add_parser("asymptotic", help="periodic expansion against the exact mean"))
    common(sub.add_parser("mc", help="hitting-time estimators and decomposition check"))
    common(sub.add_parser("conjecture", help="E(4^tau(x,x)) and E(tau(x,x)) over a grid"))
    c = common(sub.add_parser("crossval", help="run the acceptance checks"))
    c.add_argument("--criteria", help="comma list of criterion numbers (default all)")
    c.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if not (0.0 < ns.p < 1.0):
        raise UsageError(f"--p must lie in (0, 1), got {ns.p}")
    if ns.trials < 1:
        raise UsageError("--trials must be >= 1")
    if ns.max_steps < 1:
        raise UsageError("--max-steps must be >= 1")
    if ns.n is not None and ns.n_grid is not None:
        raise UsageError("give --n or --n-grid, not both")
    n = [ns.n] if ns.n is not None else (_grid(ns.n_grid, int) if ns.n_grid else None)
    if n is not None and any(v < 0 for v in n):
        raise UsageError("station counts must be >= 0")
    if ns.k is not None and ns.k < 0:
        raise UsageError("--k must be >= 0")
    xg = _x_grid(ns.x_grid) if ns.x_grid else None
    if xg is not None and not xg:
        raise UsageError("--x-grid is empty")
    criteria = None
    if getattr(ns, "criteria", None):
        criteria = [int(v) for v in ns.criteria.split(",")]
        if any(c not in CHECKS for c in criteria):
            raise UsageError(f"criteria must be among {sorted(CHECKS)}")
    return RunConfig(
        command=ns.command, p=ns.p, n=n, k=ns.k, x=ns.x, y=ns.y, x_grid=xg,
        trials=ns.trials, seed=ns.seed, max_steps=ns.max_steps, out=ns.out,
        fmt=ns.fmt, script=getattr(ns, "script", None), trace=getattr(ns, "trace", False),
        workers=ns.workers, criteria=criteria, verbose=getattr(ns, "verbose", False),
    )


# -- output -------------------------------------------------------------------

def _meta(cfg: RunConfig) -> dict:
    return {"version": __version__, "command": cfg.command, "p": cfg.p, "seed": cfg.seed}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(cfg: RunConfig, columns: Sequence[str], rows: Sequence[Sequence], notes: Sequence[str] = ()) -> str:
    if cfg.fmt == "json":
        doc = {"meta": _meta(cfg), "notes": list(notes),
               "rows": [dict(zip(columns, r)) for r in rows]}
        return json.dumps(doc, indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    meta = _meta(cfg)
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    for note in notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _need_n(cfg: RunConfig, minimum: int = 0) -> list[int]:
    if not cfg.n:
        raise UsageError(f"{cfg.command} needs --n or --n-grid")
    if any(v < minimum for v in cfg.n):
        raise UsageError(f"{cfg.command} needs station counts >= {minimum}")
    return cfg.n


def _check_k(k: int, cap: int) -> None:
    if k > cap:
        raise UsageError(f"refusing --k {k}: the interval decomposition is capped at level {cap} "
                         f"(2^{cap} intervals)")


# -- commands -----------------------------------------------------------------

def cmd_simulate(cfg: RunConfig) -> str:
    params = SplitParams(cfg.p)
    if cfg.script is not None or cfg.trace:
        n = _need_n(cfg)
        if len(n) != 1:
            raise UsageError("traces need a single --n")
        try:
            if cfg.script is not None:
                tr = run_election(n[0], params, script=cfg.script)
            else:
                tr = run_election(n[0], params, rng=trial_rng(cfg.seed, 0, "trace"), max_rounds=cfg.max_steps)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if tr.truncated:
            _warn(f"election truncated after {tr.coin_flip_rounds} rounds")
        doc = {"meta": _meta(cfg), "trace": tr.to_dict(p=cfg.p, labels=station_labels(n[0]))}
        return json.dumps(doc, indent=2) + "\n"
    rows = []
    for n in _need_n(cfg):
        e = mc_protocol_mean(n, params, cfg.trials, cfg.seed, workers=cfg.workers)
        if e.truncated_count:
            _warn(f"n={n}: {e.truncated_count} elections truncated")
        rows.append((n, e.value, e.stderr, e.trials, e.truncated_count,
                     float(exact_mean_table(max(n, 1), params)[n])))
    return render(cfg, ("n", "mean_rounds", "stderr", "trials", "truncated", "exact"), rows)


def cmd_exact(cfg: RunConfig) -> str:
    params = SplitParams(cfg.p)
    ns = _need_n(cfg)
    table = exact_mean_table(max(max(ns), 1), params)
    cols = ["n", "mean"]
    ks = range(cfg.k + 1) if cfg.k is not None else range(0)
    cols += [f"cdf_k{k}" for k in ks]
    surv = survival_table(max(ns), cfg.k, params) if cfg.k is not None else None
    rows = []
    for n in ns:
        row = [n, float(table[n])]
        row += [1.0 - float(surv[n, k]) for k in ks]
        rows.append(row)
    return render(cfg, cols, rows)


def cmd_dist(cfg: RunConfig) -> str:
    params = SplitParams(cfg.p)
    ns = _need_n(cfg, minimum=2)
    if len(ns) != 1:
        raise UsageError("dist needs a single --n")
    n = ns[0]
    if cfg.k is None:
        raise UsageError("dist needs --k")
    _check_k(cfg.k, K_CAP)
    x = cfg.x if cfg.x is not None else float(n)
    if x < 0:
        raise UsageError("--x must be >= 0")
    rows = [(k, cdf_exact(n, k, params), exact_cdf_dp(n, k, params), poisson_cdf(x, k, params))
            for k in range(cfg.k + 1)]
    notes = [f"n={n} poisson_x={x!r}"]
    return render(cfg, ("k", "cdf_exact", "cdf_dp", "poisson_cdf"), rows, notes)


def cmd_asymptotic(cfg: RunConfig) -> str:
    params = SplitParams(cfg.p)
    rows = []
    for n in _need_n(cfg, minimum=2):
        try:
            d = asymptotic_mean(n, params)
        except QuadratureError as exc:
            raise NumericalFailure(f"n={n}: {exc}") from exc
        rows.append((n, d.leading, d.constant, d.oscillation, d.predicted,
                     d.exact, d.residual, d.scaled_residual))
    cols = ("n", "leading", "constant", "oscillation", "predicted", "exact", "residual", "residual_n_beta")
    return render(cfg, cols, rows, [f"beta={residual_exponent(params)!r}"])


def cmd_mc(cfg: RunConfig) -> str:
    params = SplitParams(cfg.p)
    if cfg.x is not None or cfg.y is not None:
        if cfg.x is None or cfg.y is None or not (0.0 < cfg.x < cfg.y < 1.0):
            raise UsageError("decomposition check needs 0 < --x < --y < 1")
        c = mc_lemma_check(cfg.x, cfg.y, params, cfg.trials, cfg.seed, cfg.max_steps, cfg.workers)
        if c.diff.truncated_count:
            _warn(f"{c.diff.truncated_count} chains truncated at {cfg.max_steps} steps")
        cols = ("x", "y", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "diff", "diff_stderr",
                "independent_stderr", "deterministic", "trials", "truncated")
        row = (cfg.x, cfg.y, c.lhs.value, c.lhs.stderr, c.rhs.value, c.rhs.stderr, c.diff.value,
               c.diff.stderr, c.independent_stderr, c.deterministic, c.diff.trials, c.diff.truncated_count)
        return render(cfg, cols, [row])
    rows = []
    for n in _need_n(cfg, minimum=2):
        e = mc_mean_cost_via_tau(n, params, cfg.trials, cfg.seed, cfg.max_steps, cfg.workers)
        if e.truncated_count:
            _warn(f"n={n}: {e.truncated_count} chains truncated at {cfg.max_steps} steps")
        rows.append((n, e.value, e.stderr, e.trials, e.truncated_count,
                     float(exact_mean_table(n, params)[n])))
    return render(cfg, ("n", "tau_mean", "tau_stderr", "trials", "truncated", "exact"), rows)


def cmd_conjecture(cfg: RunConfig) -> str:
    params = SplitParams(cfg.p)
    xs = cfg.x_grid or ([cfg.x] if cfg.x is not None else default_xgrid())
    if any(not (0.0 < x < 1.0) for x in xs):
        raise UsageError("grid points must lie in (0, 1)")
    pts = mc_conjecture(xs, params, cfg.trials, cfg.seed, cfg.max_steps, cfg.workers)
    rows = []
    for pt in pts:
        if pt.truncated:
            _warn(f"x={pt.x}: {pt.truncated} chains truncated at {cfg.max_steps} steps")
        rows.append((pt.x, pt.log10_moment, pt.log10_moment_stderr, pt.mean_tau.value,
                     pt.mean_tau.stderr, pt.truncated, pt.trials, pt.seed, pt.max_tau,
                     pt.top_share, int(pt.caveat)))
    cols = ("x", "log10_moment", "moment_stderr_log10", "mean_tau", "tau_stderr", "truncated",
            "trials", "seed", "max_tau", "top_share", "caveat")
    print(PEAK_NOTE, file=sys.stderr)
    return render(cfg, cols, rows, [PEAK_NOTE])


def cmd_crossval(cfg: RunConfig) -> tuple[str, int]:
    results = run_checks(cfg.criteria, seed=cfg.seed, workers=cfg.workers)
    lines = [f"# version={__version__} command=crossval seed={cfg.seed}"]
    for r in results:
        lines.append(r.line())
        if cfg.verbose:
            lines.extend(f"    {d}" for d in r.details)
    failed = [r.number for r in results if not r.passed]
    lines.append(f"{len(results) - len(failed)}/{len(results)} passed"
                 + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return "\n".join(lines) + "\n", EXIT_CROSSVAL if failed else EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "dist": cmd_dist,
    "asymptotic": cmd_asymptotic,
    "mc": cmd_mc,
    "conjecture": cmd_conjecture,
}


def dispatch(cfg: RunConfig) -> tuple[str, int]:
    if cfg.command == "crossval":
        return cmd_crossval(cfg)
    return COMMANDS[cfg.command](cfg), EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text, status = dispatch(cfg)
    except (UsageError, ValueError) as exc:
        print(f"leader-election: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, ArithmeticError, RecursionError) as exc:
        print(f"leader-election: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
