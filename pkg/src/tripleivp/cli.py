"""Command-line front end.

Subcommands: solve, oracle, coeffs, table, bench, plot.  Exit codes: 0 on
success, 2 for input errors, 3 for numerical failures.

Problem files are INI-style::

    [problem]
    f     = sin(x+y+z)
    y0    = 0
    y1    = x
    z0    = 0
    z1    = x+y
    x0    = 1
    x_end = 5
    R     = 8*sin(4*x) - 6*sin(2*x) + sin(x)   # optional closed-form W'''

    [run]
    delta = 1e-6        # optional tolerance
    h0    = 0.01        # optional pilot step
    order = 4           # optional extrapolation order
    quad_tol = 1e-10    # optional quadrature tolerance
"""
from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__, kernels
from .control import DEFAULT_PILOT_STEP, estimate_a4_bar, select_stepsize, solve_with_tolerance
from .errors import InputError, NumericalError, ProblemFileError, RoundoffFloor
from .expr import parse
from .ivp import euler_solve
from .leibniz import LeibnizEvaluator
from .problem import TripleIntegralProblem, validate
from .quad import DEFAULT, ORACLE_DEFAULT, QuadConfig, integrate3d_oracle
from .report import fmt, line_plot_svg, to_csv
from .richardson import (
    aligned_levels, coefficients, combine, convergence_table, extrapolate, format_fraction, step_count,
)

log = logging.getLogger("tripleivp")

REQUIRED = ("f", "y0", "y1", "z0", "z1", "x0", "x_end")
OPTIONAL_PROBLEM = ("R",)
RUN_KEYS = ("delta", "h0", "order", "quad_tol")


@dataclass(frozen=True)
class RunOptions:
    delta: float | None = None
    h0: float | None = None
    order: int | None = None
    quad_tol: float | None = None


@dataclass(frozen=True)
class ProblemFile:
    problem: TripleIntegralProblem
    run: RunOptions


def _float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ProblemFileError(f"key {key!r}: expected a number, got {text!r}") from None


def parse_problem_text(text: str, source="<problem>") -> ProblemFile:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str  # keep "R" distinct
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ProblemFileError(f"{source}: {exc}") from None
    for section in cp.sections():
        if section not in ("problem", "run"):
            raise ProblemFileError(f"{source}: unknown section [{section}]")
    if not cp.has_section("problem"):
        raise ProblemFileError(f"{source}: missing [problem] section")
    prob = dict(cp.items("problem"))
    run = dict(cp.items("run")) if cp.has_section("run") else {}
    for key in prob:
        if key not in REQUIRED + OPTIONAL_PROBLEM:
            raise ProblemFileError(f"{source}: unknown key {key!r} in [problem]")
    for key in run:
        if key not in RUN_KEYS:
            raise ProblemFileError(f"{source}: unknown key {key!r} in [run]")
    for key in REQUIRED:
        if key not in prob or not prob[key].strip():
            raise ProblemFileError(f"{source}: missing required key {key!r}")

    exprs = {}
    for key in ("f", "y0", "y1", "z0", "z1", "R"):
        if key in prob:
            try:
                exprs[key] = parse(prob[key])
            except InputError as exc:
                raise ProblemFileError(f"{source}: key {key!r}: {exc}") from None
    problem = TripleIntegralProblem(
        f=exprs["f"], y0=exprs["y0"], y1=exprs["y1"], z0=exprs["z0"], z1=exprs["z1"],
        x0=_float("x0", prob["x0"]), x_end=_float("x_end", prob["x_end"]), r_closed=exprs.get("R"),
    )
    validate(problem)

    order = None
    if "order" in run:
        try:
            order = int(run["order"])
        except ValueError:
            raise ProblemFileError(f"key 'order': expected an integer, got {run['order']!r}") from None
    opts = RunOptions(
        delta=_float("delta", run["delta"]) if "delta" in run else None,
        h0=_float("h0", run["h0"]) if "h0" in run else None,
        order=order,
        quad_tol=_float("quad_tol", run["quad_tol"]) if "quad_tol" in run else None,
    )
    return ProblemFile(problem, opts)


def load_problem_file(path) -> ProblemFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read problem file: {exc}") from None
    return parse_problem_text(text, source=str(path))


def _float_list(text, name):
    items = [t.strip() for t in (text or "").split(",") if t.strip()]
    if not items:
        raise InputError(f"{name} is empty")
    try:
        return [float(t) for t in items]
    except ValueError:
        raise InputError(f"{name}: cannot parse {text!r} as numbers") from None


class Context:
    """Per-invocation state: parsed file, evaluator and output handling."""

    def __init__(self, args):
        self.args = args
        if not args.problem:
            raise InputError("--problem FILE is required")
        self.pf = load_problem_file(args.problem)
        self.problem = self.pf.problem
        tol = self.pf.run.quad_tol
        self.cfg = QuadConfig(tol=tol) if tol is not None else DEFAULT
        self.oracle_cfg = QuadConfig(tol=tol) if tol is not None else ORACLE_DEFAULT
        self.ev = LeibnizEvaluator(self.problem, cfg=self.cfg)
        self.out = Path(args.out) if args.out else None
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)

    @property
    def order(self):
        return self.args.order or self.pf.run.order or 4

    def pilot_steps(self):
        h0 = self.pf.run.h0 or DEFAULT_PILOT_STEP
        if not h0 > 0:
            raise InputError("h0 must be positive")
        return max(1, math.ceil(self.problem.span / h0))

    def oracle(self):
        return integrate3d_oracle(self.problem, self.oracle_cfg)

    def reference(self):
        if self.args.reference is not None:
            return self.args.reference
        return self.oracle()

    def emit(self, name, text, stdout=True):
        if self.out is not None:
            (self.out / name).write_text(text, encoding="utf-8", newline="\n")
        elif stdout:
            sys.stdout.write(text)

    def say(self, line):
        if not self.args.quiet:
            print(line)


def cmd_solve(args):
    ctx = Context(args)
    p = ctx.problem
    delta = args.delta if args.delta is not None else ctx.pf.run.delta
    use_tolerance = args.steps is None and delta is not None
    lines = [f"backend = {kernels.BACKEND}"]
    if use_tolerance:
        rep = solve_with_tolerance(p, delta, n_pilot=ctx.pilot_steps(), oracle=args.oracle,
                                   iterate=args.iterate, ev=ctx.ev)
        res = rep.result
        lines += [
            "mode = tolerance",
            f"delta = {fmt(delta)}",
            f"h_pilot = {fmt(rep.h_pilot)}",
        ]
        if rep.estimate is not None:
            est = rep.estimate
            lines += [f"max_abs_a4bar = {fmt(est.max_abs_a4bar)}", f"a4 = {fmt(est.a4)}"]
            ctx.emit("a4bar.csv", to_csv(("x", "a4bar"), est.per_node_a4bar), stdout=False)
        lines += [
            f"roundoff_floor = {str(rep.roundoff_floor).lower()}",
            f"H = {fmt(rep.H)}",
            f"n = {rep.n}",
            f"h_final = {fmt(rep.h_final)}",
            "order = 4",
            f"w_final = {fmt(rep.w_final)}",
        ]
        if rep.error_vs_oracle is not None:
            lines.append(f"oracle_error = {fmt(rep.error_vs_oracle)}")
    else:
        n = args.steps if args.steps is not None else ctx.pilot_steps()
        if n < 1:
            raise InputError("--steps must be at least 1")
        s = ctx.order
        coefficients(s)
        ic = ctx.ev.initial_conditions()
        res = extrapolate(ctx.ev, ic, p.x0, p.x_end, n, s)
        w = res.final
        lines += ["mode = steps", f"n = {n}", f"h_final = {fmt(res.base_h)}", f"order = {s}", f"w_final = {fmt(w)}"]
        if args.oracle:
            lines.append(f"oracle_error = {fmt(abs(w - ctx.oracle()))}")
    if res is not None:
        header = ["x"] + [f"k{k}" for k in range(res.order)] + [f"m{res.order}"]
        rows = [[x, *k, m] for x, k, m in res.per_node]
        ctx.emit("nodes.csv", to_csv(header, rows), stdout=False)
    summary = "\n".join(lines) + "\n"
    ctx.emit("summary.txt", summary, stdout=False)
    if not args.quiet:
        sys.stdout.write(summary)
    return 0


def cmd_oracle(args):
    ctx = Context(args)
    t0 = time.perf_counter()
    value = ctx.oracle()
    elapsed = time.perf_counter() - t0
    text = f"oracle = {fmt(value)}\nquad_tol = {fmt(ctx.oracle_cfg.tol)}\nseconds = {elapsed:.3f}\n"
    ctx.emit("oracle.txt", text, stdout=False)
    sys.stdout.write(text)
    return 0


def cmd_coeffs(args):
    s = args.order_pos if args.order_pos is not None else (args.order or 4)
    text = ", ".join(format_fraction(d) for d in coefficients(s)) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"coeffs_{s}.txt").write_text(text, encoding="utf-8", newline="\n")
    sys.stdout.write(text)
    return 0


def cmd_table(args):
    if args.h_list is None and args.delta_list is None:
        raise InputError("table needs --h-list or --delta-list")
    ctx = Context(args)
    p = ctx.problem
    ic = ctx.ev.initial_conditions()
    if args.h_list is not None:
        hs = _float_list(args.h_list, "--h-list")
        for h in hs:
            step_count(h, p.span)
        ref = ctx.reference()
        tab = convergence_table(ctx.ev, ic, p.x0, p.x_end, hs, orders=(2, 3, 4), reference=ref)
        rows = [[r.h, r.euler, r.m[2], r.m[3], r.m[4], r.err_euler, r.err_m[4]] for r in tab.rows]
        if tab.slopes:
            sl = tab.slopes
            rows.append(["slope", sl["euler"], sl[2], sl[3], sl[4], None, None])
        ctx.emit("convergence.csv", to_csv(("h", "euler", "m2", "m3", "m4", "err_euler", "err_m4"), rows))
        ctx.say(f"# reference = {fmt(ref)}")
    if args.delta_list is not None:
        deltas = _float_list(args.delta_list, "--delta-list")
        try:
            est, _ = estimate_a4_bar(ctx.ev, ic, p.x0, p.x_end, ctx.pilot_steps())
        except RoundoffFloor as exc:
            est = exc.estimate
        rows = []
        for d in deltas:
            H, n, h = select_stepsize(d, est.max_abs_a4bar, p.x0, p.x_end)
            rows.append([d, H, n, h])
        ctx.emit("stepsizes.csv", to_csv(("delta", "H", "n", "h"), rows))
        ctx.say(f"# max_abs_a4bar = {fmt(est.max_abs_a4bar)} (pilot h = {fmt(est.h)})")
    return 0


def _best_time(fn, repeats):
    best = math.inf
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def bench_rows(ev, ic, x0, x_end, hs, reference, repeats=5):
    """(h, euler_sec, euler_err, rich_sec, rich_err) per step size; M4 for Richardson."""
    d = coefficients(4)
    rows = []
    for h in hs:
        n = step_count(h, x_end - x0)

        def euler():
            return euler_solve(ev, ic, x0, x_end, n).w[-1]

        def rich():
            return combine(aligned_levels(ev, ic, x0, x_end, n, 4), d)[-1]

        te, we = _best_time(euler, repeats)
        tr, wr = _best_time(rich, repeats)
        rows.append([h, te, abs(we - reference), tr, abs(wr - reference)])
    return rows


def cmd_bench(args):
    if args.h_list is None:
        raise InputError("bench needs --h-list")
    ctx = Context(args)
    p = ctx.problem
    hs = _float_list(args.h_list, "--h-list")
    for h in hs:
        step_count(h, p.span)
    ref = ctx.reference()
    ic = ctx.ev.initial_conditions()
    rows = bench_rows(ctx.ev, ic, p.x0, p.x_end, hs, ref, repeats=args.repeats)
    ctx.emit("bench.csv", to_csv(("h", "euler_sec", "euler_err", "rich_sec", "rich_err"), rows))
    ctx.say(f"# backend = {kernels.BACKEND}, reference = {fmt(ref)}")
    return 0


def cmd_plot(args):
    if args.steps is None:
        raise InputError("plot needs --steps N")
    if args.steps < 1:
        raise InputError("--steps must be at least 1")
    ctx = Context(args)
    p = ctx.problem
    ic = ctx.ev.initial_conditions()
    res = extrapolate(ctx.ev, ic, p.x0, p.x_end, args.steps, 4)
    rows = [[x, e, m] for x, e, m in zip(res.xs, res.euler, res.m_s)]
    ctx.emit("curves.csv", to_csv(("x", "euler_w", "richardson_m4"), rows))
    svg = line_plot_svg(res.xs, {"Euler": res.euler, "Richardson M4": res.m_s},
                        title=f"W(x), h = {res.base_h:.4g}")
    if ctx.out is not None:
        (ctx.out / "curves.svg").write_text(svg, encoding="utf-8", newline="\n")
    gap = max(abs(e - m) for _, e, m in rows)
    ctx.say(f"# max |euler - m4| = {fmt(gap)}")
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "coeffs": cmd_coeffs,
    "table": cmd_table,
    "bench": cmd_bench,
    "plot": cmd_plot,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", metavar="FILE", help="problem file (INI format)")
    common.add_argument("--out", metavar="DIR", help="write CSV/SVG/text artifacts into DIR")
    common.add_argument("--oracle", action="store_true", help="cross-check against nested quadrature")
    common.add_argument("--steps", type=int, metavar="N", help="base step count (fixed-step mode)")
    common.add_argument("--order", type=int, metavar="S", help="extrapolation order")
    common.add_argument("--delta", type=float, metavar="D", help="error tolerance")
    common.add_argument("--h-list", metavar="CSV", help="comma-separated step sizes")
    common.add_argument("--delta-list", metavar="CSV", help="comma-separated tolerances")
    common.add_argument("--iterate", action="store_true", help="repeat step selection until h settles")
    common.add_argument("--reference", type=float, metavar="W", help="known exact value (default: oracle)")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="tripleivp", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="W(x_end) by Euler + Richardson")
    sub.add_parser("oracle", parents=[common], help="W(x_end) by nested adaptive quadrature")
    cp = sub.add_parser("coeffs", parents=[common], help="exact extrapolation weights")
    cp.add_argument("order_pos", nargs="?", type=int, metavar="ORDER")
    sub.add_parser("table", parents=[common], help="convergence or tolerance/step tables")
    bp = sub.add_parser("bench", parents=[common], help="timing and error of Euler vs M4")
    bp.add_argument("--repeats", type=int, default=5)
    sub.add_parser("plot", parents=[common], help="Euler and M4 curves as CSV + SVG")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
