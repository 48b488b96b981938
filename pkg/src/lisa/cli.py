"""Command-line front end: ``lisa validate|solve|bench|report``.

Exit codes: 0 ok, 2 schema or usage error, 3 semantic error,
4 infeasible problem, 5 Benders gap not closed within the iteration limit.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from lisa import __version__
from lisa.scenario import validate_scenario

EXIT_OK, EXIT_SCHEMA, EXIT_SEMANTIC, EXIT_INFEASIBLE, EXIT_GAP = 0, 2, 3, 4, 5
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("lisa")


def _err(msg: str):
    print(msg, file=sys.stderr)


def _setup_logging():
    level = os.environ.get("LISA_LOG", "error").strip().lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s")
    if level not in LOG_LEVELS:
        log.error("LISA_LOG=%r is not one of %s; using error", level, sorted(LOG_LEVELS))


def _load(ref: str, hours: int | None = None):
    """Scenario or an exit code, after schema and semantic checks."""
    from lisa.scenario_io import ProfileError, ScenarioFormatError, resolve_scenario

    try:
        s = resolve_scenario(ref)
    except ScenarioFormatError as exc:
        _err(f"schema error: {exc}")
        return EXIT_SCHEMA
    except (ProfileError, ValueError, KeyError) as exc:
        _err(f"invalid scenario: {exc}")
        return EXIT_SEMANTIC
    report = validate_scenario(s)
    if not report.ok:
        _err(f"invalid scenario:\n{report}")
        return EXIT_SEMANTIC
    if hours is not None and hours != s.n_steps:
        if hours > s.n_steps:
            _err(f"invalid scenario: --horizon-hours {hours} exceeds the {s.n_steps} profile steps")
            return EXIT_SEMANTIC
        s = s.truncated(hours)
    return s


def cmd_validate(args) -> int:
    s = _load(args.scenario)
    if isinstance(s, int):
        return s
    _err(f"{args.scenario}: ok ({len(s.nodes)} nodes, {len(s.components)} components, {s.n_steps} steps)")
    return EXIT_OK


def cmd_solve(args) -> int:
    from lisa.benders import run_benders
    from lisa.lp import INFEASIBLE
    from lisa.model import SolveError
    from lisa.pathway import make_pathway, solve_closed, solve_dispatch, solve_eacp
    from lisa.scenario_io import save_solution

    s = _load(args.scenario, args.horizon_hours)
    if isinstance(s, int):
        return s
    try:
        if args.mode == "dispatch":
            sol = solve_dispatch(s, args.year)
        elif args.mode == "eacp":
            sol = solve_eacp(s, args.year)
        else:
            problem = make_pathway(s, args.costs, args.npw)
            if args.method == "closed":
                sol = solve_closed(problem)
            else:
                sol, _ = run_benders(
                    problem, eps=args.tol, max_iter=args.max_iter, multi_cut=args.multi_cut, workers=args.workers
                )
    except SolveError as exc:
        _err(f"solve failed: {exc}")
        return EXIT_INFEASIBLE if exc.status == INFEASIBLE else 1
    except (ValueError, KeyError) as exc:
        _err(f"invalid scenario: {exc}")
        return EXIT_SEMANTIC
    save_solution(sol, args.out)
    print(f"objective {sol.objective!r} EUR")
    if sol.method == "benders":
        print(f"gap {sol.objective - sol.bound:.6g} EUR (relative {sol.gap:.3g}) after {sol.iterations} iterations")
    print(f"artifacts in {args.out}")
    if sol.status == "iteration_limit":
        _err("benders stopped at the iteration limit before closing the gap")
        return EXIT_GAP
    return EXIT_OK


def cmd_bench(args) -> int:
    from lisa.bench import run_sweep

    try:
        sweep = [int(v) for v in args.sweep.split(",") if v.strip()]
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    except ValueError:
        _err("--sweep takes comma-separated integers")
        return EXIT_SCHEMA
    s = _load(args.scenario)
    if isinstance(s, int):
        return s
    if max(sweep, default=0) > s.n_steps:
        _err(f"invalid sweep: {max(sweep)} exceeds the {s.n_steps} profile steps")
        return EXIT_SEMANTIC
    try:
        points, slopes = run_sweep(
            args.scenario, sweep, methods, args.costs, args.out, args.npw, args.tol, args.repeats, args.timeout
        )
    except ValueError as exc:
        _err(str(exc))
        return EXIT_SCHEMA
    for p in points:
        flag = " (timeout)" if p.censored else ""
        print(f"N={p.N:>5} {p.method:<8} {p.seconds:10.3f} s{flag}")
    for m, v in slopes.items():
        print(f"log-log slope {m}: {v:.3f}")
    print(f"artifacts in {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    from lisa.plotting import convergence_plot, investment_plot, learning_plot
    from lisa.scenario_io import ScenarioFormatError, load_solution

    try:
        sol = load_solution(args.solution)
    except ScenarioFormatError as exc:
        _err(f"cannot read solution: {exc}")
        return EXIT_SCHEMA
    out = Path(args.out)
    written = []
    if sol.log is not None:
        written.append(convergence_plot(sol.log.lower_bounds, sol.log.upper_bounds, out / "convergence.svg"))
    else:
        _err("notice: no benders_log.csv; convergence plot skipped")
    written.append(investment_plot(sol.years, sol.technology, out / "investments.svg"))
    if sol.curves:
        written.append(learning_plot(sol.curves, out / "learning.svg"))
    else:
        _err("notice: solution has no learning curves; overlay skipped")
    for p in written:
        print(p)
    return EXIT_OK


def _hours(v: str) -> int:
    n = int(v)
    if n < 2:
        raise argparse.ArgumentTypeError("horizon must be at least 2 hours")
    return n


def _positive(v: str) -> float:
    x = float(v)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lisa", description="Multi-energy system dispatch and investment pathways.")
    p.add_argument("--version", action="version", version=f"lisa {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("--scenario", required=True, help="path, or builtin:test_system / builtin:micro")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="solve a scenario and write solution artifacts")
    s.add_argument("--scenario", required=True)
    s.add_argument("--mode", choices=("dispatch", "eacp", "pathway"), default="pathway")
    s.add_argument("--method", choices=("closed", "benders"), default="closed")
    s.add_argument("--costs", choices=("linear", "learning"), default="linear")
    s.add_argument("--horizon-hours", type=_hours, default=None, help="dispatch steps per horizon (>= 2)")
    s.add_argument("--year", type=int, default=None, help="pathway year for dispatch/eacp modes")
    s.add_argument("--tol", type=_positive, default=1e-4, help="relative Benders gap")
    s.add_argument("--npw", type=int, default=None, help="breakpoints per learning curve")
    s.add_argument("--max-iter", type=int, default=1000)
    s.add_argument("--multi-cut", action="store_true", help="one Benders cut per horizon")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="time closed and Benders solves over horizon lengths")
    b.add_argument("--scenario", default="builtin:test_system")
    b.add_argument("--sweep", default="20,50,110,220,500")
    b.add_argument("--methods", default="closed,benders")
    b.add_argument("--costs", choices=("linear", "learning"), default="learning")
    b.add_argument("--npw", type=int, default=None)
    b.add_argument("--tol", type=_positive, default=1e-4)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--timeout", type=_positive, default=None, help="seconds per solve")
    b.add_argument("--out", default="bench")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="draw SVG figures from solution artifacts")
    r.add_argument("--solution", required=True)
    r.add_argument("--out", default="report")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "solve":
        if args.mode != "pathway" and (args.method == "benders" or args.costs == "learning"):
            parser.error("--method benders and --costs learning require --mode pathway")
        if args.npw is not None and args.npw < 3:
            parser.error("--npw must be at least 3")
        if args.workers < 1 or args.max_iter < 1:
            parser.error("--workers and --max-iter must be positive")
    if args.command == "bench" and args.repeats < 1:
        parser.error("--repeats must be positive")
    _setup_logging()
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
