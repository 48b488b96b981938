"""Wall-time sweep over the dispatch horizon length.

Each (N, method) point is solved ``repeats`` times and the median kept.
With a timeout every solve runs in a child process that is killed on
expiry; the point is then recorded as censored at the timeout value.
"""

from __future__ import annotations

import csv
import logging
import multiprocessing as mp
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from lisa.benders import run_benders
from lisa.pathway import make_pathway, solve_closed
from lisa.plotting import sweep_plot
from lisa.scenario_io import resolve_scenario

log = logging.getLogger(__name__)

METHODS = ("closed", "benders")


@dataclass
class BenchPoint:
    N: int
    method: str
    costs: str
    seconds: float  # median over the repeats, or the timeout when censored
    repeats: int
    censored: bool
    objective: float
    runs: str  # individual wall times, ';'-separated


def timed_solve(scenario: str, n: int, method: str, costs: str, n_pw: int | None, tol: float) -> tuple[float, float]:
    """Seconds spent solving (problem assembly excluded) and the objective."""
    s = resolve_scenario(scenario)
    if n != s.n_steps:
        s = s.truncated(n)
    problem = make_pathway(s, costs, n_pw)
    t0 = time.perf_counter()
    if method == "closed":
        sol = solve_closed(problem)
    elif method == "benders":
        sol, _ = run_benders(problem, eps=tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return time.perf_counter() - t0, sol.objective


def _child(conn, args):
    try:
        conn.send(("ok", timed_solve(*args)))
    except Exception as exc:  # reported to the parent, which re-raises
        conn.send(("error", f"{type(exc).__name__}: {exc}"))
    finally:
        conn.close()


def _run_limited(args, timeout: float) -> tuple[float, float] | None:
    ctx = mp.get_context("fork")
    recv, send = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_child, args=(send, args), daemon=True)
    proc.start()
    send.close()
    try:
        if not recv.poll(timeout):
            return None
        kind, payload = recv.recv()
    finally:
        if proc.is_alive():
            proc.kill()
        proc.join()
    if kind == "error":
        raise RuntimeError(payload)
    return payload


def run_point(scenario, n, method, costs, n_pw=None, tol=1e-4, repeats=3, timeout=None) -> BenchPoint:
    times, obj = [], float("nan")
    for _ in range(repeats):
        args = (str(scenario), n, method, costs, n_pw, tol)
        res = timed_solve(*args) if timeout is None else _run_limited(args, timeout)
        if res is None:
            log.info("bench N=%d %s: timeout after %.1f s", n, method, timeout)
            return BenchPoint(n, method, costs, float(timeout), len(times) + 1, True, obj, _fmt(times + [timeout]))
        times.append(res[0])
        obj = res[1]
        log.info("bench N=%d %s: %.3f s", n, method, res[0])
    return BenchPoint(n, method, costs, statistics.median(times), repeats, False, obj, _fmt(times))


def _fmt(times) -> str:
    return ";".join(f"{t:.6f}" for t in times)


def loglog_slopes(points: list[BenchPoint]) -> dict[str, float]:
    """Least-squares slope of log(seconds) over log(N) per method, uncensored points only."""
    out = {}
    for m in sorted({p.method for p in points}):
        pts = [p for p in points if p.method == m and not p.censored]
        if len({p.N for p in pts}) >= 2:
            out[m] = float(np.polyfit(np.log([p.N for p in pts]), np.log([p.seconds for p in pts]), 1)[0])
    return out


def run_sweep(
    scenario,
    sweep,
    methods=METHODS,
    costs: str = "learning",
    out: str | Path | None = None,
    n_pw: int | None = None,
    tol: float = 1e-4,
    repeats: int = 3,
    timeout: float | None = None,
) -> tuple[list[BenchPoint], dict[str, float]]:
    """Time every method at every N; writes bench.csv, slopes.csv and sweep.svg into ``out``."""
    sweep = sorted({int(n) for n in sweep})
    if len(sweep) < 2:
        raise ValueError("a sweep needs at least two horizon lengths")
    if min(sweep) < 2:
        raise ValueError("horizon lengths must be >= 2")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    points = [run_point(scenario, n, m, costs, n_pw, tol, repeats, timeout) for n in sweep for m in methods]
    slopes = loglog_slopes(points)
    if out is not None:
        write_bench(points, slopes, out)
    return points, slopes


def write_bench(points: list[BenchPoint], slopes: dict[str, float], out: str | Path):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    names = list(asdict(points[0])) if points else [f for f in BenchPoint.__dataclass_fields__]
    with open(out / "bench.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=names)
        w.writeheader()
        for p in points:
            row = asdict(p)
            row["seconds"] = repr(p.seconds)
            row["objective"] = repr(p.objective)
            w.writerow(row)
    with open(out / "slopes.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "loglog_slope"])
        for m, v in slopes.items():
            w.writerow([m, repr(v)])
    sweep_plot([asdict(p) for p in points], out / "sweep.svg", slopes)


def read_bench(path: str | Path) -> list[BenchPoint]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            BenchPoint(
                int(r["N"]), r["method"], r["costs"], float(r["seconds"]), int(r["repeats"]),
                r["censored"] == "True", float(r["objective"]), r["runs"],
            )
            for r in csv.DictReader(fh)
        ]
