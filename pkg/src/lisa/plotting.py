"""Static SVG figures for solutions and benchmarks.

Figures are built on bare ``Figure`` objects (no pyplot state), and the SVG
writer gets a fixed hash salt and no date, so identical input gives
byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from lisa.learning import LearningCurve, cumulative_cost, interpolate

RC = {
    "svg.hashsalt": "lisa",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}
BN = 1e9


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(RC):
        FigureCanvasSVG(fig)
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def _figure(w=6.0, h=3.6) -> Figure:
    with matplotlib.rc_context(RC):
        return Figure(figsize=(w, h))


def convergence_plot(lower, upper, path, title="Benders convergence") -> Path:
    """LB and best UB (bn EUR) against the iteration count."""
    lower = np.asarray(lower, dtype=float) / BN
    upper = np.asarray(upper, dtype=float) / BN
    it = np.arange(1, len(lower) + 1)
    fig = _figure()
    with matplotlib.rc_context(RC):
        ax = fig.add_subplot()
        ax.plot(it, upper, "-o", ms=3, label="upper bound")
        ax.plot(it, lower, "-s", ms=3, label="lower bound")
        if len(it):
            # the lower bound of the first iterations can sit far below; keep the tail readable
            lo = lower[np.isfinite(lower)]
            hi = upper[np.isfinite(upper)]
            if len(lo) and len(hi):
                top = hi.max()
                bottom = np.percentile(lo, 10) if len(lo) > 3 else lo.min()
                pad = 0.05 * max(top - bottom, abs(top) * 1e-6)
                ax.set_ylim(bottom - pad, top + pad)
            k = len(it)
            if np.isfinite(upper[-1]) and abs(upper[-1] - lower[-1]) <= 1e-4 * max(1.0, abs(upper[-1])):
                ax.annotate(f"LB = UB at iteration {k}", (k, upper[-1]), textcoords="offset points",
                            xytext=(-10, 12), ha="right")
        ax.set_xlabel("iteration")
        ax.set_ylabel("total cost / bn EUR")
        ax.set_title(title)
        ax.legend(loc="best")
        fig.tight_layout()
    return _save(fig, path)


def investment_plot(years, technology: dict[str, np.ndarray], path, title="Capacity added per horizon") -> Path:
    """Grouped bars, GW per technology and horizon; empty input draws an empty axis."""
    years = [str(y) for y in years]
    techs = list(technology)
    fig = _figure()
    with matplotlib.rc_context(RC):
        ax = fig.add_subplot()
        x = np.arange(len(years))
        n = max(len(techs), 1)
        width = 0.8 / n
        for i, t in enumerate(techs):
            gw = np.asarray(technology[t], dtype=float) / 1000.0
            ax.bar(x - 0.4 + width * (i + 0.5), gw, width, label=t)
        ax.set_xticks(x, years)
        ax.set_ylabel("GW")
        ax.set_title(title)
        if techs:
            ax.legend(loc="best", fontsize=7)
        fig.tight_layout()
    return _save(fig, path)


def learning_plot(curves: dict[str, dict], path, title="Cumulative investment cost") -> Path:
    """Exact cumulative cost curve against its piecewise-linear interpolant, one panel per technology."""
    techs = list(curves)
    fig = _figure(4.0 * max(len(techs), 1), 3.4)
    with matplotlib.rc_context(RC):
        if not techs:
            ax = fig.add_subplot()
            ax.set_title(title)
        for i, t in enumerate(techs):
            d = curves[t]
            ax = fig.add_subplot(1, len(techs), i + 1)
            y, v = np.asarray(d["y"], dtype=float), np.asarray(d["values"], dtype=float)
            P = np.linspace(y[0], y[-1], 200)
            if d.get("c0") is not None:
                curve = LearningCurve(d["c0"], d["p0"], d["r"], n_pw=max(len(y), 2))
                ax.plot(P, cumulative_cost(curve, P), "-", label="curve")
            ax.plot(P, interpolate(y, v, P), "--", label="piecewise")
            ax.plot(y, v, "o", ms=3, label="breakpoints")
            ax.set_xlabel("cumulative additions / GW")
            ax.set_ylabel("bn EUR")
            ax.set_title(t)
            ax.legend(loc="best", fontsize=7)
        fig.suptitle(title)
        fig.tight_layout()
    return _save(fig, path)


def sweep_plot(rows, path, slopes: dict[str, float] | None = None, title="Solve time against horizon length") -> Path:
    """Log-log wall time against N per method.

    ``rows`` are dicts with ``method``, ``N``, ``seconds`` and ``censored``;
    censored points (timeouts) are drawn hollow at the timeout value.
    """
    fig = _figure()
    with matplotlib.rc_context(RC):
        ax = fig.add_subplot()
        methods = sorted({r["method"] for r in rows})
        any_censored = False
        for k, m in enumerate(methods):
            pts = sorted((r for r in rows if r["method"] == m), key=lambda r: r["N"])
            color = f"C{k}"
            label = m if not slopes or m not in slopes else f"{m} (slope {slopes[m]:.2f})"
            ok = [r for r in pts if not r["censored"]]
            ax.plot([r["N"] for r in ok], [r["seconds"] for r in ok], "-o", color=color, ms=4, label=label)
            cens = [r for r in pts if r["censored"]]
            if cens:
                any_censored = True
                ax.plot([r["N"] for r in cens], [r["seconds"] for r in cens], "o", mfc="none", color=color, ms=6)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("dispatch horizon N / h")
        ax.set_ylabel("wall time / s")
        ax.set_title(title)
        if any_censored:
            ax.text(0.02, 0.96, "hollow: timeout (censored)", transform=ax.transAxes, va="top", fontsize=7)
        if methods:
            ax.legend(loc="lower right")
        fig.tight_layout()
    return _save(fig, path)
