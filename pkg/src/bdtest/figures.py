"""Figure rendering for experiment reports.

Rendered next to the delimited output by the ``experiment`` subcommand:
a soundness panel (measured single-shot rejection rates with their Wilson
intervals against the predicted lower bounds) and a query-scaling panel
(full-run query counts against the closed-form iteration budget).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ExperimentReport


def render_experiment_figures(report: ExperimentReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    p = _soundness_figure(report, out / "soundness_rates.png")
    if p is not None:
        paths.append(p)
    p = _query_scaling_figure(report, out / "query_scaling.png")
    if p is not None:
        paths.append(p)
    return paths


def _soundness_figure(report: ExperimentReport, path: Path) -> Path | None:
    rows = [
        r
        for r in report.rows
        if r.kind == "far" and r.rate is not None and r.predicted_bound is not None
    ]
    if not rows:
        return None
    eps = np.array([r.oracle_eps if r.oracle_eps is not None else r.epsilon for r in rows])
    rate = np.array([r.rate for r in rows])
    lo = np.array([r.wilson_lo for r in rows])
    hi = np.array([r.wilson_hi for r in rows])
    bound = np.array([r.predicted_bound for r in rows])

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    order = np.argsort(eps)
    ax.errorbar(
        eps[order],
        rate[order],
        yerr=np.vstack([(rate - lo)[order], (hi - rate)[order]]),
        fmt="o",
        capsize=3,
        label="measured single-shot rate",
    )
    ax.plot(eps[order], bound[order], "k--", marker=".", label="predicted lower bound")
    ax.set_xlabel("distance from the class")
    ax.set_ylabel("rejection rate")
    ax.set_title("Single-shot soundness")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _query_scaling_figure(report: ExperimentReport, path: Path) -> Path | None:
    rows = [
        r
        for r in report.rows
        if r.kind == "member" and r.queries is not None and r.verdict == "accept"
    ]
    if not rows:
        return None
    x = np.array([r.d / (r.epsilon**2 if r.tester == "l2" else r.epsilon) for r in rows])
    y = np.array([r.queries for r in rows], dtype=float)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(x, y, "o", label="full-run queries")
    if len(rows) >= 2 and np.ptp(x) > 0:
        slope, intercept = np.polyfit(x, y, 1)
        xs = np.linspace(x.min(), x.max(), 50)
        ax.plot(xs, slope * xs + intercept, "-", alpha=0.7,
                label=f"fit: {slope:.1f} per unit")
    ax.set_xlabel("dimension / proximity budget")
    ax.set_ylabel("point queries")
    ax.set_title("Query scaling on accepting runs")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
