"""Report figures rendered with matplotlib (Agg) next to the CSV artifacts.

Each report-producing subcommand saves one PNG per result object so a run's
numbers can be eyeballed without postprocessing. These complement the
deterministic SVG path (`svgplot`): the SVGs are diffable artifacts built
from CSVs; the PNGs are conventional raster summaries of result objects.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .evaluation import EvalReport, GridResult, SweepResult  # noqa: E402
from .series import TimeSeries  # noqa: E402


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def save_eval_figure(report: EvalReport, path, *, title: str = "evaluation",
                     ) -> Path:
    """Per-seed relative errors with the ensemble median highlighted."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    runs = report.per_seed
    if runs:
        seeds = [run.seed for run in runs]
        errors = [run.relative_error if run.valid else math.nan for run in runs]
        ax.plot(seeds, errors, "o", color="tab:blue", label="per-seed error")
        failed = [run.seed for run in runs if not run.valid]
        for seed in failed:
            ax.axvline(seed, color="tab:red", alpha=0.25, lw=4)
        if failed:
            ax.plot([], [], color="tab:red", alpha=0.4, lw=4,
                    label=f"failed seeds ({len(failed)})")
        if report.relative_error is not None:
            flag = "" if report.median_valid else " (INVALID: <half valid)"
            ax.axhline(report.relative_error, color="tab:green", ls="--",
                       label=f"median = {report.relative_error:.3g}{flag}")
        ax.set_xlabel("seed")
    else:
        ax.bar([0], [report.relative_error], color="tab:blue")
        ax.set_xticks([0])
        ax.set_xticklabels(["deterministic run"])
    ax.set_ylabel("relative error of time-averaged acoustic energy")
    ax.set_title(f"{title}: reference average = {report.reference_average:.4f}")
    if runs:
        ax.set_yscale("log")
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_sweep_figure(result: SweepResult, path) -> Path:
    """Median error vs resolved model order, per-seed values behind it."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    orders = list(result.reports)
    for ng, report in result.reports.items():
        errors = [run.relative_error for run in report.per_seed if run.valid]
        ax.plot([ng] * len(errors), errors, "o", color="tab:blue", alpha=0.35,
                ms=4)
    medians = [result.reports[ng].relative_error for ng in orders]
    shown = [(ng, med) for ng, med in zip(orders, medians) if med is not None]
    if shown:
        ax.plot([s[0] for s in shown], [s[1] for s in shown], "s-",
                color="tab:green", label="median over valid seeds")
    for ng in orders:
        report = result.reports[ng]
        if not report.median_valid:
            ax.annotate("invalid", (ng, report.relative_error or 1.0),
                        color="tab:red", fontsize=8, ha="center")
    ax.set_yscale("log")
    ax.set_xlabel("modes resolved by the physical model")
    ax.set_ylabel("relative error of time-averaged acoustic energy")
    ax.set_title("hybrid network error vs model order")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_grid_figure(result: GridResult, path) -> Path:
    """Objective of every grid cell, best cell marked."""
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    cells = result.cells
    index = np.arange(len(cells))
    values = [cell.objective for cell in cells]
    finite = [v if math.isfinite(v) else math.nan for v in values]
    ax.plot(index, finite, "o-", color="tab:blue", label="objective")
    for i, cell in enumerate(cells):
        if not math.isfinite(cell.objective):
            ax.axvline(i, color="tab:red", alpha=0.3, lw=4)
    best_index = cells.index(result.best_cell)
    ax.plot([best_index], [result.best_cell.objective], "*",
            color="tab:green", ms=16, label="selected")
    ax.set_xticks(index)
    ax.set_xticklabels(
        [f"{c.sigma_in:g}\n{c.rho:g}\n{c.gamma:g}" for c in cells],
        fontsize=7,
    )
    ax.set_xlabel("cell (sigma_in / rho / gamma)")
    ax.set_ylabel("objective")
    ax.set_yscale("log")
    ax.set_title("hyperparameter grid")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_trajectory_figure(series: TimeSeries, columns, path, *,
                           labels: Optional[list[str]] = None,
                           truth: Optional[TimeSeries] = None,
                           title: str = "trajectory") -> Path:
    """Selected state components over time, optionally against the truth."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    times = series.times
    for k, column in enumerate(columns):
        label = labels[k] if labels else f"column {column}"
        ax.plot(times, series.states[:, column], lw=0.8, label=label)
    if truth is not None:
        for k, column in enumerate(columns):
            label = labels[k] if labels else f"column {column}"
            ax.plot(truth.times, truth.states[:, column], lw=0.8, ls="--",
                    alpha=0.6, label=f"{label} (truth)")
    ax.set_xlabel("time")
    ax.set_ylabel("state")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)
