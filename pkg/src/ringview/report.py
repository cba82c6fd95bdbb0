"""Experiment reports: MAE tables plus per-bin accuracy blocks and figures.

A report compares labeled evaluation runs (one EvalReport each). The
delimited outputs are the source of truth: a summary CSV/text table of
median angular error and accuracy entropy per configuration, and one
per-bin accuracy CSV per run. Alongside those, the same data is rendered
to PNG figures (a per-run accuracy-by-angle bar chart with its entropy in
the title, and a grouped MAE comparison), mirroring the histogram-style
diagnostics the per-bin numbers support.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InputError
from .metrics import EvalReport, write_report_bins_csv

_ACCURACY_BAR_COLOR = "#4878a8"
_MAE_BAR_COLOR = "#b05a4a"


@dataclass(frozen=True)
class RunResult:
    label: str
    report: EvalReport


def write_mae_table(runs: list[RunResult], out_dir: str | Path) -> tuple[Path, Path]:
    """Summary table as CSV (full precision) and aligned text."""
    if not runs:
        raise InputError("report needs at least one evaluation run")
    out_dir = Path(out_dir)
    csv_path = out_dir / "mae_table.csv"
    txt_path = out_dir / "mae_table.txt"

    with open(csv_path, "w", newline="") as fh:
        fh.write("label,median_angular_error_deg,accuracy_entropy,n_evaluated\n")
        for run in runs:
            rep = run.report
            fh.write(
                f"{run.label},{repr(rep.median_angular_error_deg)},"
                f"{repr(rep.accuracy_entropy)},{rep.n_evaluated}\n"
            )

    label_width = max(len("configuration"), max(len(r.label) for r in runs))
    with open(txt_path, "w") as fh:
        fh.write(f"{'configuration':<{label_width}}  {'mae_deg':>8}  {'entropy':>8}  {'n':>6}\n")
        for run in runs:
            rep = run.report
            fh.write(
                f"{run.label:<{label_width}}  {rep.median_angular_error_deg:>8.3f}  "
                f"{rep.accuracy_entropy:>8.4f}  {rep.n_evaluated:>6}\n"
            )
    return csv_path, txt_path


def write_per_bin_csvs(runs: list[RunResult], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    for run in runs:
        path = out_dir / f"{run.label}_bins.csv"
        write_report_bins_csv(run.report, path)
        paths.append(path)
    return paths


def _accuracy_figure(run: RunResult, path: Path) -> None:
    rep = run.report
    n_bins = rep.per_bin_accuracy.size
    width = 360.0 / n_bins
    centers = np.arange(n_bins) * width + width / 2.0
    acc = np.nan_to_num(rep.per_bin_accuracy, nan=0.0)

    fig, ax = plt.subplots(figsize=(8, 3))
    ax.bar(centers, acc, width=width * 0.9, color=_ACCURACY_BAR_COLOR)
    ax.set_xlim(0, 360)
    ax.set_ylim(0, 1.05)
    ax.set_xlabel("ground truth azimuth (deg)")
    ax.set_ylabel("accuracy")
    ax.set_title(f"{run.label}: accuracy by angle (entropy {rep.accuracy_entropy:.3f})")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _mae_figure(runs: list[RunResult], path: Path) -> None:
    labels = [run.label for run in runs]
    maes = [run.report.median_angular_error_deg for run in runs]
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(runs)), 3))
    ax.bar(np.arange(len(runs)), maes, color=_MAE_BAR_COLOR)
    ax.set_xticks(np.arange(len(runs)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("median angular error (deg)")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def write_figures(runs: list[RunResult], out_dir: str | Path) -> list[Path]:
    """Render the accuracy-by-angle and MAE-comparison figures to PNG."""
    out_dir = Path(out_dir)
    paths = []
    for run in runs:
        path = out_dir / f"{run.label}_accuracy.png"
        _accuracy_figure(run, path)
        paths.append(path)
    mae_path = out_dir / "mae_comparison.png"
    _mae_figure(runs, mae_path)
    paths.append(mae_path)
    return paths


def write_histogram_figure(
    histogram: np.ndarray, out_dir: str | Path, name: str = "label_histogram"
) -> Path:
    """Bar chart of a label histogram (the classic biased-dataset picture)."""
    histogram = np.asarray(histogram)
    n_bins = histogram.size
    width = 360.0 / n_bins
    centers = np.arange(n_bins) * width + width / 2.0
    path = Path(out_dir) / f"{name}.png"

    fig, ax = plt.subplots(figsize=(8, 3))
    ax.bar(centers, histogram, width=width * 0.9, color=_ACCURACY_BAR_COLOR)
    if histogram.sum() > 0:
        ax.axhline(histogram.sum() / n_bins, linestyle="--", color="gray", linewidth=1)
    ax.set_xlim(0, 360)
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("samples")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def generate_report(
    runs: list[RunResult], out_dir: str | Path, figures: bool = True
) -> list[Path]:
    """Write every report artifact; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, txt_path = write_mae_table(runs, out_dir)
    paths = [csv_path, txt_path]
    paths.extend(write_per_bin_csvs(runs, out_dir))
    if figures:
        paths.extend(write_figures(runs, out_dir))
    return paths
