"""Circular evaluation: median angular error, per-bin accuracy, entropy.

All errors are measured along the ring: err(a, b) = min(|a-b| mod 360,
360 - |a-b| mod 360), in [0, 180]. Per-bin accuracy splits the circle into
B equal ground-truth ranges (default 36 bins of 10 degrees) and reports,
for each range, the fraction of predictions within ``correct_within``
circular degrees of their ground truth. Ranges that received no test
samples are reported as NaN and excluded from the entropy.

The accuracy entropy treats the per-bin accuracies as an unnormalized
distribution: q_b = acc_b / sum(acc), H = -sum q_b ln q_b (natural log,
0 ln 0 := 0). H is maximal, ln(#included bins), exactly when accuracy is
uniform across bins; low H flags a model that only works near the angles
it was trained on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .manifest import DatasetManifest

DEFAULT_EVAL_BINS = 36
DEFAULT_CORRECT_WITHIN_DEG = 10.0


def circular_error_deg(pred_deg, gt_deg):
    """Absolute circular difference in degrees, elementwise, in [0, 180]."""
    delta = np.abs(np.asarray(pred_deg, dtype=float) - np.asarray(gt_deg, dtype=float)) % 360.0
    return np.minimum(delta, 360.0 - delta)


def median_angular_error(pred_deg, gt_deg) -> float:
    """Median circular error; even counts average the two middle values."""
    pred = np.atleast_1d(np.asarray(pred_deg, dtype=float))
    gt = np.atleast_1d(np.asarray(gt_deg, dtype=float))
    if pred.shape != gt.shape:
        raise InputError("prediction and ground-truth lists must have equal length")
    if pred.size == 0:
        raise InputError("cannot take the median of zero errors")
    return float(np.median(circular_error_deg(pred, gt)))


@dataclass(frozen=True)
class BinAccuracy:
    """Per-ground-truth-bin accuracy (NaN where a bin has no samples)."""

    accuracy: np.ndarray
    counts: np.ndarray

    @property
    def n_bins(self) -> int:
        return self.accuracy.size


def accuracy_by_bin(
    pred_deg,
    gt_deg,
    n_bins: int = DEFAULT_EVAL_BINS,
    correct_within: float = DEFAULT_CORRECT_WITHIN_DEG,
) -> BinAccuracy:
    """Fraction of correct predictions per ground-truth angle range.

    A prediction is correct iff its circular error is <= correct_within
    degrees. Ground-truth bin b covers [b*360/B, (b+1)*360/B).
    """
    if n_bins < 1 or 360 % n_bins != 0:
        raise InputError(f"n_bins must divide 360, got {n_bins}")
    pred = np.atleast_1d(np.asarray(pred_deg, dtype=float))
    gt = np.atleast_1d(np.asarray(gt_deg, dtype=float))
    if pred.shape != gt.shape:
        raise InputError("prediction and ground-truth lists must have equal length")

    width = 360.0 / n_bins
    gt_bins = (np.floor((gt % 360.0) / width).astype(int)) % n_bins
    correct = circular_error_deg(pred, gt) <= correct_within

    counts = np.bincount(gt_bins, minlength=n_bins)
    hits = np.bincount(gt_bins, weights=correct.astype(float), minlength=n_bins)
    accuracy = np.full(n_bins, np.nan)
    occupied = counts > 0
    accuracy[occupied] = hits[occupied] / counts[occupied]
    return BinAccuracy(accuracy=accuracy, counts=counts)


def accuracy_entropy(per_bin_accuracy) -> float:
    """Entropy (nats) of the normalized per-bin accuracy distribution."""
    acc = np.asarray(per_bin_accuracy, dtype=float)
    acc = acc[~np.isnan(acc)]
    if acc.size == 0:
        raise InputError("no occupied bins to take entropy over")
    if np.any(acc < 0):
        raise InputError("accuracies must be non-negative")
    total = acc.sum()
    if total <= 0:
        raise InputError("all per-bin accuracies are zero")
    q = acc / total
    positive = q > 0
    return float(-(q[positive] * np.log(q[positive])).sum())


def label_histogram(manifest: DatasetManifest, n_bins: int = DEFAULT_EVAL_BINS) -> np.ndarray:
    """Counts of manifest labels per angle range; sums to len(manifest)."""
    if n_bins < 1 or 360 % n_bins != 0:
        raise InputError(f"n_bins must divide 360, got {n_bins}")
    width = 360.0 / n_bins
    counts = np.zeros(n_bins, dtype=int)
    for row in manifest:
        b = int(math.floor((row.azimuth_deg % 360.0) / width)) % n_bins
        counts[b] += 1
    return counts


@dataclass(frozen=True)
class EvalReport:
    median_angular_error_deg: float
    per_bin_accuracy: np.ndarray
    per_bin_counts: np.ndarray
    accuracy_entropy: float
    n_evaluated: int
    correct_within_deg: float


def evaluate(
    pred_deg,
    gt_deg,
    n_bins: int = DEFAULT_EVAL_BINS,
    correct_within: float = DEFAULT_CORRECT_WITHIN_DEG,
) -> EvalReport:
    """Full circular evaluation of predicted vs ground-truth azimuths."""
    pred = np.atleast_1d(np.asarray(pred_deg, dtype=float))
    bins = accuracy_by_bin(pred, gt_deg, n_bins=n_bins, correct_within=correct_within)
    return EvalReport(
        median_angular_error_deg=median_angular_error(pred, gt_deg),
        per_bin_accuracy=bins.accuracy,
        per_bin_counts=bins.counts,
        accuracy_entropy=accuracy_entropy(bins.accuracy),
        n_evaluated=pred.size,
        correct_within_deg=correct_within,
    )


def write_report_text(report: EvalReport, path: str | Path) -> None:
    """One key per line; the per-bin vector goes in the companion CSV."""
    with open(path, "w") as fh:
        fh.write(f"median_angular_error_deg: {repr(report.median_angular_error_deg)}\n")
        fh.write(f"accuracy_entropy: {repr(report.accuracy_entropy)}\n")
        fh.write(f"n_evaluated: {report.n_evaluated}\n")
        fh.write(f"n_bins: {report.per_bin_accuracy.size}\n")
        fh.write(f"correct_within_deg: {repr(report.correct_within_deg)}\n")


def write_report_bins_csv(report: EvalReport, path: str | Path) -> None:
    """Per-bin accuracy CSV; empty accuracy field marks a bin with no samples."""
    n_bins = report.per_bin_accuracy.size
    width = 360.0 / n_bins
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_index", "bin_start_deg", "accuracy", "count"])
        for b in range(n_bins):
            acc = report.per_bin_accuracy[b]
            writer.writerow(
                [
                    b,
                    repr(b * width),
                    "" if np.isnan(acc) else repr(float(acc)),
                    int(report.per_bin_counts[b]),
                ]
            )


def read_report_text(path: str | Path) -> dict:
    """Parse the key-per-line report format back into a dict."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"report not found: {path}")
    values: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, raw = line.partition(":")
            key = key.strip()
            raw = raw.strip()
            values[key] = int(raw) if key in ("n_evaluated", "n_bins") else float(raw)
    return values


def read_report_bins_csv(path: str | Path) -> BinAccuracy:
    path = Path(path)
    if not path.exists():
        raise InputError(f"per-bin CSV not found: {path}")
    acc = []
    counts = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["bin_index", "bin_start_deg", "accuracy", "count"]:
            raise InputError(f"bad per-bin CSV header in {path}: {header}")
        for record in reader:
            acc.append(float("nan") if record[2] == "" else float(record[2]))
            counts.append(int(record[3]))
    return BinAccuracy(accuracy=np.array(acc), counts=np.array(counts))
