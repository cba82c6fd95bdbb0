"""Weighted SoftMax cross-entropy with analytic forward and backward passes.

For a batch of N logit rows z with ground-truth bins l_n and a weight
matrix W, the loss is

    E = -(1/N) sum_n sum_k W[l_n, k] * log p_{n,k},

the plain cross-entropy being the special case W = I. Because W can put
mass on classes whose probability saturates toward zero, log p is always
computed through a shifted log-sum-exp, never as log(softmax(z)).

A non-identity W makes zero loss unattainable: the per-row minimum over the
probability simplex sits at p_k = w_k / sum(w) with value
-sum_k w_k log(w_k / sum(w)) > 0. ``min_loss`` computes that floor, and the
analytic gradient is zero exactly there.

Gradient convention: ``weighted_softmax_gradient`` returns per-example rows
dE_n/dz; the batch gradient dE/dz is that matrix divided by N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circular import WeightMatrix
from .errors import InputError


@dataclass(frozen=True)
class LogitsBatch:
    """N x K pre-SoftMax scores plus the N ground-truth bin labels."""

    z: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if z.ndim != 2:
            raise InputError(f"logits must be 2-D, got shape {z.shape}")
        if labels.shape != (z.shape[0],):
            raise InputError("labels must have one entry per logit row")
        if not np.all(np.isfinite(z)):
            raise InputError("logits contain non-finite values")
        K = z.shape[1]
        if labels.size and (labels.min() < 0 or labels.max() >= K):
            raise InputError(f"labels out of range [0, {K})")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "labels", labels)

    @property
    def N(self) -> int:
        return self.z.shape[0]

    @property
    def K(self) -> int:
        return self.z.shape[1]


@dataclass(frozen=True)
class LossValue:
    E: float
    per_example: np.ndarray


def log_softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise log probabilities via shifted log-sum-exp."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InputError("logits contain non-finite values")
    shifted = z - z.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise probabilities, numerically stable via max subtraction."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise InputError("logits contain non-finite values")
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _check_batch(batch: LogitsBatch, weights: WeightMatrix) -> None:
    if batch.K != weights.K:
        raise InputError(
            f"logits have {batch.K} classes but weight matrix has {weights.K}"
        )


def weighted_softmax_loss(batch: LogitsBatch, weights: WeightMatrix) -> LossValue:
    """E and its per-example terms; E is the mean of per_example."""
    _check_batch(batch, weights)
    logp = log_softmax(batch.z)
    w_rows = weights.w[batch.labels]
    per_example = -(w_rows * logp).sum(axis=1)
    return LossValue(E=float(per_example.mean()), per_example=per_example)


def weighted_softmax_gradient(batch: LogitsBatch, weights: WeightMatrix) -> np.ndarray:
    """Per-example gradients dE_n/dz as an N x K matrix.

    Row n is (sum_k W[l_n,k]) * p_n - W[l_n]; divide by N for dE/dz.
    """
    _check_batch(batch, weights)
    p = softmax(batch.z)
    w_rows = weights.w[batch.labels]
    row_sums = w_rows.sum(axis=1, keepdims=True)
    return row_sums * p - w_rows


def min_loss(w_row: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimizer and minimum of -sum_k w_k log p_k over the simplex.

    The optimum is p*_k = w_k / sum(w). Entries with w_k = 0 get p*_k = 0
    and contribute nothing to the loss (0 * log 0 := 0).
    """
    w = np.asarray(w_row, dtype=float)
    if w.ndim != 1:
        raise InputError("weight row must be 1-D")
    if np.any(w < 0):
        raise InputError("weight row must be non-negative")
    total = w.sum()
    if total <= 0:
        raise InputError("weight row must have at least one positive entry")
    p_star = w / total
    positive = w > 0
    e_star = -float((w[positive] * np.log(p_star[positive])).sum()) + 0.0
    return p_star, e_star
