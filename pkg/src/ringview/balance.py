"""Rebalance a biased label histogram with samples from a synthetic pool.

Adaptive balancing tops every bin up to the current maximum count,
additions_k = max(h) - h_k: the unique minimal-total plan whose combined
histogram is exactly uniform. Under a budget smaller than that total, the
per-bin additions are scaled proportionally and rounded by largest
remainder so the budget is spent exactly. Random balancing spreads a given
number of additions multinomially uniformly over the bins.

Applying a plan draws the requested number of synthetic samples per bin
from the pool without replacement, never touches the real samples, and
fails loudly (naming the bin and shortfall) when the pool runs dry.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError
from .manifest import DatasetManifest
from .seeds import Lcg64, derive_seed


class BalanceMethod(enum.Enum):
    ADAPTIVE = "adaptive"
    RANDOM = "random"


def bin_histogram(manifest: DatasetManifest, K: int) -> np.ndarray:
    """Counts of manifest label bins (azimuth_bin), the space balancing acts on.

    Distinct from the metrics module's 10-degree-range histogram: balancing
    must count the same bins the plan will later fill.
    """
    counts = np.zeros(K, dtype=int)
    for row in manifest:
        if not (0 <= row.azimuth_bin < K):
            raise InputError(
                f"sample {row.sample_id}: bin {row.azimuth_bin} outside [0, {K})"
            )
        counts[row.azimuth_bin] += 1
    return counts


@dataclass(frozen=True)
class BalancePlan:
    additions_per_bin: np.ndarray
    method: BalanceMethod
    budget: int | None = None

    @property
    def total_additions(self) -> int:
        return int(self.additions_per_bin.sum())


def plan_adaptive(histogram, budget: int | None = None) -> BalancePlan:
    """Top bins up to max(h); under a budget, largest-remainder scaling.

    Rounding ties go to the most deficient bin (then the lower index).
    """
    h = np.asarray(histogram, dtype=int)
    if h.ndim != 1 or h.size < 1:
        raise InputError("histogram must be a non-empty 1-D vector")
    if np.any(h < 0):
        raise InputError("histogram counts must be non-negative")
    ideal = h.max() - h
    total = int(ideal.sum())
    if budget is not None and budget < 0:
        raise InputError("budget must be non-negative")
    if budget is None or budget >= total:
        return BalancePlan(additions_per_bin=ideal, method=BalanceMethod.ADAPTIVE, budget=budget)

    scaled = ideal * (budget / total)
    floors = np.floor(scaled).astype(int)
    remaining = budget - int(floors.sum())
    remainders = scaled - floors
    # sort by (remainder desc, deficit desc, index asc)
    order = sorted(range(h.size), key=lambda k: (-remainders[k], -ideal[k], k))
    additions = floors.copy()
    for k in order[:remaining]:
        additions[k] += 1
    return BalancePlan(additions_per_bin=additions, method=BalanceMethod.ADAPTIVE, budget=budget)


def plan_random(n_additions: int, K: int, seed: int) -> BalancePlan:
    """n additions spread multinomially uniformly over K bins."""
    if n_additions < 0:
        raise InputError("n_additions must be non-negative")
    if K < 1:
        raise InputError("K must be positive")
    rng = np.random.default_rng(derive_seed(seed, "balance:random"))
    additions = rng.multinomial(n_additions, np.full(K, 1.0 / K))
    return BalancePlan(additions_per_bin=additions, method=BalanceMethod.RANDOM, budget=None)


def apply_plan(
    manifest_real: DatasetManifest,
    pool_synth: DatasetManifest,
    plan: BalancePlan,
    seed: int,
) -> DatasetManifest:
    """Combine the real manifest with planned draws from the synthetic pool.

    Draws are without replacement, per bin, in a seeded shuffle order.
    """
    K = plan.additions_per_bin.size
    by_bin: dict[int, list] = {k: [] for k in range(K)}
    for row in pool_synth:
        if 0 <= row.azimuth_bin < K:
            by_bin[row.azimuth_bin].append(row)

    chosen = []
    for k in range(K):
        need = int(plan.additions_per_bin[k])
        if need == 0:
            continue
        pool = list(by_bin[k])
        if len(pool) < need:
            raise InputError(
                f"synthetic pool bin {k} has {len(pool)} samples, "
                f"need {need} (short by {need - len(pool)})"
            )
        shuffler = Lcg64(derive_seed(seed, f"balance:bin:{k}"))
        shuffler.shuffle(pool)
        chosen.extend(pool[:need])

    return DatasetManifest(rows=manifest_real.rows + chosen)


def write_plan_jsonl(plan: BalancePlan, path: str | Path) -> None:
    record = {
        "method": plan.method.value,
        "budget": plan.budget,
        "additions_per_bin": [int(a) for a in plan.additions_per_bin],
        "total_additions": plan.total_additions,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(record) + "\n")


def read_plan_jsonl(path: str | Path) -> BalancePlan:
    path = Path(path)
    if not path.exists():
        raise InputError(f"plan file not found: {path}")
    with open(path) as fh:
        record = json.loads(fh.readline())
    return BalancePlan(
        additions_per_bin=np.array(record["additions_per_bin"], dtype=int),
        method=BalanceMethod(record["method"]),
        budget=record["budget"],
    )
