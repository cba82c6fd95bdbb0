"""Seed derivation and a portable shuffling PRNG.

Every pipeline stage derives its own seed from one root seed so that a
single ``--seed`` flag reproduces an entire run:

    stage_seed = uint64_le(blake2b(b"<root>:<stage>", digest_size=8))

Stage names are plain strings ("glyphs", "train:init", "augment:img_0042",
...). Changing the root seed or the stage name changes the derived stream;
nothing else does.

Shuffling inside the trainer uses ``Lcg64``, a 64-bit linear congruential
generator with Knuth's MMIX constants. It is specified here, in full, so the
shuffle order can be reproduced outside this codebase:

    state' = (6364136223846793005 * state + 1442695040888963407) mod 2**64

Floats take the top 53 bits of the state; bounded draws use rejection
sampling on the raw 64-bit output to avoid modulo bias.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_LCG_A = 6364136223846793005
_LCG_C = 1442695040888963407


def derive_seed(root_seed: int, stage: str) -> int:
    """Derive a 64-bit stage seed from the root seed and a stage name."""
    digest = hashlib.blake2b(f"{root_seed}:{stage}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class Lcg64:
    """Knuth MMIX linear congruential generator (see module docstring)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (_LCG_A * self.state + _LCG_C) & _MASK64
        return self.state

    def next_float(self) -> float:
        """Uniform in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, high index first."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
