"""Circular label space and the Von Mises class-to-class weight machinery.

The azimuth circle is discretized into K bins; distances between bins are
measured along the ring, so bin K-1 and bin 0 are neighbors. A Von Mises
kernel over that ring distance turns a hard label into a bump of weights
over nearby labels. Collecting the bump for every label row gives a K x K
circulant, symmetric weight matrix with ones on the diagonal.

Two kernel variants are provided. ``SQUARED_DISTANCE`` (the default) uses
exp(-d^2 / sigma^2), which gives the kernel an effective support of roughly
+/- 1.5 sigma bins (weight crosses 0.11 at d = sigma * sqrt(ln(1/0.11))
~= 1.486 sigma). ``LITERAL_PAPER`` uses exp(-d / sigma^2), an exponential
bump with much wider tails; it is kept for comparison only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


class KernelVariant(enum.Enum):
    SQUARED_DISTANCE = "squared_distance"
    LITERAL_PAPER = "literal_paper"


@dataclass(frozen=True)
class CircularLabelSpace:
    """K azimuth classes covering 360 degrees in equal bins.

    Bin i is centered at i * bin_width_deg; bin arithmetic is modulo K.
    K must divide 360 so that bin centers and widths are exact.
    """

    K: int

    def __post_init__(self):
        if self.K < 2:
            raise InputError(f"K must be >= 2, got {self.K}")
        if 360 % self.K != 0:
            raise InputError(f"K must divide 360 evenly, got {self.K}")

    @property
    def bin_width_deg(self) -> float:
        return 360.0 / self.K


@dataclass(frozen=True)
class KernelConfig:
    """Width and shape of the Von Mises label kernel.

    sigma is measured in bins. truncation_radius, when set, zeroes every
    weight at ring distance greater than the radius; when None, far weights
    simply underflow to 0.0 on their own.
    """

    sigma: float
    variant: KernelVariant = KernelVariant.SQUARED_DISTANCE
    truncation_radius: int | None = None

    def __post_init__(self):
        if not (self.sigma > 0):
            raise InputError(f"sigma must be positive, got {self.sigma}")
        if self.truncation_radius is not None and self.truncation_radius < 0:
            raise InputError("truncation_radius must be non-negative")


@dataclass(frozen=True)
class WeightMatrix:
    """K x K circulant matrix of label weights, ones on the diagonal."""

    K: int
    w: np.ndarray

    @classmethod
    def identity(cls, K: int) -> "WeightMatrix":
        """Plain SoftMax weights: 1 on the diagonal, 0 elsewhere."""
        return cls(K=K, w=np.eye(K))

    def row(self, label: int) -> np.ndarray:
        return self.w[label]


def circular_distance(a: int, b: int, K: int) -> int:
    """Shortest ring distance between bins a and b, in [0, floor(K/2)]."""
    if not (0 <= a < K):
        raise InputError(f"bin index a={a} out of range [0, {K})")
    if not (0 <= b < K):
        raise InputError(f"bin index b={b} out of range [0, {K})")
    d = abs(a - b)
    return min(d, K - d)


def kernel_value(d: float, cfg: KernelConfig) -> float:
    """Kernel weight at ring distance d (d may be fractional)."""
    if d < 0:
        raise InputError(f"distance must be non-negative, got {d}")
    if cfg.truncation_radius is not None and d > cfg.truncation_radius:
        return 0.0
    if cfg.variant is KernelVariant.SQUARED_DISTANCE:
        return math.exp(-(d * d) / (cfg.sigma * cfg.sigma))
    return math.exp(-d / (cfg.sigma * cfg.sigma))


def von_mises_weight(l: int, k: int, cfg: KernelConfig, K: int) -> float:
    """Weight the kernel centered at label l assigns to class k."""
    return kernel_value(circular_distance(l, k, K), cfg)


def build_weight_matrix(space: CircularLabelSpace, cfg: KernelConfig) -> WeightMatrix:
    """Materialize the full K x K weight matrix for a label space.

    The matrix is built from a single distance row, so circulant structure
    and symmetry hold by construction.
    """
    K = space.K
    idx = np.arange(K)
    d = np.minimum(idx, K - idx).astype(float)
    first_row = np.array([kernel_value(di, cfg) for di in d])
    # row i is the first row rotated right by i places
    w = np.empty((K, K))
    for i in range(K):
        w[i] = np.roll(first_row, i)
    return WeightMatrix(K=K, w=w)


def degrees_to_bin(theta_deg: float, space: CircularLabelSpace) -> int:
    """Nearest bin center to theta (mod 360), ties toward the lower index.

    A tie at the wrap point (halfway between bin K-1 and bin 0) resolves
    to bin 0, the lower of the two tied indices.
    """
    width = space.bin_width_deg
    f = (theta_deg % 360.0) / width
    frac = f - math.floor(f)
    if frac == 0.5:
        lo = math.floor(f) % space.K
        hi = (math.floor(f) + 1) % space.K
        return min(lo, hi)
    return math.floor(f + 0.5) % space.K


def bin_to_degrees(bin_index: int, space: CircularLabelSpace) -> float:
    """Center of a bin, in [0, 360)."""
    if not (0 <= bin_index < space.K):
        raise InputError(f"bin index {bin_index} out of range [0, {space.K})")
    return bin_index * space.bin_width_deg
