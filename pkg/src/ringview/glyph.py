"""Deterministic toy rasterizer: rotated asymmetric glyphs with exact labels.

Each image is an anti-aliased rendering of a fixed polygon (an L shape with
a notched foot) rotated by theta about the image center. The polygon has no
rotational symmetry of any order, so every azimuth in [0, 360) produces a
distinct image and the label is unambiguous. Passing ``symmetric=True``
swaps in a 180-degree-symmetric S shape, deliberately reintroducing the
two-fold viewpoint ambiguity for qualitative experiments.

Rendering uses 4x4 supersampling: a pixel's value is the fraction of its 16
sample points inside the rotated polygon, so values live on the exact grid
{0, 1/16, ..., 1}. The rotation is applied as (exact) quarter-turn
coordinate swaps plus a residual rotation in [0, 90), and the sample grid
is closed under quarter turns, so with noise disabled

    render_glyph(theta + 90, ...) == np.rot90(render_glyph(theta, ...))

holds bit for bit whenever theta and theta + 90 share the same residual
(always the case for integer theta). Seed-driven uniform pixel noise of
amplitude 0.05 is added on top by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .circular import CircularLabelSpace, bin_to_degrees, degrees_to_bin
from .errors import InputError
from .manifest import DatasetManifest, ManifestRow, Source
from .seeds import derive_seed

SUPERSAMPLE = 4
DEFAULT_NOISE = 0.05

# L shape with a rectangular notch in the top edge of its foot; coordinates
# in units of half the image size, max radius ~0.71 so rotations never clip.
_ASYMMETRIC_POLYGON = np.array(
    [
        (-0.35, -0.55),
        (0.45, -0.55),
        (0.45, -0.25),
        (0.30, -0.25),
        (0.30, -0.45),
        (0.15, -0.45),
        (0.15, -0.25),
        (-0.05, -0.25),
        (-0.05, 0.55),
        (-0.35, 0.55),
    ]
)

# S shape whose vertex set is closed under negation: exact 180-degree
# rotational symmetry, so theta and theta + 180 render identically.
_SYMMETRIC_POLYGON = np.array(
    [
        (-0.5, -0.15),
        (0.2, -0.15),
        (0.2, -0.45),
        (0.5, -0.45),
        (0.5, 0.15),
        (-0.2, 0.15),
        (-0.2, 0.45),
        (-0.5, 0.45),
    ]
)


@dataclass(frozen=True)
class GlyphImage:
    width: int
    height: int
    pixels: np.ndarray
    theta_deg: float
    seed: int


def _points_in_polygon(x: np.ndarray, y: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Crossing-number point-in-polygon test, vectorized over sample points."""
    inside = np.zeros(x.shape, dtype=bool)
    n = len(polygon)
    for i in range(n):
        x1, y1 = polygon[i]
        x2, y2 = polygon[(i + 1) % n]
        crosses = (y1 > y) != (y2 > y)
        if not crosses.any():
            continue
        x_at_y = (x2 - x1) * (y - y1) / (y2 - y1) + x1
        inside ^= crosses & (x < x_at_y)
    return inside


def render_glyph(
    theta_deg: float,
    size: int = 64,
    seed: int = 0,
    noise_amplitude: float = DEFAULT_NOISE,
    symmetric: bool = False,
) -> GlyphImage:
    """Rasterize the glyph rotated by theta degrees (counterclockwise)."""
    if size < 16:
        raise InputError(f"size must be >= 16, got {size}")

    polygon = (_SYMMETRIC_POLYGON if symmetric else _ASYMMETRIC_POLYGON) * (size / 2.0)

    theta = float(theta_deg) % 360.0
    quarter_turns = int(theta // 90.0)
    residual = theta - 90.0 * quarter_turns

    # sample coordinates relative to the image center, y up; offsets are
    # eighths, so the grid is exact and closed under quarter-turn swaps
    offsets = (np.arange(SUPERSAMPLE) + 0.5) / SUPERSAMPLE
    cols = (np.arange(size)[:, None] + offsets[None, :]).reshape(-1)
    x = cols - size / 2.0
    y = size / 2.0 - cols
    xg, yg = np.meshgrid(x, y)

    # rotating the object by theta = testing inverse-rotated sample points;
    # quarter turns are exact coordinate swaps, only the residual needs trig
    for _ in range(quarter_turns):
        xg, yg = yg, -xg
    if residual != 0.0:
        c = math.cos(math.radians(residual))
        s = math.sin(math.radians(residual))
        xg, yg = c * xg + s * yg, -s * xg + c * yg

    inside = _points_in_polygon(xg, yg, polygon)
    counts = inside.reshape(size, SUPERSAMPLE, size, SUPERSAMPLE).sum(axis=(1, 3))
    pixels = counts / float(SUPERSAMPLE * SUPERSAMPLE)

    if noise_amplitude > 0.0:
        rng = np.random.default_rng(seed)
        noise = rng.uniform(-noise_amplitude, noise_amplitude, size=(size, size))
        pixels = np.clip(pixels + noise, 0.0, 1.0)

    return GlyphImage(width=size, height=size, pixels=pixels, theta_deg=theta_deg, seed=seed)


def save_png(image: GlyphImage, path: str | Path) -> None:
    """Write the glyph as an 8-bit grayscale PNG."""
    levels = np.rint(image.pixels * 255.0).astype(np.uint8)
    Image.fromarray(levels, mode="L").save(path, format="PNG")


def _counts_from_distribution(
    n: int, distribution: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Per-bin sample counts: exact when the histogram already sums to n,
    multinomial when given as sampling weights."""
    dist = np.asarray(distribution, dtype=float)
    if dist.ndim != 1 or dist.size == 0:
        raise InputError("label distribution must be a non-empty 1-D vector")
    if np.any(dist < 0):
        raise InputError("label distribution must be non-negative")
    total = dist.sum()
    if n == 0:
        return np.zeros(dist.size, dtype=int)
    if total <= 0:
        raise InputError("label distribution must have positive mass")
    integral = np.allclose(dist, np.rint(dist))
    if integral and int(round(total)) == n:
        return np.rint(dist).astype(int)
    return rng.multinomial(n, dist / total)


def make_glyph_dataset(
    n: int,
    label_distribution,
    seed: int,
    space: CircularLabelSpace,
    size: int = 64,
    source: Source = Source.GLYPH,
    id_prefix: str = "glyph",
    jitter: bool = True,
    symmetric: bool = False,
) -> DatasetManifest:
    """Sample n labeled glyph parameterizations into a manifest.

    ``label_distribution`` is a length-K vector: an integer histogram
    summing to n yields exactly that many samples per bin (stratified);
    anything else is treated as sampling weights. With ``jitter`` the angle
    is drawn uniformly inside the bin, otherwise it sits on the bin center.
    """
    if n < 0:
        raise InputError("n must be non-negative")
    rng = np.random.default_rng(derive_seed(seed, "glyph-dataset"))
    counts = _counts_from_distribution(n, label_distribution, rng)
    if counts.size != space.K:
        raise InputError(
            f"label distribution has {counts.size} bins but label space has K={space.K}"
        )

    width = space.bin_width_deg
    rows = []
    index = 0
    for bin_index, count in enumerate(counts):
        center = bin_to_degrees(bin_index, space)
        for _ in range(count):
            if jitter:
                theta = (center + (rng.random() - 0.5) * width) % 360.0
                if degrees_to_bin(theta, space) != bin_index:
                    theta = center
            else:
                theta = center
            rows.append(
                ManifestRow(
                    sample_id=f"{id_prefix}-{index:06d}",
                    source=source,
                    path_or_theta=repr(theta),
                    seed=derive_seed(seed, f"{id_prefix}-{index}"),
                    azimuth_deg=theta,
                    azimuth_bin=bin_index,
                )
            )
            index += 1
    return DatasetManifest(rows=rows)
