"""Image augmentation with replayable audit records.

All transforms operate on 8-bit RGB numpy arrays (H, W, 3) and preserve
dimensions. The pipeline applies, in order: random crop-or-not, resolution
degradation, per-channel color cast, channel swap, rectangular occlusion,
and a final JPEG encode/decode round trip (test-time images are JPEGs, so
compression goes last).

Every random decision is drawn from a stage-local generator derived from
(seed, stage name), so disabling one stage never shifts another stage's
draws. Each applied operation is appended to an audit record holding its
concrete parameters (window coordinates, channel offsets, permutation,
rectangle, fill); ``replay`` re-applies a record without consulting any
RNG and reproduces the output byte for byte under the same codec build.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InputError
from .seeds import derive_seed

# the 5 non-identity permutations of (R, G, B), fixed order for sampling
_CHANNEL_PERMS = ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))


@dataclass(frozen=True)
class AugmentConfig:
    jpeg_quality: int = 75
    color_cast_prob_per_channel: float = 0.5
    color_cast_range: int = 20
    channel_swap_prob: float = 0.5
    degrade_fraction: float = 0.25
    degrade_area_fraction: float = 0.1
    degrade_target_area: int | None = None
    occlusion_fraction: float = 0.35
    occlusion_size_range: tuple[float, float] = (0.2, 0.6)
    occlusion_patch_source: str = "uniform"
    crop_prob: float = 0.5
    crop_fraction: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.jpeg_quality <= 100):
            raise InputError(f"jpeg_quality must be in [1, 100], got {self.jpeg_quality}")
        for name in ("color_cast_prob_per_channel", "channel_swap_prob",
                     "degrade_fraction", "occlusion_fraction", "crop_prob"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise InputError(f"{name} must be in [0, 1], got {value}")
        lo, hi = self.occlusion_size_range
        if not (0.0 < lo <= hi < 1.0):
            raise InputError(f"occlusion_size_range must sit inside (0, 1), got {(lo, hi)}")
        if not (0.0 < self.crop_fraction < 1.0):
            raise InputError(f"crop_fraction must be in (0, 1), got {self.crop_fraction}")


def _require_rgb8(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise InputError(f"expected uint8 RGB array (H, W, 3), got {image.dtype} {image.shape}")
    return image


def _stage_rng(seed: int, stage: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, f"augment:{stage}"))


def read_image_rgb8(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise InputError(f"image not found: {path}")
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def write_image_png(image: np.ndarray, path: str | Path) -> None:
    Image.fromarray(_require_rgb8(image), mode="RGB").save(path, format="PNG")


# ---------------------------------------------------------------------------
# parameter-driven cores (shared by the sampling ops and replay)
# ---------------------------------------------------------------------------


def _apply_jpeg(image: np.ndarray, quality: int) -> np.ndarray:
    buf = io.BytesIO()
    # chroma subsampling off: pinned encoder settings, quality is the only knob
    Image.fromarray(image, mode="RGB").save(buf, format="JPEG", quality=quality, subsampling=0)
    buf.seek(0)
    with Image.open(buf) as decoded:
        return np.asarray(decoded.convert("RGB"))


def _apply_color_cast(image: np.ndarray, offsets: list[float | None]) -> np.ndarray:
    out = image.astype(np.int16)
    for channel, offset in enumerate(offsets):
        if offset is not None:
            out[:, :, channel] = np.clip(
                np.rint(image[:, :, channel].astype(float) + offset), 0, 255
            ).astype(np.int16)
    return out.astype(np.uint8)


def _apply_channel_perm(image: np.ndarray, perm: tuple[int, int, int]) -> np.ndarray:
    return image[:, :, list(perm)]


def _apply_degrade(image: np.ndarray, down_w: int, down_h: int) -> np.ndarray:
    h, w = image.shape[:2]
    pil = Image.fromarray(image, mode="RGB")
    small = pil.resize((down_w, down_h), resample=Image.BOX)
    return np.asarray(small.resize((w, h), resample=Image.BILINEAR))


def _apply_crop(image: np.ndarray, x0: int, y0: int, w: int, h: int) -> np.ndarray:
    full_h, full_w = image.shape[:2]
    window = Image.fromarray(image[y0 : y0 + h, x0 : x0 + w], mode="RGB")
    return np.asarray(window.resize((full_w, full_h), resample=Image.BILINEAR))


def _apply_occlusion(image: np.ndarray, x0: int, y0: int, w: int, h: int, fill: dict) -> np.ndarray:
    out = image.copy()
    if fill["mode"] == "uniform":
        out[y0 : y0 + h, x0 : x0 + w] = np.array(fill["rgb"], dtype=np.uint8)
    else:
        patch = read_image_rgb8(fill["path"])
        resized = Image.fromarray(patch, mode="RGB").resize((w, h), resample=Image.BILINEAR)
        out[y0 : y0 + h, x0 : x0 + w] = np.asarray(resized)
    return out


_APPLY = {
    "crop": lambda img, rec: _apply_crop(img, rec["x0"], rec["y0"], rec["w"], rec["h"]),
    "degrade": lambda img, rec: _apply_degrade(img, rec["down_w"], rec["down_h"]),
    "color_cast": lambda img, rec: _apply_color_cast(img, rec["offsets"]),
    "channel_swap": lambda img, rec: _apply_channel_perm(img, tuple(rec["perm"])),
    "occlude": lambda img, rec: _apply_occlusion(
        img, rec["x0"], rec["y0"], rec["w"], rec["h"], rec["fill"]
    ),
    "jpeg": lambda img, rec: _apply_jpeg(img, rec["quality"]),
}


# ---------------------------------------------------------------------------
# public ops
# ---------------------------------------------------------------------------


def jpeg_roundtrip(image: np.ndarray, quality: int) -> np.ndarray:
    """Encode and decode through a baseline lossy JPEG at the given quality."""
    image = _require_rgb8(image)
    if not isinstance(quality, int) or not (1 <= quality <= 100):
        raise InputError(f"quality must be an integer in [1, 100], got {quality!r}")
    return _apply_jpeg(image, quality)


def _draw_cast_offsets(cfg: AugmentConfig, rng: np.random.Generator) -> list[float | None]:
    offsets: list[float | None] = []
    for _ in range(3):
        fires = rng.random() < cfg.color_cast_prob_per_channel
        value = rng.uniform(-cfg.color_cast_range, cfg.color_cast_range)
        offsets.append(float(value) if fires else None)
    return offsets


def color_cast(image: np.ndarray, cfg: AugmentConfig, seed: int) -> np.ndarray:
    """Per channel, with the configured probability, add one uniform offset."""
    image = _require_rgb8(image)
    return _apply_color_cast(image, _draw_cast_offsets(cfg, _stage_rng(seed, "color_cast")))


def channel_swap(image: np.ndarray, seed: int, prob: float = 0.5) -> np.ndarray:
    """With the given probability, apply a random non-identity channel permutation."""
    image = _require_rgb8(image)
    rng = _stage_rng(seed, "channel_swap")
    if rng.random() < prob:
        perm = _CHANNEL_PERMS[int(rng.integers(0, len(_CHANNEL_PERMS)))]
        return _apply_channel_perm(image, perm)
    return image.copy()


def degrade(image: np.ndarray, target_area: int) -> np.ndarray:
    """Box-downsample to roughly target_area pixels, then upsample back."""
    image = _require_rgb8(image)
    h, w = image.shape[:2]
    if target_area >= h * w:
        raise InputError(f"target_area {target_area} must be below source area {h * w}")
    if target_area < 1:
        raise InputError("target_area must be positive")
    scale = math.sqrt(target_area / (h * w))
    down_w = max(1, round(w * scale))
    down_h = max(1, round(h * scale))
    return _apply_degrade(image, down_w, down_h)


def _side_pixels(extent: int, lo: float, hi: float, rng: np.random.Generator) -> int:
    """Uniform side length whose realized fraction stays inside [lo, hi]."""
    lo_px = max(1, math.ceil(lo * extent))
    hi_px = max(lo_px, math.floor(hi * extent))
    return int(rng.integers(lo_px, hi_px + 1))


def _draw_occlusion_rect(
    shape: tuple[int, int], cfg: AugmentConfig, rng: np.random.Generator
) -> tuple[int, int, int, int]:
    h, w = shape
    lo, hi = cfg.occlusion_size_range
    rect_w = _side_pixels(w, lo, hi, rng)
    rect_h = _side_pixels(h, lo, hi, rng)
    x0 = int(rng.integers(0, w - rect_w + 1))
    y0 = int(rng.integers(0, h - rect_h + 1))
    return x0, y0, rect_w, rect_h


def _draw_occlusion_fill(
    patch_source: str, rng: np.random.Generator
) -> dict:
    if patch_source == "uniform":
        rgb = [int(v) for v in rng.integers(0, 256, size=3)]
        return {"mode": "uniform", "rgb": rgb}
    corpus = Path(patch_source)
    files = sorted(
        p for p in corpus.glob("*") if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    if not files:
        raise InputError(f"occlusion corpus directory {corpus} is empty")
    choice = files[int(rng.integers(0, len(files)))]
    return {"mode": "corpus", "path": str(choice)}


def occlude(
    image: np.ndarray, cfg: AugmentConfig, seed: int, patch_source: str = "uniform"
) -> tuple[np.ndarray, dict]:
    """Place one random rectangle, filled uniformly or from an image corpus.

    Geometry and fill use separate derived generators, so the rectangle is
    identical across fill modes under the same seed. Returns the occluded
    image and the rectangle record for auditing.
    """
    image = _require_rgb8(image)
    x0, y0, w, h = _draw_occlusion_rect(image.shape[:2], cfg, _stage_rng(seed, "occlude:geom"))
    fill = _draw_occlusion_fill(patch_source, _stage_rng(seed, "occlude:fill"))
    record = {"op": "occlude", "x0": x0, "y0": y0, "w": w, "h": h, "fill": fill}
    return _apply_occlusion(image, x0, y0, w, h, fill), record


def crop(image: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Random window of the given area fraction, resized back to full size."""
    image = _require_rgb8(image)
    if not (0.0 < fraction < 1.0):
        raise InputError(f"crop fraction must be in (0, 1), got {fraction}")
    rng = _stage_rng(seed, "crop")
    rec = _draw_crop_window(image.shape[:2], fraction, rng)
    return _apply_crop(image, rec["x0"], rec["y0"], rec["w"], rec["h"])


def _draw_crop_window(
    shape: tuple[int, int], fraction: float, rng: np.random.Generator
) -> dict:
    h, w = shape
    side = math.sqrt(fraction)
    win_w = min(w, max(1, round(w * side)))
    win_h = min(h, max(1, round(h * side)))
    x0 = int(rng.integers(0, w - win_w + 1))
    y0 = int(rng.integers(0, h - win_h + 1))
    return {"x0": x0, "y0": y0, "w": win_w, "h": win_h}


def lower_percentile_area(areas, percentile: float = 30.0) -> int:
    """The requested percentile of a box-area sample, as a pixel count.

    Stands in for "small test boxes": feed it the area distribution of a
    detection dataset and pass the result to ``degrade`` as target_area.
    """
    values = np.asarray(list(areas), dtype=float)
    if values.size == 0:
        raise InputError("need at least one box area")
    if np.any(values <= 0):
        raise InputError("box areas must be positive")
    return int(round(float(np.percentile(values, percentile))))


def read_box_areas(path: str | Path) -> list[float]:
    """One area per line (blank lines ignored)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"box-area file not found: {path}")
    areas = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                areas.append(float(line))
    return areas


# ---------------------------------------------------------------------------
# pipeline + replay
# ---------------------------------------------------------------------------


def augment_pipeline(image: np.ndarray, cfg: AugmentConfig, seed: int) -> tuple[np.ndarray, dict]:
    """Run the full augmentation chain; returns (image, audit record).

    The audit record lists every applied op with its concrete parameters
    and is sufficient to replay the output exactly.
    """
    image = _require_rgb8(image)
    ops: list[dict] = []

    rng = _stage_rng(seed, "crop")
    if rng.random() < cfg.crop_prob:
        rec = {"op": "crop", **_draw_crop_window(image.shape[:2], cfg.crop_fraction, rng)}
        image = _APPLY["crop"](image, rec)
        ops.append(rec)

    rng = _stage_rng(seed, "degrade")
    if rng.random() < cfg.degrade_fraction:
        h, w = image.shape[:2]
        target = cfg.degrade_target_area
        if target is None:
            target = max(1, round(h * w * cfg.degrade_area_fraction))
        target = min(target, h * w - 1)
        scale = math.sqrt(target / (h * w))
        rec = {
            "op": "degrade",
            "down_w": max(1, round(w * scale)),
            "down_h": max(1, round(h * scale)),
        }
        image = _APPLY["degrade"](image, rec)
        ops.append(rec)

    offsets = _draw_cast_offsets(cfg, _stage_rng(seed, "color_cast"))
    if any(offset is not None for offset in offsets):
        rec = {"op": "color_cast", "offsets": offsets}
        image = _APPLY["color_cast"](image, rec)
        ops.append(rec)

    rng = _stage_rng(seed, "channel_swap")
    if rng.random() < cfg.channel_swap_prob:
        perm = _CHANNEL_PERMS[int(rng.integers(0, len(_CHANNEL_PERMS)))]
        rec = {"op": "channel_swap", "perm": list(perm)}
        image = _APPLY["channel_swap"](image, rec)
        ops.append(rec)

    rng = _stage_rng(seed, "occlude")
    if rng.random() < cfg.occlusion_fraction:
        x0, y0, w, h = _draw_occlusion_rect(image.shape[:2], cfg, _stage_rng(seed, "occlude:geom"))
        fill = _draw_occlusion_fill(cfg.occlusion_patch_source, _stage_rng(seed, "occlude:fill"))
        rec = {"op": "occlude", "x0": x0, "y0": y0, "w": w, "h": h, "fill": fill}
        image = _APPLY["occlude"](image, rec)
        ops.append(rec)

    rec = {"op": "jpeg", "quality": cfg.jpeg_quality}
    image = _APPLY["jpeg"](image, rec)
    ops.append(rec)

    return image, {"seed": seed, "ops": ops}


def replay(image: np.ndarray, audit: dict) -> np.ndarray:
    """Re-apply an audit record's ops verbatim (no randomness involved)."""
    image = _require_rgb8(image)
    for rec in audit["ops"]:
        op = rec.get("op")
        if op not in _APPLY:
            raise InputError(f"unknown op in audit record: {op!r}")
        image = _APPLY[op](image, rec)
    return image
