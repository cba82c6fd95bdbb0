"""Flat key=value experiment configs.

One ``key=value`` pair per line; blank lines and ``#`` comments ignored.
Keys are exactly the AugmentConfig / TrainConfig field names, so configs
diff cleanly against code. The trainer's kernel is flattened into three
keys: ``kernel`` (identity | von_mises), ``sigma``, ``variant``
(squared_distance | literal_paper), and ``truncation_radius``.
"""

from __future__ import annotations

from pathlib import Path

from .augment import AugmentConfig
from .circular import KernelConfig, KernelVariant
from .errors import InputError
from .trainer import TrainConfig


def parse_kv_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _convert(value: str, target_type):
    if target_type is bool:
        lowered = value.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise InputError(f"expected a boolean, got {value!r}")
    return target_type(value)


def load_augment_config(path: str | Path) -> AugmentConfig:
    raw = parse_kv_file(path)
    kwargs = {}
    casts = {
        "jpeg_quality": int,
        "color_cast_prob_per_channel": float,
        "color_cast_range": int,
        "channel_swap_prob": float,
        "degrade_fraction": float,
        "degrade_area_fraction": float,
        "degrade_target_area": int,
        "occlusion_fraction": float,
        "occlusion_patch_source": str,
        "crop_prob": float,
        "crop_fraction": float,
        "seed": int,
    }
    for key, value in raw.items():
        if key == "occlusion_size_range":
            lo, _, hi = value.partition(",")
            kwargs[key] = (float(lo), float(hi))
        elif key in casts:
            kwargs[key] = _convert(value, casts[key])
        else:
            raise InputError(f"unknown augment config key {key!r}")
    try:
        return AugmentConfig(**kwargs)
    except TypeError as exc:
        raise InputError(str(exc)) from exc


def load_train_config(path: str | Path) -> TrainConfig:
    raw = parse_kv_file(path)
    kernel = None
    if raw.pop("kernel", "identity") == "von_mises":
        sigma = float(raw.pop("sigma", "2.0"))
        variant = KernelVariant(raw.pop("variant", "squared_distance"))
        trunc = raw.pop("truncation_radius", None)
        kernel = KernelConfig(
            sigma=sigma,
            variant=variant,
            truncation_radius=None if trunc is None else int(trunc),
        )
    else:
        for leftover in ("sigma", "variant", "truncation_radius"):
            raw.pop(leftover, None)

    casts = {
        "K": int,
        "learning_rate": float,
        "epochs": int,
        "batch_size": int,
        "seed": int,
        "hidden_units": int,
        "blend_ratio": float,
        "train_size": int,
        "image_size": int,
    }
    kwargs: dict = {"kernel": kernel}
    for key, value in raw.items():
        if key not in casts:
            raise InputError(f"unknown train config key {key!r}")
        kwargs[key] = _convert(value, casts[key])
    if "K" not in kwargs:
        raise InputError("train config must set K")
    try:
        return TrainConfig(**kwargs)
    except TypeError as exc:
        raise InputError(str(exc)) from exc
