"""Render-job sampling: complete, renderer-agnostic synthetic-image specs.

Each job fixes one camera view of one model (azimuths at 1-degree steps
over rings at five elevations, 1800 views per model) and samples the full
parameter set a renderer needs: directed-light position and power, one of
nine light temperature profiles, aperture, shutter, vignetting, and a
background patch. Executing the jobs is someone else's problem; this module
only guarantees the stream is complete, in range, and bit-reproducible
from a single root seed.

Ambient quality tiers (simple/complex material + ambient light) carry no
directed light, so their lighting fields are emitted as null sentinels.

Sampling ranges: light elevation [10, 80] deg, luminous power
[1400, 10000] lm, f-stop [2.7, 8.3], shutter [1/200, 1/25] s, vignetting
with probability 0.25.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import InputError
from .seeds import derive_seed

ELEVATIONS_DEG = (-5, 0, 10, 20, 30)
AZIMUTH_STEPS = 360
VIEWS_PER_MODEL = AZIMUTH_STEPS * len(ELEVATIONS_DEG)

LIGHT_ELEVATION_RANGE = (10.0, 80.0)
LUMINOUS_POWER_RANGE = (1400.0, 10000.0)
F_STOP_RANGE = (2.7, 8.3)
SHUTTER_RANGE_S = (1.0 / 200.0, 1.0 / 25.0)
VIGNETTING_PROB = 0.25
BACKGROUND_POOL_SIZE = 10000


class QualityTier(enum.Enum):
    SIMPLE_MATERIAL_AMBIENT = "simple_material_ambient"
    COMPLEX_MATERIAL_AMBIENT = "complex_material_ambient"
    COMPLEX_MATERIAL_DIRECTIONAL = "complex_material_directional"

    @property
    def has_directed_light(self) -> bool:
        return self is QualityTier.COMPLEX_MATERIAL_DIRECTIONAL


@dataclass(frozen=True)
class TemperatureProfile:
    name: str
    kelvin: float
    rgb_gain: tuple[float, float, float]


def _kelvin_to_rgb_gain(kelvin: float) -> tuple[float, float, float]:
    """Planckian-locus RGB approximation (Tanner Helland's fit), max-normalized.

    Valid over roughly [1000, 40000] K; channels come out in (0, 1] for the
    profile table below (all temperatures above 1900 K keep blue positive).
    """
    t = kelvin / 100.0
    if t <= 66.0:
        red = 255.0
        green = 99.4708025861 * math.log(t) - 161.1195681661
    else:
        red = 329.698727446 * (t - 60.0) ** -0.1332047592
        green = 288.1221695283 * (t - 60.0) ** -0.0755148492
    if t >= 66.0:
        blue = 255.0
    elif t <= 19.0:
        blue = 0.0
    else:
        blue = 138.5177312231 * math.log(t - 10.0) - 305.0447927307
    clamp = lambda v: min(max(v, 0.0), 255.0)
    return (clamp(red) / 255.0, clamp(green) / 255.0, clamp(blue) / 255.0)


_PROFILE_SCENARIOS = (
    ("candle_flame", 2000.0),
    ("tungsten_bulb", 2850.0),
    ("halogen_light", 3200.0),
    ("fluorescent_tube", 4100.0),
    ("morning_sun", 4800.0),
    ("midday_sun", 5500.0),
    ("overcast_sky", 6500.0),
    ("hazy_shade", 7500.0),
    ("clear_blue_sky", 10000.0),
)


def temperature_profile_table() -> list[TemperatureProfile]:
    """The nine fixed light-temperature profiles, coldest color last."""
    return [
        TemperatureProfile(name=name, kelvin=kelvin, rgb_gain=_kelvin_to_rgb_gain(kelvin))
        for name, kelvin in _PROFILE_SCENARIOS
    ]


@dataclass(frozen=True)
class RenderJobSpec:
    model_id: str
    azimuth_deg: int
    elevation_deg: int
    light_azimuth_deg: float | None
    light_elevation_deg: float | None
    luminous_power_lm: float | None
    temperature_profile: str | None
    f_stop: float
    shutter_s: float
    vignetting: bool
    background_patch_id: str
    quality_tier: str
    sphere_radius: float | None
    seed: int


@dataclass(frozen=True)
class ModelSplit:
    train_model_ids: list[str]
    test_model_ids: list[str]


def enumerate_views(model_id: str) -> list[tuple[int, int]]:
    """All 1800 (azimuth, elevation) pairs for one model, lexicographic."""
    if not model_id:
        raise InputError("model_id must be non-empty")
    return [(az, el) for az in range(AZIMUTH_STEPS) for el in ELEVATIONS_DEG]


def sample_job(
    model_id: str,
    view: tuple[int, int],
    tier: QualityTier,
    seed: int,
    power_scale: float = 1.0,
    sphere_radius: float | None = None,
) -> RenderJobSpec:
    """Sample one fully specified render job, deterministic under seed.

    power_scale rescales the sampled luminous power for models built at
    unusual scales; 1.0 keeps power inside the canonical sampling range.
    """
    azimuth, elevation = view
    if not (0 <= azimuth < AZIMUTH_STEPS):
        raise InputError(f"azimuth {azimuth} out of range [0, 360)")
    if elevation not in ELEVATIONS_DEG:
        raise InputError(f"elevation {elevation} not one of {ELEVATIONS_DEG}")

    rng = np.random.default_rng(seed)
    # fixed draw order keeps the stream stable across tiers
    light_azimuth = float(rng.uniform(0.0, 360.0))
    light_elevation = float(rng.uniform(*LIGHT_ELEVATION_RANGE))
    luminous_power = float(rng.uniform(*LUMINOUS_POWER_RANGE)) * power_scale
    profile = temperature_profile_table()[int(rng.integers(0, len(_PROFILE_SCENARIOS)))]
    f_stop = float(rng.uniform(*F_STOP_RANGE))
    shutter = float(rng.uniform(*SHUTTER_RANGE_S))
    vignetting = bool(rng.random() < VIGNETTING_PROB)
    background = f"pascal-nocar-{int(rng.integers(0, BACKGROUND_POOL_SIZE)):05d}"

    directed = tier.has_directed_light
    return RenderJobSpec(
        model_id=model_id,
        azimuth_deg=azimuth,
        elevation_deg=elevation,
        light_azimuth_deg=light_azimuth if directed else None,
        light_elevation_deg=light_elevation if directed else None,
        luminous_power_lm=luminous_power if directed else None,
        temperature_profile=profile.name if directed else None,
        f_stop=f_stop,
        shutter_s=shutter,
        vignetting=vignetting,
        background_patch_id=background,
        quality_tier=tier.value,
        sphere_radius=sphere_radius,
        seed=seed,
    )


def enumerate_jobs(
    model_ids: Iterable[str],
    tier: QualityTier,
    root_seed: int,
    jobs_per_view: int = 1,
    power_scales: dict[str, float] | None = None,
    sphere_radius: float | None = None,
) -> Iterator[RenderJobSpec]:
    """The full job stream for a model list, one root seed end to end.

    Per-job seeds are derived from (root seed, model, view, repeat), so the
    stream can be regenerated per model in parallel without coordination.
    """
    if jobs_per_view < 1:
        raise InputError("jobs_per_view must be >= 1")
    power_scales = power_scales or {}
    for model_id in model_ids:
        scale = power_scales.get(model_id, 1.0)
        for azimuth, elevation in enumerate_views(model_id):
            for rep in range(jobs_per_view):
                job_seed = derive_seed(root_seed, f"job:{model_id}:{azimuth}:{elevation}:{rep}")
                yield sample_job(
                    model_id,
                    (azimuth, elevation),
                    tier,
                    job_seed,
                    power_scale=scale,
                    sphere_radius=sphere_radius,
                )


def make_split(model_ids: list[str], holdout_index: int) -> ModelSplit:
    """Hold one model out for testing; the rest train."""
    if len(model_ids) < 2:
        raise InputError("need at least 2 model ids to split")
    if len(set(model_ids)) != len(model_ids):
        raise InputError("model ids must be unique")
    if not (0 <= holdout_index < len(model_ids)):
        raise InputError(f"holdout index {holdout_index} out of range [0, {len(model_ids)})")
    train = [m for i, m in enumerate(model_ids) if i != holdout_index]
    return ModelSplit(train_model_ids=train, test_model_ids=[model_ids[holdout_index]])


def write_jobs_jsonl(jobs: Iterable[RenderJobSpec], path: str | Path) -> int:
    """One JSON object per line, fields in RenderJobSpec order; returns count."""
    n = 0
    with open(path, "w") as fh:
        for job in jobs:
            fh.write(json.dumps(asdict(job)) + "\n")
            n += 1
    return n


def read_jobs_jsonl(path: str | Path) -> list[RenderJobSpec]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"job file not found: {path}")
    jobs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            jobs.append(RenderJobSpec(**raw))
    return jobs


def write_split_json(split: ModelSplit, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(asdict(split), fh, indent=2)
        fh.write("\n")


def read_split_json(path: str | Path) -> ModelSplit:
    path = Path(path)
    if not path.exists():
        raise InputError(f"split file not found: {path}")
    with open(path) as fh:
        raw = json.load(fh)
    return ModelSplit(**raw)
