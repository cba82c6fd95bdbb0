"""Dataset manifests: the labeled-sample lists every stage exchanges.

A manifest row points at either an image file (source real/synthetic) or a
glyph parameterization (source glyph, with theta stored in path_or_theta),
plus the azimuth label in degrees and bins. The CSV layout is fixed:

    sample_id,source,path_or_theta,seed,azimuth_deg,azimuth_bin

Floats are written with repr so that read -> write reproduces a manifest
byte for byte.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

from .circular import CircularLabelSpace, degrees_to_bin
from .errors import InputError

CSV_HEADER = ["sample_id", "source", "path_or_theta", "seed", "azimuth_deg", "azimuth_bin"]


class Source(enum.Enum):
    REAL = "real"
    SYNTHETIC = "synthetic"
    GLYPH = "glyph"


@dataclass(frozen=True)
class ManifestRow:
    sample_id: str
    source: Source
    path_or_theta: str
    seed: int
    azimuth_deg: float
    azimuth_bin: int

    @property
    def theta(self) -> float:
        """Glyph rotation angle; only meaningful for glyph rows."""
        return float(self.path_or_theta)


@dataclass
class DatasetManifest:
    rows: list[ManifestRow]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            if row.sample_id in seen:
                raise InputError(f"duplicate sample_id {row.sample_id!r}")
            seen.add(row.sample_id)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def validate_bins(self, space: CircularLabelSpace) -> None:
        """Check every row's bin matches its degrees under this label space."""
        for row in self.rows:
            expected = degrees_to_bin(row.azimuth_deg, space)
            if row.azimuth_bin != expected:
                raise InputError(
                    f"sample {row.sample_id}: bin {row.azimuth_bin} does not match "
                    f"azimuth {row.azimuth_deg} deg under K={space.K} (expected {expected})"
                )

    def extend(self, other: "DatasetManifest") -> "DatasetManifest":
        return DatasetManifest(rows=self.rows + other.rows)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in manifest.rows:
            writer.writerow(
                [
                    row.sample_id,
                    row.source.value,
                    row.path_or_theta,
                    row.seed,
                    repr(row.azimuth_deg),
                    row.azimuth_bin,
                ]
            )


def read_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    if not path.exists():
        raise InputError(f"manifest not found: {path}")
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise InputError(f"bad manifest header in {path}: {header}")
        for record in reader:
            if len(record) != len(CSV_HEADER):
                raise InputError(f"malformed manifest row in {path}: {record}")
            sample_id, source, path_or_theta, seed, azimuth_deg, azimuth_bin = record
            try:
                rows.append(
                    ManifestRow(
                        sample_id=sample_id,
                        source=Source(source),
                        path_or_theta=path_or_theta,
                        seed=int(seed),
                        azimuth_deg=float(azimuth_deg),
                        azimuth_bin=int(azimuth_bin),
                    )
                )
            except ValueError as exc:
                raise InputError(f"malformed manifest row in {path}: {record}") from exc
    return DatasetManifest(rows=rows)
