import numpy as np
import pytest

from ringview.augment import AugmentConfig
from ringview.circular import CircularLabelSpace, KernelVariant
from ringview.config import load_augment_config, load_train_config, parse_kv_file
from ringview.errors import InputError
from ringview.glyph import make_glyph_dataset
from ringview.manifest import (
    CSV_HEADER,
    DatasetManifest,
    ManifestRow,
    Source,
    read_manifest,
    write_manifest,
)


class TestManifestIO:
    def test_write_read_write_is_byte_identical(self, tmp_path):
        space = CircularLabelSpace(36)
        manifest = make_glyph_dataset(50, np.ones(36), seed=3, space=space)
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_manifest(manifest, first)
        write_manifest(read_manifest(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_header_exact(self, tmp_path):
        space = CircularLabelSpace(36)
        manifest = make_glyph_dataset(1, np.ones(36), seed=0, space=space)
        path = tmp_path / "m.csv"
        write_manifest(manifest, path)
        assert path.read_text().splitlines()[0] == ",".join(CSV_HEADER)

    def test_duplicate_ids_rejected(self):
        row = ManifestRow("dup", Source.GLYPH, "1.0", 0, 1.0, 0)
        with pytest.raises(InputError, match="duplicate"):
            DatasetManifest(rows=[row, row])

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,source\n1,glyph\n")
        with pytest.raises(InputError, match="header"):
            read_manifest(path)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(CSV_HEADER) + "\nx,glyph,1.0,not_an_int,1.0,0\n")
        with pytest.raises(InputError, match="malformed"):
            read_manifest(path)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            read_manifest(tmp_path / "nope.csv")

    def test_validate_bins_flags_mismatch(self):
        space = CircularLabelSpace(36)
        row = ManifestRow("x", Source.GLYPH, "90.0", 0, 90.0, 2)
        with pytest.raises(InputError, match="bin"):
            DatasetManifest(rows=[row]).validate_bins(space)


class TestKvConfig:
    def test_parse_kv_with_comments(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# comment\n\njpeg_quality = 85\nseed=4\n")
        assert parse_kv_file(path) == {"jpeg_quality": "85", "seed": "4"}

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("jpeg_quality\n")
        with pytest.raises(InputError, match="key=value"):
            parse_kv_file(path)

    def test_augment_config_round_trip(self, tmp_path):
        path = tmp_path / "aug.cfg"
        path.write_text(
            "jpeg_quality=85\ncolor_cast_range=15\nocclusion_size_range=0.3,0.5\n"
            "occlusion_fraction=0.4\ncrop_prob=0.0\nseed=9\n"
        )
        cfg = load_augment_config(path)
        assert cfg == AugmentConfig(
            jpeg_quality=85, color_cast_range=15, occlusion_size_range=(0.3, 0.5),
            occlusion_fraction=0.4, crop_prob=0.0, seed=9,
        )

    def test_augment_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "aug.cfg"
        path.write_text("jpg_quality=85\n")
        with pytest.raises(InputError, match="unknown augment config key"):
            load_augment_config(path)

    def test_train_config_with_kernel(self, tmp_path):
        path = tmp_path / "train.cfg"
        path.write_text(
            "K=36\nkernel=von_mises\nsigma=4.0\nvariant=literal_paper\n"
            "truncation_radius=5\nlearning_rate=0.02\nepochs=7\nseed=2\n"
        )
        cfg = load_train_config(path)
        assert cfg.K == 36
        assert cfg.kernel.sigma == 4.0
        assert cfg.kernel.variant is KernelVariant.LITERAL_PAPER
        assert cfg.kernel.truncation_radius == 5
        assert cfg.learning_rate == 0.02
        assert cfg.epochs == 7

    def test_train_config_identity_kernel(self, tmp_path):
        path = tmp_path / "train.cfg"
        path.write_text("K=12\nkernel=identity\n")
        assert load_train_config(path).kernel is None

    def test_train_config_requires_k(self, tmp_path):
        path = tmp_path / "train.cfg"
        path.write_text("epochs=3\n")
        with pytest.raises(InputError, match="must set K"):
            load_train_config(path)

    def test_train_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "train.cfg"
        path.write_text("K=12\nlr=0.5\n")
        with pytest.raises(InputError, match="unknown train config key"):
            load_train_config(path)
