import json
import math
from pathlib import Path

import numpy as np
import pytest

from ringview.augment import read_image_rgb8, replay, write_image_png
from ringview.cli import main
from ringview.manifest import read_manifest


def write_models(path: Path, n: int) -> Path:
    path.write_text("".join(f"model-{i:02d}\n" for i in range(n)))
    return path


def make_input_images(directory: Path, count: int = 3, size: int = 48) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(12)
    paths = []
    for i in range(count):
        img = rng.integers(0, 256, (size, size, 3)).astype(np.uint8)
        path = directory / f"img_{i}.png"
        write_image_png(img, path)
        paths.append(path)
    return paths


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestGenJobs:
    def test_line_count_and_split(self, tmp_path):
        models = write_models(tmp_path / "models.txt", 4)
        out = tmp_path / "jobs.jsonl"
        rc = main(["gen-jobs", "--models", str(models), "--tier", "complex-directional",
                   "--seed", "7", "--out", str(out), "--holdout", "3"])
        assert rc == 0
        assert sum(1 for _ in open(out)) == 4 * 1800
        split = json.loads((tmp_path / "jobs.split.json").read_text())
        assert len(split["train_model_ids"]) == 3
        assert split["test_model_ids"] == ["model-03"]

    def test_full_scale_91_models(self, tmp_path):
        models = write_models(tmp_path / "models.txt", 91)
        out = tmp_path / "jobs.jsonl"
        rc = main(["gen-jobs", "--models", str(models), "--seed", "0", "--out", str(out)])
        assert rc == 0
        assert sum(1 for _ in open(out)) == 163_800

    def test_rerun_byte_identical(self, tmp_path):
        models = write_models(tmp_path / "models.txt", 2)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (a, b):
            assert main(["gen-jobs", "--models", str(models), "--seed", "3",
                         "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_models_file_is_exit_2(self, tmp_path):
        rc = main(["gen-jobs", "--models", str(tmp_path / "nope.txt"),
                   "--out", str(tmp_path / "jobs.jsonl")])
        assert rc == 2


class TestGlyphs:
    def test_stratified_uniform_360(self, tmp_path):
        out = tmp_path / "m.csv"
        rc = main(["glyphs", "--n", "360", "--k", "360", "--seed", "1", "--out", str(out)])
        assert rc == 0
        manifest = read_manifest(out)
        assert sorted(r.azimuth_bin for r in manifest) == list(range(360))

    def test_render_dir_writes_pngs(self, tmp_path):
        out = tmp_path / "m.csv"
        renders = tmp_path / "renders"
        rc = main(["glyphs", "--n", "4", "--k", "36", "--seed", "1", "--out", str(out),
                   "--size", "16", "--render-dir", str(renders)])
        assert rc == 0
        assert len(list(renders.glob("*.png"))) == 4

    def test_weights_file_distribution(self, tmp_path):
        weights = tmp_path / "w.txt"
        weights.write_text("\n".join(["1"] * 4))
        out = tmp_path / "m.csv"
        rc = main(["glyphs", "--n", "8", "--k", "4", "--seed", "0", "--out", str(out),
                   "--dist", str(weights)])
        assert rc == 0
        assert len(read_manifest(out)) == 8


class TestAugmentCommand:
    def test_empty_input_dir_is_exit_2(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        cfg = tmp_path / "aug.cfg"
        cfg.write_text("jpeg_quality=90\n")
        rc = main(["augment", "--in", str(empty), "--config", str(cfg), "--seed", "1",
                   "--out", str(tmp_path / "out"), "--audit", str(tmp_path / "audit.jsonl")])
        assert rc == 2
        assert "no images" in capsys.readouterr().err

    def test_audit_line_count_matches_images(self, tmp_path):
        make_input_images(tmp_path / "in", count=3)
        cfg = tmp_path / "aug.cfg"
        cfg.write_text("jpeg_quality=90\nocclusion_fraction=1.0\n")
        audit = tmp_path / "audit.jsonl"
        rc = main(["augment", "--in", str(tmp_path / "in"), "--config", str(cfg),
                   "--seed", "4", "--out", str(tmp_path / "out"), "--audit", str(audit)])
        assert rc == 0
        lines = audit.read_text().splitlines()
        assert len(lines) == 3

    def test_replay_from_audit_reproduces_outputs(self, tmp_path):
        inputs = make_input_images(tmp_path / "in", count=3)
        cfg = tmp_path / "aug.cfg"
        cfg.write_text("jpeg_quality=80\nocclusion_fraction=0.7\ncrop_prob=0.6\n")
        audit = tmp_path / "audit.jsonl"
        out_dir = tmp_path / "out"
        assert main(["augment", "--in", str(tmp_path / "in"), "--config", str(cfg),
                     "--seed", "4", "--out", str(out_dir), "--audit", str(audit)]) == 0
        by_name = {p.name: p for p in inputs}
        for line in audit.read_text().splitlines():
            record = json.loads(line)
            source = read_image_rgb8(by_name[record["image"]])
            replayed = replay(source, record)
            written = read_image_rgb8(out_dir / record["output"])
            assert np.array_equal(replayed, written)


class TestBalanceCommand:
    def _manifests(self, tmp_path):
        real = tmp_path / "real.csv"
        pool = tmp_path / "pool.csv"
        # heavily peaked set: everything in bin 0
        weights = tmp_path / "w.txt"
        weights.write_text("1\n" + "\n".join(["0"] * 35))
        assert main(["glyphs", "--n", "2050", "--k", "36", "--seed", "1", "--out", str(real),
                     "--dist", str(weights)]) == 0
        assert main(["glyphs", "--n", str(36 * 60), "--k", "36", "--seed", "2",
                     "--out", str(pool), "--id-prefix", "synth", "--source", "synthetic"]) == 0
        return real, pool

    def test_budget_2000_logged(self, tmp_path, capsys):
        real, pool = self._manifests(tmp_path)
        out = tmp_path / "combined.csv"
        plan = tmp_path / "plan.jsonl"
        rc = main(["balance", "--manifest", str(real), "--pool", str(pool),
                   "--method", "adaptive", "--k", "36", "--budget", "2000",
                   "--seed", "3", "--out", str(out), "--plan-out", str(plan)])
        assert rc == 0
        assert "total_additions=2000" in capsys.readouterr().out
        record = json.loads(plan.read_text())
        assert record["total_additions"] == 2000
        assert len(read_manifest(out)) == 2050 + 2000

    def test_random_method_requires_n_additions(self, tmp_path):
        real, pool = self._manifests(tmp_path)
        rc = main(["balance", "--manifest", str(real), "--pool", str(pool),
                   "--method", "random", "--k", "36", "--seed", "3",
                   "--out", str(tmp_path / "c.csv")])
        assert rc == 2


class TestTrainEvalReport:
    @pytest.fixture()
    def tiny_sets(self, tmp_path):
        train_csv = tmp_path / "train.csv"
        test_csv = tmp_path / "test.csv"
        assert main(["glyphs", "--n", "72", "--k", "36", "--seed", "8",
                     "--out", str(train_csv), "--size", "32"]) == 0
        assert main(["glyphs", "--n", "36", "--k", "36", "--seed", "9",
                     "--out", str(test_csv), "--size", "32"]) == 0
        return train_csv, test_csv

    def test_sm_vs_wsm_rows_comparable(self, tiny_sets, tmp_path):
        train_csv, test_csv = tiny_sets
        table = {}
        for loss in ("sm", "wsm"):
            model = tmp_path / f"{loss}.bin"
            rc = main(["train", "--manifest", str(train_csv), "--loss", loss,
                       "--sigma", "2", "--k", "36", "--epochs", "2", "--lr", "0.05",
                       "--batch", "16", "--seed", "1", "--size", "32",
                       "--out", str(model)])
            assert rc == 0
            rc = main(["eval", "--model", str(model), "--manifest", str(test_csv),
                       "--out", str(tmp_path / f"run_{loss}")])
            assert rc == 0
        rc = main(["report", "--run", f"sm={tmp_path / 'run_sm'}",
                   "--run", f"wsm={tmp_path / 'run_wsm'}",
                   "--out-dir", str(tmp_path / "report")])
        assert rc == 0
        lines = (tmp_path / "report" / "mae_table.csv").read_text().splitlines()
        assert lines[0] == "label,median_angular_error_deg,accuracy_entropy,n_evaluated"
        assert len(lines) == 3
        for line in lines[1:]:
            label, mae, entropy, n = line.split(",")
            assert 0.0 <= float(mae) <= 180.0
            assert float(entropy) <= math.log(36) + 1e-9
            assert int(n) == 36

    def test_eval_perfect_predictions_gives_zero_mae(self, tiny_sets, tmp_path, capsys):
        _, test_csv = tiny_sets
        manifest = read_manifest(test_csv)
        pred_csv = tmp_path / "pred.csv"
        with open(pred_csv, "w") as fh:
            fh.write("sample_id,pred_deg\n")
            for row in manifest:
                fh.write(f"{row.sample_id},{row.azimuth_deg!r}\n")
        rc = main(["eval", "--pred", str(pred_csv), "--manifest", str(test_csv),
                   "--out", str(tmp_path / "perfect")])
        assert rc == 0
        report = (tmp_path / "perfect.report.txt").read_text()
        assert "median_angular_error_deg: 0.0" in report

    def test_eval_missing_prediction_is_exit_2(self, tiny_sets, tmp_path):
        _, test_csv = tiny_sets
        pred_csv = tmp_path / "pred.csv"
        pred_csv.write_text("sample_id,pred_deg\nglyph-000000,1.0\n")
        rc = main(["eval", "--pred", str(pred_csv), "--manifest", str(test_csv),
                   "--out", str(tmp_path / "x")])
        assert rc == 2

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_train_divergence_is_exit_3(self, tiny_sets, tmp_path):
        train_csv, _ = tiny_sets
        rc = main(["train", "--manifest", str(train_csv), "--loss", "sm", "--k", "36",
                   "--epochs", "5", "--lr", "1e160", "--hidden", "8", "--batch", "16",
                   "--seed", "0", "--size", "32", "--out", str(tmp_path / "m.bin")])
        assert rc == 3

    def test_train_with_config_file(self, tiny_sets, tmp_path):
        train_csv, _ = tiny_sets
        cfg = tmp_path / "train.cfg"
        cfg.write_text("K=36\nkernel=von_mises\nsigma=2.0\nepochs=1\nbatch_size=16\n"
                       "learning_rate=0.05\nimage_size=32\nseed=4\n")
        model = tmp_path / "m.bin"
        log = tmp_path / "log.csv"
        rc = main(["train", "--manifest", str(train_csv), "--config", str(cfg),
                   "--out", str(model), "--log", str(log)])
        assert rc == 0
        assert log.read_text().splitlines()[0] == "epoch,loss,train_mae"

    def test_report_figures_written(self, tiny_sets, tmp_path):
        train_csv, test_csv = tiny_sets
        model = tmp_path / "m.bin"
        assert main(["train", "--manifest", str(train_csv), "--loss", "sm", "--k", "36",
                     "--epochs", "1", "--lr", "0.05", "--batch", "16", "--seed", "1",
                     "--size", "32", "--out", str(model)]) == 0
        assert main(["eval", "--model", str(model), "--manifest", str(test_csv),
                     "--out", str(tmp_path / "run")]) == 0
        out_dir = tmp_path / "figs"
        rc = main(["report", "--run", f"sm={tmp_path / 'run'}", "--out-dir", str(out_dir),
                   "--manifest", str(train_csv)])
        assert rc == 0
        names = {p.name for p in out_dir.iterdir()}
        assert {"mae_table.csv", "mae_table.txt", "sm_bins.csv", "sm_accuracy.png",
                "mae_comparison.png", "label_histogram.png"} <= names

    def test_report_no_figures_flag(self, tiny_sets, tmp_path):
        train_csv, test_csv = tiny_sets
        model = tmp_path / "m.bin"
        assert main(["train", "--manifest", str(train_csv), "--loss", "sm", "--k", "36",
                     "--epochs", "1", "--lr", "0.05", "--batch", "16", "--seed", "1",
                     "--size", "32", "--out", str(model)]) == 0
        assert main(["eval", "--model", str(model), "--manifest", str(test_csv),
                     "--out", str(tmp_path / "run")]) == 0
        out_dir = tmp_path / "nofigs"
        assert main(["report", "--run", f"sm={tmp_path / 'run'}",
                     "--out-dir", str(out_dir), "--no-figures"]) == 0
        assert not list(out_dir.glob("*.png"))
