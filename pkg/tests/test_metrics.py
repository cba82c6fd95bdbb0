import math

import numpy as np
import pytest

from ringview.circular import CircularLabelSpace
from ringview.errors import InputError
from ringview.glyph import make_glyph_dataset
from ringview.metrics import (
    accuracy_by_bin,
    accuracy_entropy,
    circular_error_deg,
    evaluate,
    label_histogram,
    median_angular_error,
    read_report_bins_csv,
    read_report_text,
    write_report_bins_csv,
    write_report_text,
)


class TestMedianAngularError:
    def test_perfect_predictions(self):
        gt = np.array([0.0, 90.0, 312.5])
        assert median_angular_error(gt, gt) == 0.0

    def test_hand_sorted_example(self):
        # errors 0, 10 (350 vs 0 wraps to 10), 10, 180 -> median 10
        pred = np.array([20.0, 350.0, 100.0, 0.0])
        gt = np.array([20.0, 0.0, 90.0, 180.0])
        assert median_angular_error(pred, gt) == 10.0

    def test_antipodal_worst_case(self):
        gt = np.array([10.0, 200.0, 355.0])
        assert median_angular_error(gt + 180.0, gt) == 180.0

    def test_even_count_averages_middle_pair(self):
        pred = np.array([0.0, 0.0])
        gt = np.array([0.0, 10.0])
        assert median_angular_error(pred, gt) == 5.0

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            median_angular_error([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(InputError):
            median_angular_error([0.0], [0.0, 1.0])

    def test_symmetry_and_wrap_invariance(self):
        rng = np.random.default_rng(2)
        pred = rng.uniform(0, 360, 101)
        gt = rng.uniform(0, 360, 101)
        assert median_angular_error(pred, gt) == median_angular_error(gt, pred)
        assert median_angular_error(pred + 360.0, gt) == pytest.approx(
            median_angular_error(pred, gt), abs=1e-9
        )
        assert np.all(circular_error_deg(pred, gt) <= 180.0)


class TestAccuracyByBin:
    def test_perfect_predictor_all_ones(self):
        gt = np.arange(0, 360, 0.5)
        bins = accuracy_by_bin(gt, gt)
        assert np.all(bins.accuracy == 1.0)
        assert bins.counts.sum() == gt.size

    def test_constant_predictor_enumeration(self):
        # predictor stuck at 5 deg; gt dense uniform; tolerance 10 deg
        gt = np.arange(0, 360, 0.25)
        pred = np.full_like(gt, 5.0)
        bins = accuracy_by_bin(pred, gt, n_bins=36, correct_within=10.0)
        assert bins.accuracy[0] == 1.0  # gt in [0,10): all within 10 of 5
        assert 0.0 < bins.accuracy[1] < 1.0  # gt in [10,20): only up to 15
        assert 0.0 < bins.accuracy[35] < 1.0  # gt in [350,360): only from 355
        assert np.all(bins.accuracy[2:35] == 0.0)

    def test_empty_bin_marked_missing(self):
        gt = np.array([5.0, 6.0])  # only bin 0 occupied
        pred = np.array([5.0, 6.0])
        bins = accuracy_by_bin(pred, gt)
        assert bins.accuracy[0] == 1.0
        assert np.all(np.isnan(bins.accuracy[1:]))
        assert np.all(bins.counts[1:] == 0)

    def test_weighted_mean_equals_overall_accuracy(self):
        rng = np.random.default_rng(8)
        gt = rng.uniform(0, 360, 500)
        pred = (gt + rng.normal(0, 20, 500)) % 360
        bins = accuracy_by_bin(pred, gt, correct_within=10.0)
        occupied = bins.counts > 0
        weighted = (bins.accuracy[occupied] * bins.counts[occupied]).sum() / bins.counts.sum()
        overall = (circular_error_deg(pred, gt) <= 10.0).mean()
        assert weighted == pytest.approx(overall, abs=1e-12)
        assert np.all((bins.accuracy[occupied] >= 0) & (bins.accuracy[occupied] <= 1))

    def test_bad_bin_count_rejected(self):
        with pytest.raises(InputError):
            accuracy_by_bin([0.0], [0.0], n_bins=7)


class TestAccuracyEntropy:
    def test_uniform_is_log_b(self):
        assert accuracy_entropy(np.full(36, 0.5)) == pytest.approx(math.log(36), abs=1e-12)

    def test_single_bin_is_zero(self):
        acc = np.zeros(36)
        acc[4] = 0.9
        assert accuracy_entropy(acc) == 0.0

    def test_hand_example(self):
        h = accuracy_entropy(np.array([0.5, 0.25, 0.25]))
        assert h == pytest.approx(1.0397, abs=1e-4)

    def test_missing_bins_excluded(self):
        acc = np.array([0.5, np.nan, 0.5])
        assert accuracy_entropy(acc) == pytest.approx(math.log(2), abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(InputError):
            accuracy_entropy(np.zeros(5))

    def test_maximal_iff_uniform(self):
        rng = np.random.default_rng(0)
        bound = math.log(12)
        for _ in range(100):
            acc = rng.uniform(0.01, 1.0, 12)
            h = accuracy_entropy(acc)
            assert h <= bound + 1e-12
            if not np.allclose(acc, acc[0]):
                assert h < bound


class TestLabelHistogram:
    def test_uniform_manifest_is_flat(self):
        space = CircularLabelSpace(36)
        manifest = make_glyph_dataset(360, np.full(36, 10), seed=1, space=space, jitter=False)
        hist = label_histogram(manifest, n_bins=36)
        assert np.all(hist == 10)
        assert hist.sum() == 360

    def test_bimodal_peaks(self):
        space = CircularLabelSpace(36)
        weights = np.ones(36)
        weights[0] = weights[18] = 40.0
        manifest = make_glyph_dataset(1000, weights, seed=2, space=space, jitter=False)
        hist = label_histogram(manifest, n_bins=36)
        assert hist[0] > hist[1:18].mean() * 5
        assert hist[18] > hist[19:].mean() * 5

    def test_empty_manifest(self):
        space = CircularLabelSpace(36)
        manifest = make_glyph_dataset(0, np.ones(36), seed=0, space=space)
        assert np.all(label_histogram(manifest) == 0)


class TestEvalReportIO:
    def test_text_and_csv_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        gt = rng.uniform(0, 360, 300)
        pred = (gt + rng.normal(0, 25, 300)) % 360
        report = evaluate(pred, gt)
        assert 0.0 <= report.median_angular_error_deg <= 180.0
        assert 0.0 <= report.accuracy_entropy <= math.log(36) + 1e-12

        text_path = tmp_path / "run.report.txt"
        bins_path = tmp_path / "run.bins.csv"
        write_report_text(report, text_path)
        write_report_bins_csv(report, bins_path)

        values = read_report_text(text_path)
        assert values["median_angular_error_deg"] == report.median_angular_error_deg
        assert values["accuracy_entropy"] == report.accuracy_entropy
        assert values["n_evaluated"] == report.n_evaluated

        bins = read_report_bins_csv(bins_path)
        np.testing.assert_array_equal(bins.counts, report.per_bin_counts)
        both_nan = np.isnan(bins.accuracy) & np.isnan(report.per_bin_accuracy)
        assert np.all(both_nan | (bins.accuracy == report.per_bin_accuracy))

    def test_missing_bin_written_as_empty_field(self, tmp_path):
        report = evaluate(np.array([5.0]), np.array([5.0]))
        path = tmp_path / "sparse.bins.csv"
        write_report_bins_csv(report, path)
        lines = path.read_text().splitlines()
        assert lines[1].startswith("0,0.0,1.0,1")
        assert lines[2] == "1,10.0,,0"
