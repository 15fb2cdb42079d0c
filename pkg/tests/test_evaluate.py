"""Tests for cuesync.evaluate module."""

import math

import numpy as np
import pytest

from cuesync.annot_io import Frame, HandTrack
from cuesync.errors import (
    InstantOutOfRangeError,
    LengthMismatchError,
    MissingClassError,
    MissingTrackError,
    TooFewSentencesError,
)
from cuesync.evaluate import (
    MHCD_SUMMARY_COLUMNS,
    POLAR_COLUMNS,
    REPORT_COLUMNS,
    EvalReport,
    PolarSample,
    centroid_position_classifier,
    classify,
    compare_predictors,
    evaluate_predictor,
    fit_centroids,
    from_polar,
    hand_distances,
    mhcd,
    mhcd_summary,
    mse_matrix,
    mse_norm,
    polar_frame,
    reports_frame,
    sample_track,
    split_sentences,
    to_polar,
)
from cuesync.measures import Subset, assemble_table
from cuesync.normalize import NormPolicy, descriptive_stats, normalize_table
from cuesync.regression import HptPredictor, Line, Variant, fit_predictor
from cuesync.synth import GroundTruthModel, gen_corpus, reference_profiles


def _line_track(fps=10.0, n=11):
    """Hand moves 10 px right per frame; the lip center stays at (640, 360)."""
    frames = [Frame(i / fps, (640.0, 360.0), (10.0 * i, 0.0)) for i in range(n)]
    return HandTrack(fps, tuple(frames))


def _samples(points_by_class):
    samples = []
    for cls, points in points_by_class.items():
        for x, y in points:
            samples.append(PolarSample("a", cls, math.hypot(x, y), math.atan2(y, x)))
    return samples


CLUSTERS = {
    1: [(200.0, -60.0), (210.0, -50.0)],
    2: [(40.0, 0.0), (45.0, 5.0)],
    3: [(40.0, -120.0), (35.0, -125.0)],
    4: [(60.0, -240.0), (65.0, -235.0)],
    5: [(140.0, 100.0), (135.0, 105.0)],
}


def _cloud(rng, n, spread):
    """n points per class scattered around the CLUSTERS means."""
    return {
        cls: rng.normal(np.mean(points, axis=0), spread, (n, 2)) for cls, points in CLUSTERS.items()
    }


@pytest.fixture(scope="module")
def split(small_table):
    return split_sentences(small_table, (4, 1), seed=0)


@pytest.fixture(scope="module")
def predictors(small_table, split):
    """Predictors fit on the training sentences of small_table."""
    train = small_table.select_sentences(split[0])
    normalized = normalize_table(train, descriptive_stats(train, "per-cuer"), NormPolicy.PER_CUER)
    return {
        variant: fit_predictor(normalized, variant=variant)
        for variant in (Variant.COMBINED, Variant.LVE, Variant.MEAN, Variant.AUDIO)
    } | {Variant.GROUND_TRUTH: HptPredictor(Variant.GROUND_TRUTH, groups=normalized.norm_stats)}


@pytest.fixture(scope="module")
def reports(small_table, small_corpus, split, predictors):
    return {
        variant: evaluate_predictor(small_table, predictor, small_corpus.tracks, split)
        for variant, predictor in predictors.items()
    }


class TestSplitSentences:
    """Tests for split_sentences function."""

    def test_stratified_and_disjoint(self, small_table):
        train, test = split_sentences(small_table, (4, 1), seed=0)

        assert not set(train) & set(test)
        assert len(train) + len(test) == len(small_table.sentence_keys())
        for cuer in ("NF1", "NF2", "NM1", "DF1", "DM1"):
            assert sum(1 for c, _ in test if c == cuer) == 4

    def test_seeded(self, small_table):
        assert split_sentences(small_table, seed=7) == split_sentences(small_table, seed=7)
        assert split_sentences(small_table, seed=7) != split_sentences(small_table, seed=8)

    def test_too_few_sentences(self, small_table):
        keys = small_table.sentence_keys()[:3]
        with pytest.raises(TooFewSentencesError):
            split_sentences(small_table.select_sentences(keys), (4, 1))


class TestMetrics:
    """Tests for mse_norm, sample_track and the distance metrics."""

    def test_mse(self):
        assert mse_norm([1.0, 2.0], [1.0, 4.0]) == pytest.approx(2.0)

    def test_mse_known_value(self):
        assert mse_norm([0.5, -0.5], [0.0, 0.0]) == 0.25

    def test_mse_ignores_order(self):
        rng = np.random.default_rng(3)
        pred, truth = rng.normal(size=200), rng.normal(size=200)
        order = rng.permutation(200)

        shuffled = mse_norm(pred[order], truth[order])

        assert shuffled == pytest.approx(mse_norm(pred, truth), rel=1e-12)

    def test_mse_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            mse_norm([1.0, 2.0], [1.0])

    def test_mse_empty(self):
        with pytest.raises(LengthMismatchError):
            mse_norm([], [])

    def test_nearest_frame_tie_goes_earlier(self):
        hand, lip = sample_track(_line_track(), [0.05, 0.06, 0.3])

        assert hand[:, 0].tolist() == [0.0, 10.0, 30.0]
        assert lip.tolist() == [[640.0, 360.0]] * 3

    def test_interpolated(self):
        hand, _ = sample_track(_line_track(), [0.05, 0.25], interpolate=True)
        assert hand[:, 0] == pytest.approx([5.0, 25.0])

    def test_out_of_range(self):
        with pytest.raises(InstantOutOfRangeError):
            sample_track(_line_track(), [1.5])

    def test_hand_distances(self):
        track = _line_track()

        distances = hand_distances(track, [0.1, 0.5], [0.3, 0.5])

        assert distances.tolist() == [20.0, 0.0]
        assert mhcd(track, [0.1, 0.5], [0.3, 0.5]) == pytest.approx(10.0)

    def test_mhcd_known_values(self):
        frames = [Frame(0.0, (0.0, 0.0), (0.0, 0.0)), Frame(0.1, (0.0, 0.0), (3.0, 4.0))]
        track = HandTrack(10.0, frames)

        assert mhcd(track, [0.0], [0.1]) == 5.0
        assert mhcd(track, [0.0, 0.1], [0.0, 0.1]) == 0.0

    def test_mhcd_scales_with_timing_error(self):
        gt = [0.1, 0.2, 0.3, 0.4, 0.5]

        distance = mhcd(_line_track(), gt, [t + 0.1 for t in gt])

        assert distance == pytest.approx(10.0)

    def test_distance_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            hand_distances(_line_track(), [0.1, 0.2], [0.1])


class TestPolar:
    """Tests for the polar coordinate helpers."""

    def test_right_is_zero(self):
        assert to_polar((740.0, 360.0), (640.0, 360.0)) == pytest.approx((100.0, 0.0))

    def test_up_is_positive(self):
        r, theta = to_polar((640.0, 260.0), (640.0, 360.0))
        assert r == pytest.approx(100.0)
        assert theta == pytest.approx(math.pi / 2)

    def test_origin(self):
        assert to_polar((640.0, 360.0), (640.0, 360.0)) == (0.0, 0.0)

    def test_inverse(self):
        r, theta = to_polar((700.5, 451.25), (640.0, 360.0))
        assert from_polar(r, theta, (640.0, 360.0)) == pytest.approx((700.5, 451.25))

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            PolarSample("a", 6, 10.0, 0.0)
        with pytest.raises(ValueError):
            PolarSample("a", 1, -1.0, 0.0)
        with pytest.raises(ValueError):
            PolarSample("a", 1, 1.0, -math.pi)


class TestCentroidClassifier:
    """Tests for the nearest-centroid position classifier."""

    def test_separated_clusters(self):
        samples = _samples(CLUSTERS)
        assert centroid_position_classifier(samples, samples) == 1.0

    def test_centroids_shape(self):
        centroids = fit_centroids(_samples(CLUSTERS))
        assert centroids.shape == (5, 2)
        assert centroids[1] == pytest.approx([42.5, 2.5])

    def test_missing_class(self):
        partial = {k: v for k, v in CLUSTERS.items() if k != 3}
        with pytest.raises(MissingClassError):
            fit_centroids(_samples(partial))

    def test_tie_goes_to_lowest_class(self):
        centroids = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 50.0], [0.0, 60.0], [0.0, 70.0]])
        (sample,) = _samples({4: [(5.0, 0.0)]})

        assert classify(centroids, [sample]).tolist() == [1]

    def test_rotation_about_lip_center(self):
        rng = np.random.default_rng(12)
        train, test = _cloud(rng, 40, 60.0), _cloud(rng, 40, 60.0)
        angle = 0.7
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])

        def rotated(points_by_class):
            return {c: [rotation @ p for p in pts] for c, pts in points_by_class.items()}

        accuracy = centroid_position_classifier(_samples(train), _samples(test))
        turned = centroid_position_classifier(_samples(rotated(train)), _samples(rotated(test)))

        assert 0.0 < accuracy < 1.0
        assert turned == accuracy

    def test_coincident_centroids_give_chance(self):
        same = {cls: CLUSTERS[1] for cls in CLUSTERS}
        assert centroid_position_classifier(_samples(same), _samples(same)) == pytest.approx(0.2)

    def test_indistinguishable_classes_score_near_chance(self):
        rng = np.random.default_rng(13)

        def cloud():
            return {cls: rng.normal((100.0, 0.0), 40.0, (2000, 2)) for cls in CLUSTERS}

        accuracy = centroid_position_classifier(_samples(cloud()), _samples(cloud()))

        assert accuracy == pytest.approx(0.2, abs=0.03)

    def test_no_test_samples(self):
        with pytest.raises(ValueError):
            centroid_position_classifier(_samples(CLUSTERS), [])


class TestEvaluatePredictor:
    """Tests for evaluate_predictor on a generated corpus."""

    def test_ground_truth_is_perfect(self, reports):
        report = reports[Variant.GROUND_TRUTH]

        assert report.e_hpt == pytest.approx(0.0, abs=1e-20)
        assert report.d_hpt_px == 0.0
        assert report.position_accuracy >= 0.95

    def test_model_beats_baselines(self, reports):
        combined = reports[Variant.COMBINED].e_hpt

        assert combined < reports[Variant.LVE].e_hpt < reports[Variant.MEAN].e_hpt
        assert reports[Variant.MEAN].e_hpt < reports[Variant.AUDIO].e_hpt
        assert reports[Variant.COMBINED].d_hpt_px < reports[Variant.AUDIO].d_hpt_px

        distance = {variant: report.d_hpt_px for variant, report in reports.items()}
        assert distance[Variant.COMBINED] < distance[Variant.LVE] < distance[Variant.MEAN]

    def test_position_accuracy_ordering(self, reports):
        accuracy = {variant: report.position_accuracy for variant, report in reports.items()}

        assert accuracy[Variant.GROUND_TRUTH] >= accuracy[Variant.COMBINED]
        assert accuracy[Variant.COMBINED] > accuracy[Variant.AUDIO]

    def test_per_cuer_scores(self, reports):
        report = reports[Variant.COMBINED]

        assert sorted(report.per_cuer) == ["DF1", "DM1", "NF1", "NF2", "NM1"]
        assert sum(s.n_rows for s in report.per_cuer.values()) == len(report.rows)

    def test_overall_scores_pool_per_cuer_scores(self, reports):
        for report in reports.values():
            scores = list(report.per_cuer.values())
            rows = sum(s.n_rows for s in scores)
            classified = sum(s.n_classified for s in scores)

            e_hpt = sum(s.n_rows * s.e_hpt for s in scores) / rows
            d_hpt = sum(s.n_rows * s.d_hpt_px for s in scores) / rows
            accuracy = sum(s.n_classified * s.position_accuracy for s in scores) / classified

            assert abs(report.e_hpt - e_hpt) < 1e-9
            assert abs(report.d_hpt_px - d_hpt) < 1e-9
            assert abs(report.position_accuracy - accuracy) < 1e-9

    def test_scores_only_test_sentences(self, reports, split):
        rows = reports[Variant.COMBINED].rows
        keys = set(zip(rows["cuer_id"], rows["sentence_id"]))
        assert keys <= set(split[1])

    def test_subset(self, small_table, small_corpus, split, predictors):
        report = evaluate_predictor(
            small_table, predictors[Variant.LVE], small_corpus.tracks, split, subset=Subset.DEAF
        )

        assert report.subset == "DEAF"
        assert sorted(report.per_cuer) == ["DF1", "DM1"]

    def test_missing_track(self, small_table, small_corpus, split, predictors):
        tracks = dict(small_corpus.tracks)
        tracks.pop(split[1][0])
        with pytest.raises(MissingTrackError):
            evaluate_predictor(small_table, predictors[Variant.MEAN], tracks, split)

    def test_report_validation(self):
        with pytest.raises(ValueError):
            EvalReport("mean@ALL", "ALL", e_hpt=1.0, d_hpt_px=3.0, position_accuracy=1.5)


class TestReportFrames:
    """Tests for the comparison and report emission helpers."""

    def test_compare_keeps_order(self, small_table, small_corpus, split, predictors):
        order = [predictors[Variant.AUDIO], predictors[Variant.COMBINED]]

        reports = compare_predictors(small_table, order, small_corpus.tracks, split)

        assert [r.predictor_id for r in reports] == ["audio@ALL", "combined@ALL"]

    def test_reports_frame(self, reports):
        frame = reports_frame([reports[Variant.COMBINED]])

        assert list(frame.columns) == REPORT_COLUMNS
        assert frame["cuer"].tolist() == ["ALL", "DF1", "DM1", "NF1", "NF2", "NM1"]

    def test_polar_frame(self, reports):
        frame = polar_frame([reports[Variant.GROUND_TRUTH]])

        assert list(frame.columns) == POLAR_COLUMNS
        assert (frame["r_px"] >= 0).all()
        assert frame["position_class"].between(1, 5).all()

    def test_mhcd_summary(self, reports):
        frame = mhcd_summary([reports[Variant.AUDIO]])

        assert list(frame.columns) == MHCD_SUMMARY_COLUMNS
        assert (frame["min"] <= frame["median"]).all()
        assert (frame["median"] <= frame["max"]).all()

    def test_mse_matrix(self, small_table, split, predictors):
        chosen = [predictors[Variant.COMBINED], predictors[Variant.MEAN]]

        frame = mse_matrix(small_table, chosen, split[1])

        assert frame.index.tolist() == ["ALL", "NORMAL", "DEAF"]
        assert list(frame.columns) == ["combined@ALL", "mean@ALL"]
        assert (frame["combined@ALL"] < frame["mean@ALL"]).all()


@pytest.fixture(scope="module")
def two_population_table():
    """Normal cuers follow the default model; deaf cuers lag differently and are rarer."""
    profiles = reference_profiles()
    deaf_model = GroundTruthModel(f0_left=Line(0.5, 0.3), f1=Line(-1.0, -0.6))
    normal = gen_corpus(profiles[:3], n_sentences=80, seed=21)
    deaf = gen_corpus(profiles[3:], deaf_model, n_sentences=40, seed=22)
    return assemble_table(normal.timelines + deaf.timelines)


class TestSubsetModels:
    """Group-specific models against one model fit on everybody."""

    def test_deaf_model_helps_deaf_cuers_most(self, two_population_table):
        train_keys, test_keys = split_sentences(two_population_table, (4, 1), seed=0)
        train = two_population_table.select_sentences(train_keys)
        normalized = normalize_table(
            train, descriptive_stats(train, "per-cuer"), NormPolicy.PER_CUER
        )
        fitted = [fit_predictor(normalized, subset=s) for s in ("ALL", "NORMAL", "DEAF")]

        matrix = mse_matrix(two_population_table, fitted, test_keys)

        deaf_gain = 1 - matrix.loc["DEAF", "combined@DEAF"] / matrix.loc["DEAF", "combined@ALL"]
        normal_gain = (
            1 - matrix.loc["NORMAL", "combined@NORMAL"] / matrix.loc["NORMAL", "combined@ALL"]
        )
        assert deaf_gain > 0.1
        assert deaf_gain > normal_gain
