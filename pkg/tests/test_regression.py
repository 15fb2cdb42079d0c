"""Tests for cuesync.regression module."""

from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from cuesync.errors import (
    DegenerateDesignError,
    EmptyGroupError,
    EmptySideError,
    NonpositiveInputError,
    SchemaViolationError,
    TooFewPointsError,
    UnfittedPredictorError,
)
from cuesync.measures import MeasureTable, Subset, assemble_table
from cuesync.normalize import Grouping, NormPolicy, descriptive_stats, normalize_table
from cuesync.regression import (
    DEFAULT_GAMMA,
    PREDICTION_COLUMNS,
    F1F2Estimator,
    HptPredictor,
    Line,
    LinearModel,
    PiecewiseLveModel,
    Variant,
    denormalize_hpt,
    fit_f0,
    fit_predictor,
    lambda_weights,
    ols_fit,
    predict_hand_instant,
    predict_hpt_norm,
    predict_table,
    search_gamma,
    table_lambdas,
)
from cuesync.synth import GroundTruthModel, SynthOptions, gen_corpus, reference_profiles
from tests.conftest import make_timeline


def _normalized(table: MeasureTable, policy=NormPolicy.PER_CUER) -> MeasureTable:
    return normalize_table(table, descriptive_stats(table, policy.grouping), policy)


def _synthetic(lve_log, hpt_z) -> MeasureTable:
    """A minimal normalized table carrying only what f0 needs."""
    frame = pd.DataFrame({"lve_log": lve_log, "hpt_z": hpt_z, "lvd_z": 0.0, "lvi_log": 0.0})
    return MeasureTable(frame, norm_policy="per-cuer")


@pytest.fixture(scope="module")
def recovery_corpus():
    """Exact-time corpus whose generator truth the fits should recover."""
    options = SynthOptions(quantum=None)
    return gen_corpus(reference_profiles(), n_sentences=150, seed=3, options=options)


@pytest.fixture(scope="module")
def truth_normalized(recovery_corpus):
    """recovery_corpus normalized with the generating statistics."""
    table = assemble_table(recovery_corpus.timelines)
    return normalize_table(table, recovery_corpus.true_stats(), NormPolicy.PER_CUER)


class TestOlsFit:
    """Tests for ols_fit function."""

    def test_exact_line(self):
        x = np.array([0.0, 1.0, 2.0, 3.0])

        model = ols_fit(x, 2.0 * x - 1.0)

        assert model.slope == pytest.approx(2.0)
        assert model.intercept == pytest.approx(-1.0)
        assert model.residual_mse == pytest.approx(0.0, abs=1e-20)
        assert model.n == 4

    def test_matches_polyfit(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=50)
        y = 0.5 * x + rng.normal(size=50)

        model = ols_fit(x, y)

        slope, intercept = np.polyfit(x, y, 1)
        assert model.slope == pytest.approx(slope)
        assert model.intercept == pytest.approx(intercept)
        assert model.slope_se > 0

    def test_residuals_satisfy_normal_equations(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(-1.0, 1.0, 500)
        y = 1.3 * x - 0.4 + rng.normal(0.0, 0.5, 500)

        model = ols_fit(x, y)

        residuals = y - model(x)
        assert abs(residuals.sum()) < 1e-9
        assert abs(np.dot(residuals, x)) < 1e-9

    def test_slope_converges(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=10_000)
        y = 0.8 * x + 0.1 + rng.normal(0.0, 0.2, 10_000)

        model = ols_fit(x, y)

        assert abs(model.slope - 0.8) < 0.01
        assert abs(model.intercept - 0.1) < 0.01

    def test_too_few_points(self):
        with pytest.raises(TooFewPointsError):
            ols_fit([1.0], [2.0])

    def test_constant_x(self):
        with pytest.raises(DegenerateDesignError):
            ols_fit([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])

    def test_fitted_line_needs_two_points(self):
        with pytest.raises(TooFewPointsError):
            LinearModel(1.0, 0.0, n=1, residual_mse=0.0)


class TestPiecewiseLve:
    """Tests for fit_f0, PiecewiseLveModel and search_gamma."""

    def test_boundary_belongs_to_left(self):
        model = PiecewiseLveModel(-0.3, Line(0.0, 1.0), Line(0.0, -1.0))
        assert model(np.array([-0.3, -0.29])).tolist() == [1.0, -1.0]

    def test_fits_each_side(self):
        lve_log = np.linspace(-1.0, 0.2, 61)
        hpt_z = np.where(lve_log <= -0.4, 2.0 * lve_log + 1.0, -0.5 * lve_log)

        model = fit_f0(_synthetic(lve_log, hpt_z), gamma=-0.4)

        assert model.left.slope == pytest.approx(2.0)
        assert model.right.slope == pytest.approx(-0.5)
        assert model.residual_mse == pytest.approx(0.0, abs=1e-20)

    def test_empty_side(self):
        lve_log = np.linspace(-0.2, 0.2, 10)
        with pytest.raises(EmptySideError):
            fit_f0(_synthetic(lve_log, lve_log), gamma=-0.34)

    def test_search_finds_true_breakpoint(self):
        lve_log = np.round(np.linspace(-1.0, 0.2, 121), 10)
        hpt_z = np.where(lve_log <= -0.5, 3.0 * lve_log + 2.0, 0.2 * lve_log - 0.3)

        best, curve = search_gamma(_synthetic(lve_log, hpt_z))

        assert best == pytest.approx(-0.5)
        assert all(mse >= 0 for _, mse in curve)
        assert dict(curve)[best] == pytest.approx(0.0, abs=1e-20)

    def test_unnormalized_table(self, small_table):
        with pytest.raises(SchemaViolationError):
            fit_f0(small_table)


class TestLambdaWeights:
    """Tests for lambda_weights and table_lambdas."""

    def test_sum_to_one_and_bounded(self):
        rng = np.random.default_rng(0)
        n = 100_000
        alpha = rng.uniform(0.05, 2.0, n)
        beta = rng.uniform(0.05, 1.0, n)
        alpha_bar = rng.uniform(0.1, 1.0, n)
        beta_bar = rng.uniform(0.1, 1.0, n)

        lam1, lam2 = lambda_weights(alpha, beta, alpha_bar, beta_bar)

        assert np.abs(lam1 + lam2 - 1.0).max() <= 1e-12
        assert ((lam1 > 0) & (lam1 < 1)).all()

    def test_monotone(self):
        rng = np.random.default_rng(1)
        n = 10_000
        low, high = np.sort(rng.uniform(0.05, 2.0, (2, n)), axis=0)
        beta = rng.uniform(0.05, 1.0, n)
        alpha_bar = rng.uniform(0.1, 1.0, n)
        beta_bar = rng.uniform(0.1, 1.0, n)

        lam1_low, _ = lambda_weights(low, beta, alpha_bar, beta_bar)
        lam1_high, _ = lambda_weights(high, beta, alpha_bar, beta_bar)
        _, lam2_short = lambda_weights(beta, low, alpha_bar, beta_bar)
        _, lam2_long = lambda_weights(beta, high, alpha_bar, beta_bar)

        assert (lam1_high >= lam1_low).all()
        assert (lam2_long >= lam2_short).all()

    def test_weights_follow_sentence_means(self):
        assert lambda_weights(0.5, 0.3, 1.0, 0.3) == pytest.approx((1 / 3, 2 / 3), rel=1e-12)

    def test_average_row_is_even(self):
        assert lambda_weights(0.5, 0.3, 0.5, 0.3) == pytest.approx((0.5, 0.5))

    def test_nonpositive(self):
        with pytest.raises(NonpositiveInputError):
            lambda_weights(0.0, 0.3, 0.5, 0.3)

    def test_singleton_sentence(self):
        table = assemble_table([make_timeline(lip=[(0.5, 0.8, "a")], hand=[(0.1, 0.3)])])

        lam1, lam2 = table_lambdas(table)

        assert lam1.tolist() == [0.0]
        assert lam2.tolist() == [1.0]


class TestFitPredictor:
    """Tests for fit_predictor function."""

    @pytest.mark.parametrize("variant", list(Variant))
    def test_every_variant_fits(self, small_table, variant):
        predictor = fit_predictor(_normalized(small_table), variant=variant)

        assert predictor.variant is variant
        assert predictor.predictor_id == f"{variant.value}@ALL"
        assert len(predictor.groups) == 5

    def test_unnormalized(self, small_table):
        with pytest.raises(SchemaViolationError):
            fit_predictor(small_table)

    def test_empty_subset(self, small_table):
        normal_only = _normalized(small_table.subset(Subset.NORMAL))
        with pytest.raises(EmptyGroupError):
            fit_predictor(normal_only, subset=Subset.DEAF)

    def test_missing_model(self):
        with pytest.raises(UnfittedPredictorError):
            HptPredictor(Variant.COMBINED, f0=None)

    def test_recovers_generator_coefficients(self, truth_normalized):
        truth = GroundTruthModel()

        predictor = fit_predictor(truth_normalized, estimator=F1F2Estimator.JOINT)

        pairs = [
            (predictor.f0.left, truth.f0_left),
            (predictor.f1, truth.f1),
            (predictor.f2, truth.f2),
        ]
        for fitted, expected in pairs:
            assert abs(fitted.slope - expected.slope) < max(4 * fitted.slope_se, 0.05)
            assert abs(fitted.intercept - expected.intercept) < max(4 * fitted.intercept_se, 0.05)

    def test_noiseless_recovery_is_exact(self):
        profiles = [replace(p, residual_sigma=0.0) for p in reference_profiles()]
        corpus = gen_corpus(profiles, n_sentences=30, seed=8, options=SynthOptions(quantum=None))
        table = normalize_table(
            assemble_table(corpus.timelines), corpus.true_stats(), NormPolicy.PER_CUER
        )
        truth = GroundTruthModel()

        predictor = fit_predictor(table, estimator=F1F2Estimator.JOINT)

        for fitted, expected in [
            (predictor.f0.left, truth.f0_left),
            (predictor.f1, truth.f1),
            (predictor.f2, truth.f2),
        ]:
            assert fitted.slope == pytest.approx(expected.slope, rel=1e-6, abs=1e-6)
            assert fitted.intercept == pytest.approx(expected.intercept, rel=1e-6, abs=1e-6)

    def test_json_round_trip(self, small_table):
        predictor = fit_predictor(_normalized(small_table), subset="DEAF", gamma=-0.3)

        again = HptPredictor.from_json("# cuesync 1.0.0 config=x\n" + predictor.to_json())

        assert again == predictor
        assert again.predictor_id == "combined@DEAF"

    def test_json_rejects_garbage(self):
        with pytest.raises(SchemaViolationError):
            HptPredictor.from_json('{"variant": "combined"}')


class TestPrediction:
    """Tests for predict_hpt_norm and predict_table."""

    def test_baselines(self, small_table):
        table = _normalized(small_table)
        stats = {s.group_key: s for s in table.norm_stats}

        mean = predict_hpt_norm(HptPredictor(Variant.MEAN, groups=table.norm_stats), table)
        audio = predict_hpt_norm(HptPredictor(Variant.AUDIO, groups=table.norm_stats), table)
        gt = predict_hpt_norm(HptPredictor(Variant.GROUND_TRUTH), table)

        assert (mean == 0).all()
        first = stats[table.frame["cuer_id"].iloc[0]]
        assert audio[0] == pytest.approx(-first.mu_hpt / first.sigma_hpt)
        assert np.array_equal(gt, table.column("hpt_z"))

    def test_audio_predicts_zero_seconds(self, small_table):
        table = _normalized(small_table)

        frame = predict_table(HptPredictor(Variant.AUDIO), table)

        assert np.allclose(frame["hpt_pred_s"], 0.0)
        assert np.allclose(frame["T_pred_s"], frame["t_mid_s"])

    def test_ground_truth_reproduces_hand_instants(self, small_table):
        table = _normalized(small_table)

        frame = predict_table(HptPredictor(Variant.GROUND_TRUTH), table)

        assert list(frame.columns) == PREDICTION_COLUMNS
        assert np.array_equal(frame["T_pred_s"], table.column("T_mid_s"))

    def test_combined_matches_generator_model(self, truth_normalized):
        model = GroundTruthModel()
        predictor = model.as_predictor(list(truth_normalized.norm_stats))

        predicted = predict_hpt_norm(predictor, truth_normalized)

        truth = truth_normalized.frame
        residual = truth["hpt_z"].to_numpy() - predicted
        # what remains is the generator's own noise, sigma 0.3
        assert residual.std() == pytest.approx(0.3, abs=0.03)

    def test_left_branch_uses_f0(self, truth_normalized):
        predictor = fit_predictor(truth_normalized)
        left = truth_normalized.column("lve_log") <= predictor.gamma

        predicted = predict_hpt_norm(predictor, truth_normalized)

        expected = predictor.f0.left(truth_normalized.column("lve_log")[left])
        assert np.allclose(predicted[left], expected)

    def test_default_gamma(self, small_table):
        assert fit_predictor(_normalized(small_table)).gamma == DEFAULT_GAMMA

    def test_per_group_policy(self, small_table):
        table = _normalized(small_table, NormPolicy.PER_GROUP)

        predictor = fit_predictor(table, variant="lve")

        assert predictor.norm_policy is NormPolicy.PER_GROUP
        assert {g.group_key for g in predictor.groups} == {"NORMAL", "DEAF"}


class TestDenormalize:
    """Tests for denormalize_hpt and predict_hand_instant."""

    def test_inverse_of_zscore(self, small_table):
        (stats,) = descriptive_stats(small_table, Grouping.ALL)
        assert denormalize_hpt(1.0, stats) == pytest.approx(stats.mu_hpt + stats.sigma_hpt)
        assert denormalize_hpt(0.0, stats) == pytest.approx(stats.mu_hpt)

    def test_hand_instant(self):
        assert predict_hand_instant(1.25, 0.25) == pytest.approx(1.0)
