"""
HPT regression - fit and apply the normalized hand-preceding-time model.

In the normalized scale (Δ' z-scored HPT, δ' log10 LVE, α' log10 LVI,
β' z-scored LVD) the combined model is

    Δ' = f0(δ')                       when δ' <= gamma   (end of sentence)
    Δ' = λ1·f1(α') + λ2·f2(β')        otherwise

where f0, f1 and f2 are straight lines, f0 is fit separately on each side of
gamma, and the weights come from the raw interval and duration:

    C = mean(α)/mean(β) over the sentence,  λ1 = α/(α + Cβ),  λ2 = 1 - λ1

Baselines predict in the same normalized scale so every predictor is scored
against the same truth.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from cuesync.errors import (
    DegenerateDesignError,
    DegenerateGroupError,
    EmptyGroupError,
    EmptySideError,
    NonpositiveInputError,
    SchemaViolationError,
    TooFewPointsError,
    UnfittedPredictorError,
)
from cuesync.measures import LviSource, MeasureTable, Subset
from cuesync.normalize import GroupStats, NormPolicy, lookup_stats, row_group_keys

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = -0.34

# Grid searched by search_gamma, log10 seconds
GAMMA_SEARCH_RANGE = (-1.0, 0.2)
GAMMA_SEARCH_STEP = 0.01


class Variant(str, Enum):
    """Kinds of HPT predictor."""

    COMBINED = "combined"  # f0 | λ1·f1 + λ2·f2
    LVE = "lve"  # f0 on both sides of gamma
    LVE_LVI = "lve-lvi"  # f0 | f1
    LVE_LVD = "lve-lvd"  # f0 | f2
    MEAN = "mean"  # group mean HPT
    AUDIO = "audio"  # no hand lead at all
    GROUND_TRUTH = "ground-truth"  # the measured HPT itself


_REQUIRED_MODELS = {
    Variant.COMBINED: ("f0", "f1", "f2"),
    Variant.LVE: ("f0",),
    Variant.LVE_LVI: ("f0", "f1"),
    Variant.LVE_LVD: ("f0", "f2"),
    Variant.MEAN: (),
    Variant.AUDIO: (),
    Variant.GROUND_TRUTH: (),
}


class F1F2Rows(str, Enum):
    """Rows f1 and f2 are fit on."""

    RIGHT = "right"  # δ' > gamma only
    ALL = "all"


class F1F2Estimator(str, Enum):
    """How f1 and f2 are estimated."""

    SEPARATE = "separate"  # one univariate fit each
    JOINT = "joint"  # one least-squares fit of the λ-weighted design


@dataclass(frozen=True)
class Line:
    """A straight line y = slope·x + intercept."""

    slope: float
    intercept: float

    def __call__(self, x):
        return self.slope * x + self.intercept

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class LinearModel(Line):
    """A line fit by least squares, with its fit diagnostics."""

    n: int
    residual_mse: float
    slope_se: float = 0.0
    intercept_se: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise TooFewPointsError(f"a fitted line needs at least 2 points, got {self.n}")
        if self.residual_mse < 0:
            raise ValueError(f"residual_mse must be non-negative, got {self.residual_mse}")

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "n": self.n,
            "residual_mse": self.residual_mse,
            "slope_se": self.slope_se,
            "intercept_se": self.intercept_se,
        }


def line_from_dict(data: dict) -> Line:
    """Rebuild a Line, or a LinearModel when fit diagnostics are present."""
    if "n" in data:
        return LinearModel(
            slope=float(data["slope"]),
            intercept=float(data["intercept"]),
            n=int(data["n"]),
            residual_mse=float(data["residual_mse"]),
            slope_se=float(data.get("slope_se", 0.0)),
            intercept_se=float(data.get("intercept_se", 0.0)),
        )
    return Line(slope=float(data["slope"]), intercept=float(data["intercept"]))


@dataclass(frozen=True)
class PiecewiseLveModel:
    """f0: independent lines left (δ' <= gamma) and right (δ' > gamma) of the breakpoint."""

    gamma: float
    left: Line
    right: Line

    def __call__(self, lve_log):
        lve_log = np.asarray(lve_log, dtype=float)
        return np.where(lve_log <= self.gamma, self.left(lve_log), self.right(lve_log))

    @property
    def residual_mse(self) -> float:
        """Pooled residual MSE of both pieces."""
        if not (isinstance(self.left, LinearModel) and isinstance(self.right, LinearModel)):
            return 0.0
        sse = self.left.residual_mse * self.left.n + self.right.residual_mse * self.right.n
        return sse / (self.left.n + self.right.n)

    def to_dict(self) -> dict:
        return {"left": self.left.to_dict(), "right": self.right.to_dict()}


@dataclass(frozen=True)
class HptPredictor:
    """
    A fitted predictor variant together with the normalization it was fit under.

    Immutable once built; safe to share between threads.
    """

    variant: Variant
    subset: Subset = Subset.ALL
    gamma: float = DEFAULT_GAMMA
    f0: PiecewiseLveModel | None = None
    f1: Line | None = None
    f2: Line | None = None
    norm_policy: NormPolicy = NormPolicy.PER_CUER
    groups: tuple[GroupStats, ...] = field(default_factory=tuple)

    def __post_init__(self):
        missing = [name for name in _REQUIRED_MODELS[self.variant] if getattr(self, name) is None]
        if missing:
            raise UnfittedPredictorError(
                f"{self.variant.value} predictor is missing {', '.join(missing)}"
            )

    @property
    def predictor_id(self) -> str:
        """Stable identifier, e.g. combined@DEAF."""
        return f"{self.variant.value}@{self.subset.value}"

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value,
            "subset": self.subset.value,
            "gamma": self.gamma,
            "f0": self.f0.to_dict() if self.f0 else None,
            "f1": self.f1.to_dict() if self.f1 else None,
            "f2": self.f2.to_dict() if self.f2 else None,
            "norm_policy": self.norm_policy.value,
            "groups": [g.to_dict() for g in self.groups],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "HptPredictor":
        try:
            gamma = float(data["gamma"])
            f0 = data.get("f0")
            return cls(
                variant=Variant(data["variant"]),
                subset=Subset(data["subset"]),
                gamma=gamma,
                f0=(
                    PiecewiseLveModel(
                        gamma, line_from_dict(f0["left"]), line_from_dict(f0["right"])
                    )
                    if f0
                    else None
                ),
                f1=line_from_dict(data["f1"]) if data.get("f1") else None,
                f2=line_from_dict(data["f2"]) if data.get("f2") else None,
                norm_policy=NormPolicy(data["norm_policy"]),
                groups=tuple(GroupStats.from_dict(g) for g in data.get("groups", [])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaViolationError(f"invalid predictor document: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "HptPredictor":
        """Load a predictor saved by to_json. Leading '#' lines are skipped."""
        body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
        try:
            data = json.loads(body)
        except json.JSONDecodeError as e:
            raise SchemaViolationError(f"predictor is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise SchemaViolationError("predictor document must be a JSON object")
        return cls.from_dict(data)


# ─────────────────────────────────────────────────────────────────────────────
# Fitting
# ─────────────────────────────────────────────────────────────────────────────


def ols_fit(x, y) -> LinearModel:
    """
    Ordinary least-squares line through (x, y).

    Raises:
        TooFewPointsError: Fewer than 2 points.
        DegenerateDesignError: All x values are equal.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"x and y differ in shape: {x.shape} vs {y.shape}")
    n = len(x)
    if n < 2:
        raise TooFewPointsError(f"need at least 2 points, got {n}")

    x_mean = x.mean()
    y_mean = y.mean()
    dx = x - x_mean
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise DegenerateDesignError("x has zero variance")

    slope = float(np.dot(dx, y - y_mean) / sxx)
    intercept = float(y_mean - slope * x_mean)
    residuals = y - (slope * x + intercept)
    sse = float(np.dot(residuals, residuals))

    s2 = sse / (n - 2) if n > 2 else 0.0
    return LinearModel(
        slope=slope,
        intercept=intercept,
        n=n,
        residual_mse=sse / n,
        slope_se=float(np.sqrt(s2 / sxx)),
        intercept_se=float(np.sqrt(s2 * (1.0 / n + x_mean**2 / sxx))),
    )


def _require_normalized(table: MeasureTable) -> None:
    if not table.is_normalized:
        raise SchemaViolationError("measure table has not been normalized")


def fit_f0(table: MeasureTable, gamma: float = DEFAULT_GAMMA) -> PiecewiseLveModel:
    """
    Fit the piecewise LVE line: left on δ' <= gamma, right on δ' > gamma.

    Raises:
        EmptySideError: A side has fewer than 2 rows or only one distinct δ'.
    """
    _require_normalized(table)
    lve_log = table.column("lve_log").astype(float)
    hpt_z = table.column("hpt_z").astype(float)
    left = lve_log <= gamma

    pieces = []
    for side, mask in (("left", left), ("right", ~left)):
        try:
            pieces.append(ols_fit(lve_log[mask], hpt_z[mask]))
        except (TooFewPointsError, DegenerateDesignError) as e:
            raise EmptySideError(gamma, f"{side} side: {e}") from e
    return PiecewiseLveModel(gamma, pieces[0], pieces[1])


def search_gamma(
    table: MeasureTable,
    lo: float = GAMMA_SEARCH_RANGE[0],
    hi: float = GAMMA_SEARCH_RANGE[1],
    step: float = GAMMA_SEARCH_STEP,
) -> tuple[float, list[tuple[float, float]]]:
    """
    Grid-search the breakpoint minimizing f0's pooled residual MSE.

    Returns:
        (best gamma, [(gamma, mse), ...] for every grid point with both sides fittable).
        Ties resolve to the smallest gamma.

    Raises:
        EmptySideError: No grid point leaves both sides fittable.
    """
    n_steps = int(round((hi - lo) / step))
    grid = np.round(lo + step * np.arange(n_steps + 1), 10)

    curve = []
    for gamma in grid:
        try:
            model = fit_f0(table, float(gamma))
        except EmptySideError:
            continue
        curve.append((float(gamma), model.residual_mse))
    if not curve:
        raise EmptySideError(lo, f"no breakpoint in [{lo}, {hi}] splits the data")

    best = min(curve, key=lambda point: point[1])
    logger.debug("Best gamma %.2f (mse %.6f) over %d grid points", best[0], best[1], len(curve))
    return best[0], curve


def lambda_weights(alpha, beta, alpha_bar, beta_bar):
    """
    Weights of the LVI and LVD lines. Works on scalars and arrays.

    Returns:
        (λ1, λ2) with λ1 = α/(α + Cβ), C = ᾱ/β̄ and λ2 = 1 - λ1.

    Raises:
        NonpositiveInputError: Any input is zero or negative.
    """
    arrays = [np.asarray(v, dtype=float) for v in (alpha, beta, alpha_bar, beta_bar)]
    if any((a <= 0).any() for a in arrays):
        raise NonpositiveInputError("lambda weights need positive intervals and durations")
    a, b, a_bar, b_bar = arrays
    c_beta = (a_bar / b_bar) * b
    lam1 = a / (a + c_beta)
    lam2 = c_beta / (a + c_beta)
    if np.ndim(lam1) == 0:
        return float(lam1), float(lam2)
    return lam1, lam2


def table_lambdas(table: MeasureTable) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (λ1, λ2); one-syllable sentences get (0, 1)."""
    alpha_bar, beta_bar = table.sentence_means()
    lam1, lam2 = lambda_weights(
        table.column("lvi_s").astype(float),
        table.column("lvd_s").astype(float),
        alpha_bar,
        beta_bar,
    )
    lam1 = np.atleast_1d(lam1)
    lam2 = np.atleast_1d(lam2)
    singleton = table.column("lvi_source") == LviSource.IMPUTED_SINGLETON.value
    return np.where(singleton, 0.0, lam1), np.where(singleton, 1.0, lam2)


def _fit_joint(
    table: MeasureTable, lam1: np.ndarray, lam2: np.ndarray
) -> tuple[LinearModel, LinearModel]:
    """f1 and f2 from one least-squares fit of Δ' on [λ1α', λ1, λ2β', λ2]."""
    lvi_log = table.column("lvi_log").astype(float)
    lvd_z = table.column("lvd_z").astype(float)
    y = table.column("hpt_z").astype(float)
    n = len(y)
    if n < 4:
        raise TooFewPointsError(f"joint fit needs at least 4 rows, got {n}")

    design = np.column_stack([lam1 * lvi_log, lam1, lam2 * lvd_z, lam2])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise DegenerateDesignError("joint design matrix is rank deficient")

    residuals = y - design @ coef
    sse = float(np.dot(residuals, residuals))
    s2 = sse / (n - 4) if n > 4 else 0.0
    se = np.sqrt(np.diag(s2 * np.linalg.inv(design.T @ design)))

    f1 = LinearModel(float(coef[0]), float(coef[1]), n, sse / n, float(se[0]), float(se[1]))
    f2 = LinearModel(float(coef[2]), float(coef[3]), n, sse / n, float(se[2]), float(se[3]))
    return f1, f2


def fit_predictor(
    table: MeasureTable,
    subset: Subset | str = Subset.ALL,
    variant: Variant | str = Variant.COMBINED,
    gamma: float = DEFAULT_GAMMA,
    fit_f1f2_on: F1F2Rows | str = F1F2Rows.RIGHT,
    estimator: F1F2Estimator | str = F1F2Estimator.SEPARATE,
) -> HptPredictor:
    """
    Fit a predictor variant on one subset of a normalized table.

    Args:
        table: Normalized measure table (training rows).
        subset: ALL, NORMAL or DEAF rows.
        variant: Which predictor to build.
        gamma: f0 breakpoint in log10 seconds.
        fit_f1f2_on: Fit f1/f2 on rows right of gamma only, or on all rows.
        estimator: Separate univariate fits or one joint weighted fit (combined only).

    Raises:
        EmptyGroupError: The subset has no rows.
        EmptySideError, TooFewPointsError, DegenerateDesignError: Fit failures.
    """
    _require_normalized(table)
    subset = Subset(subset)
    variant = Variant(variant)
    fit_f1f2_on = F1F2Rows(fit_f1f2_on)
    estimator = F1F2Estimator(estimator)

    rows = table.subset(subset)
    if len(rows) == 0:
        raise EmptyGroupError(subset.value, "no rows to fit on")

    models: dict = {}
    needed = _REQUIRED_MODELS[variant]
    if "f0" in needed:
        models["f0"] = fit_f0(rows, gamma)

    if "f1" in needed or "f2" in needed:
        # λ weights use whole-sentence means, so compute them before selecting rows
        lam1, lam2 = table_lambdas(rows)
        if fit_f1f2_on is F1F2Rows.RIGHT:
            keep = rows.column("lve_log").astype(float) > gamma
        else:
            keep = np.ones(len(rows), dtype=bool)
        f1f2_rows = MeasureTable(rows.frame[keep].reset_index(drop=True))

        if variant is Variant.COMBINED and estimator is F1F2Estimator.JOINT:
            models["f1"], models["f2"] = _fit_joint(f1f2_rows, lam1[keep], lam2[keep])
        else:
            y = f1f2_rows.column("hpt_z").astype(float)
            if "f1" in needed:
                models["f1"] = ols_fit(f1f2_rows.column("lvi_log").astype(float), y)
            if "f2" in needed:
                models["f2"] = ols_fit(f1f2_rows.column("lvd_z").astype(float), y)

    logger.info("Fitted %s predictor on %d %s rows", variant.value, len(rows), subset.value)
    return HptPredictor(
        variant=variant,
        subset=subset,
        gamma=gamma,
        norm_policy=NormPolicy(table.norm_policy),
        groups=tuple(table.norm_stats),
        **models,
    )


# ─────────────────────────────────────────────────────────────────────────────
# Prediction
# ─────────────────────────────────────────────────────────────────────────────


def _row_stats(table: MeasureTable, column: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (mu, sigma) of hpt or lvd under the table's normalization."""
    keys = row_group_keys(table, table.norm_policy)
    stats = {key: lookup_stats(table.norm_stats, key) for key in dict.fromkeys(keys)}
    mu = np.array([getattr(stats[k], f"mu_{column}") for k in keys], dtype=float)
    sigma = np.array([getattr(stats[k], f"sigma_{column}") for k in keys], dtype=float)
    return mu, sigma


def predict_hpt_norm(predictor: HptPredictor, table: MeasureTable) -> np.ndarray:
    """
    Normalized HPT prediction Δ̂' for every row of a normalized table.

    The audio baseline is the z-score of 0 s under the table's own statistics;
    the mean baseline is 0. Rows at δ' == gamma belong to the LVE branch.
    """
    _require_normalized(table)
    variant = predictor.variant
    n = len(table)

    if variant is Variant.MEAN:
        return np.zeros(n)
    if variant is Variant.GROUND_TRUTH:
        return table.column("hpt_z").astype(float)
    if variant is Variant.AUDIO:
        mu, sigma = _row_stats(table, "hpt")
        return -mu / sigma

    lve_log = table.column("lve_log").astype(float)
    left = lve_log <= predictor.gamma
    f0 = predictor.f0

    if variant is Variant.LVE:
        return f0(lve_log)

    lvi_log = table.column("lvi_log").astype(float)
    lvd_z = table.column("lvd_z").astype(float)
    if variant is Variant.LVE_LVI:
        interior = predictor.f1(lvi_log)
    elif variant is Variant.LVE_LVD:
        interior = predictor.f2(lvd_z)
    else:
        lam1, lam2 = table_lambdas(table)
        interior = lam1 * predictor.f1(lvi_log) + lam2 * predictor.f2(lvd_z)
    return np.where(left, f0.left(lve_log), interior)


def denormalize_hpt(delta_prime, group: GroupStats):
    """Δ̂ in seconds from Δ̂' under one group's statistics."""
    if not group.sigma_hpt > 0:
        raise DegenerateGroupError(f"group {group.group_key!r} has sigma_hpt={group.sigma_hpt}")
    return delta_prime * group.sigma_hpt + group.mu_hpt


def predict_hand_instant(t_mid, hpt):
    """Hand target instant implied by a lip target instant and an HPT."""
    return t_mid - hpt


PREDICTION_COLUMNS = [
    "cuer_id",
    "sentence_id",
    "index",
    "label",
    "t_mid_s",
    "hpt_z_pred",
    "hpt_pred_s",
    "T_pred_s",
]


def predict_table(predictor: HptPredictor, table: MeasureTable) -> pd.DataFrame:
    """
    Predicted HPT (normalized and seconds) and hand target instant per row.

    The ground-truth pseudo-predictor returns the measured HPT and hand
    instant unchanged.
    """
    hpt_z_pred = predict_hpt_norm(predictor, table)
    t_mid = table.column("t_mid_s").astype(float)
    if predictor.variant is Variant.GROUND_TRUTH:
        hpt_pred = table.column("hpt_s").astype(float)
        t_pred = table.column("T_mid_s").astype(float)
    else:
        mu, sigma = _row_stats(table, "hpt")
        hpt_pred = hpt_z_pred * sigma + mu
        t_pred = predict_hand_instant(t_mid, hpt_pred)

    frame = table.frame[["cuer_id", "sentence_id", "index", "label", "t_mid_s"]].copy()
    frame["hpt_z_pred"] = hpt_z_pred
    frame["hpt_pred_s"] = hpt_pred
    frame["T_pred_s"] = t_pred
    return frame.reset_index(drop=True)
