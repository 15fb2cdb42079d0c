"""
Evaluation - score HPT predictors on held-out sentences.

Three scores per predictor:
    e_hpt   mean squared error of the normalized HPT prediction
    d_hpt   mean distance (px) between the hand point at the true and at the
            predicted hand target instant (MHCD)
    accuracy of a nearest-centroid hand-position classifier fed the hand
            position, relative to the lip center, at the predicted instant

Hand positions are expressed in polar coordinates around the lip center with
the image y-axis flipped, so "up" is positive theta.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from cuesync.annot_io import DEFAULT_POSITION_MAP, HandTrack
from cuesync.errors import (
    InstantOutOfRangeError,
    LengthMismatchError,
    MissingClassError,
    MissingTrackError,
    TooFewSentencesError,
)
from cuesync.measures import MeasureTable, Subset
from cuesync.normalize import normalize_table
from cuesync.regression import HptPredictor, predict_table

logger = logging.getLogger(__name__)

POSITION_CLASSES = (1, 2, 3, 4, 5)

REPORT_COLUMNS = ["predictor", "subset", "cuer", "e_hpt", "d_hpt_px", "position_accuracy"]
POLAR_COLUMNS = ["predictor", "cuer", "vowel", "position_class", "r_px", "theta_rad"]
MHCD_SUMMARY_COLUMNS = ["predictor", "cuer", "n", "min", "q1", "median", "q3", "max"]

ALL_CUERS = "ALL"

SentenceKey = tuple[str, str]


@dataclass(frozen=True)
class CuerScores:
    """Scores restricted to one cuer's rows."""

    e_hpt: float
    d_hpt_px: float
    position_accuracy: float
    n_rows: int
    n_classified: int


@dataclass
class EvalReport:
    """
    Scores of one predictor on one evaluated subset.

    e_hpt and d_hpt_px average over every scored row, so the overall values pool
    the per-cuer ones weighted by n_rows. position_accuracy only counts rows
    whose vowel has a position class and pools by n_classified instead.

    `rows` keeps the per-syllable detail (errors, distances, polar positions)
    the summary scores were computed from.
    """

    predictor_id: str
    subset: str
    e_hpt: float
    d_hpt_px: float
    position_accuracy: float
    per_cuer: dict[str, CuerScores] = field(default_factory=dict)
    rows: pd.DataFrame | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.e_hpt < 0 or self.d_hpt_px < 0:
            raise ValueError("e_hpt and d_hpt_px must be non-negative")
        if not 0.0 <= self.position_accuracy <= 1.0:
            raise ValueError(f"position_accuracy out of range: {self.position_accuracy}")


@dataclass(frozen=True)
class PolarSample:
    """A hand position relative to the lip center, tagged with its position class."""

    vowel_label: str
    position_class: int
    r: float
    theta: float

    def __post_init__(self):
        if self.position_class not in POSITION_CLASSES:
            raise ValueError(f"position class must be 1..5, got {self.position_class}")
        if self.r < 0:
            raise ValueError(f"r must be non-negative, got {self.r}")
        if not -math.pi < self.theta <= math.pi:
            raise ValueError(f"theta must lie in (-pi, pi], got {self.theta}")


# ─────────────────────────────────────────────────────────────────────────────
# Splitting
# ─────────────────────────────────────────────────────────────────────────────


def split_sentences(
    table: MeasureTable, ratio: tuple[int, int] = (4, 1), seed: int = 0
) -> tuple[list[SentenceKey], list[SentenceKey]]:
    """
    Split sentences into train and test sets, stratified per cuer.

    Each cuer contributes round(n·test/(train+test)) test sentences, drawn by a
    seeded permutation of its sorted sentence ids.

    Raises:
        TooFewSentencesError: A cuer has fewer sentences than train+test.
    """
    n_train_parts, n_test_parts = ratio
    if n_train_parts <= 0 or n_test_parts <= 0:
        raise ValueError(f"split ratio parts must be positive, got {ratio}")
    parts = n_train_parts + n_test_parts

    by_cuer: dict[str, list[str]] = {}
    for cuer_id, sentence_id in table.sentence_keys():
        by_cuer.setdefault(cuer_id, []).append(sentence_id)

    rng = np.random.default_rng(seed)
    train: list[SentenceKey] = []
    test: list[SentenceKey] = []
    for cuer_id in sorted(by_cuer):
        sentences = sorted(by_cuer[cuer_id])
        n = len(sentences)
        if n < parts:
            raise TooFewSentencesError(
                f"cuer {cuer_id!r} has {n} sentence(s), a {n_train_parts}:{n_test_parts} "
                f"split needs at least {parts}"
            )
        n_test = int(round(n * n_test_parts / parts))
        order = rng.permutation(n)
        test_idx = set(order[:n_test].tolist())
        for i, sentence_id in enumerate(sentences):
            (test if i in test_idx else train).append((cuer_id, sentence_id))
    return train, test


# ─────────────────────────────────────────────────────────────────────────────
# Metrics
# ─────────────────────────────────────────────────────────────────────────────


def mse_norm(predictions, truth) -> float:
    """Mean squared error between normalized predictions and truth."""
    predictions = np.asarray(predictions, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predictions.shape != truth.shape:
        raise LengthMismatchError(f"{len(predictions)} predictions vs {len(truth)} truth values")
    if len(truth) == 0:
        raise LengthMismatchError("no predictions to score")
    diff = predictions - truth
    return float(np.mean(diff * diff))


def sample_track(
    track: HandTrack, instants, interpolate: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """
    Hand point and lip center at each instant.

    Nearest-frame lookup by default (ties go to the earlier frame); linear
    interpolation between frames when interpolate is set.

    Returns:
        (hand_xy, lip_xy), each of shape (k, 2).

    Raises:
        InstantOutOfRangeError: An instant lies outside the track.
    """
    t = np.atleast_1d(np.asarray(instants, dtype=float))
    times = track.times
    outside = (t < times[0]) | (t > times[-1])
    if outside.any():
        raise InstantOutOfRangeError(
            f"instant {t[outside][0]:.4f}s outside track [{times[0]:.4f}, {times[-1]:.4f}]s"
        )

    if interpolate:
        hand = np.column_stack([np.interp(t, times, track.hand_xy[:, k]) for k in (0, 1)])
        lip = np.column_stack([np.interp(t, times, track.lip_xy[:, k]) for k in (0, 1)])
        return hand, lip

    if len(times) == 1:
        idx = np.zeros(len(t), dtype=int)
    else:
        after = np.clip(np.searchsorted(times, t, side="left"), 1, len(times) - 1)
        before = after - 1
        idx = np.where(t - times[before] <= times[after] - t, before, after)
    return track.hand_xy[idx], track.lip_xy[idx]


def hand_distances(
    track: HandTrack, gt_instants, pred_instants, interpolate: bool = False
) -> np.ndarray:
    """Per-syllable distance (px) between the hand at true and predicted instants."""
    gt_instants = np.atleast_1d(np.asarray(gt_instants, dtype=float))
    pred_instants = np.atleast_1d(np.asarray(pred_instants, dtype=float))
    if gt_instants.shape != pred_instants.shape:
        raise LengthMismatchError(
            f"{len(gt_instants)} true instants vs {len(pred_instants)} predicted"
        )
    gt_hand, _ = sample_track(track, gt_instants, interpolate)
    pred_hand, _ = sample_track(track, pred_instants, interpolate)
    return np.hypot(*(gt_hand - pred_hand).T)


def mhcd(track: HandTrack, gt_instants, pred_instants, interpolate: bool = False) -> float:
    """Mean hand coordinate distance over paired instants."""
    distances = hand_distances(track, gt_instants, pred_instants, interpolate)
    if len(distances) == 0:
        raise LengthMismatchError("no instants to compare")
    return float(distances.mean())


def to_polar(hand_point: tuple[float, float], lip_center: tuple[float, float]):
    """(r, theta) of a hand point around the lip center, image y flipped."""
    dx = hand_point[0] - lip_center[0]
    dy = lip_center[1] - hand_point[1]
    r = math.hypot(dx, dy)
    if r == 0:
        return 0.0, 0.0
    return r, math.atan2(dy, dx)


def from_polar(r: float, theta: float, lip_center: tuple[float, float]):
    """Image coordinates of a polar position around the lip center."""
    return lip_center[0] + r * math.cos(theta), lip_center[1] - r * math.sin(theta)


def polar_arrays(hand_xy: np.ndarray, lip_xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized to_polar over rows of (k, 2) arrays."""
    dx = hand_xy[:, 0] - lip_xy[:, 0]
    dy = lip_xy[:, 1] - hand_xy[:, 1]
    r = np.hypot(dx, dy)
    theta = np.where(r == 0, 0.0, np.arctan2(dy, dx))
    return r, theta


# ─────────────────────────────────────────────────────────────────────────────
# Position classifier
# ─────────────────────────────────────────────────────────────────────────────


def _cartesian(samples: list[PolarSample]) -> np.ndarray:
    r = np.array([s.r for s in samples], dtype=float)
    theta = np.array([s.theta for s in samples], dtype=float)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def fit_centroids(train: list[PolarSample]) -> np.ndarray:
    """
    Per-class centroid, in lip-relative Cartesian coordinates.

    Returns:
        Array of shape (5, 2); row k is the centroid of class k+1.

    Raises:
        MissingClassError: A position class has no training sample.
    """
    points = _cartesian(train)
    classes = np.array([s.position_class for s in train], dtype=int)
    missing = [c for c in POSITION_CLASSES if not (classes == c).any()]
    if missing:
        raise MissingClassError(f"no training samples for position class(es) {missing}")
    return np.array([points[classes == c].mean(axis=0) for c in POSITION_CLASSES])


def classify(centroids: np.ndarray, samples: list[PolarSample]) -> np.ndarray:
    """Nearest-centroid class of each sample; ties go to the lowest class."""
    if not samples:
        return np.zeros(0, dtype=int)
    points = _cartesian(samples)
    distances = np.linalg.norm(points[:, None, :] - centroids[None, :, :], axis=2)
    return np.array(POSITION_CLASSES)[np.argmin(distances, axis=1)]


def centroid_position_classifier(train: list[PolarSample], test: list[PolarSample]) -> float:
    """Fraction of test samples assigned to their own position class."""
    if not test:
        raise ValueError("no test samples to classify")
    assigned = classify(fit_centroids(train), test)
    truth = np.array([s.position_class for s in test])
    return float(np.mean(assigned == truth))


# ─────────────────────────────────────────────────────────────────────────────
# Predictor comparison
# ─────────────────────────────────────────────────────────────────────────────


def _predicted_rows(
    table: MeasureTable,
    predictor: HptPredictor,
    tracks: dict[SentenceKey, HandTrack],
    position_map: dict[str, int],
    interpolate: bool,
) -> pd.DataFrame:
    """Per-row predictions, hand samples and polar positions at predicted instants."""
    normalized = normalize_table(table, list(predictor.groups), predictor.norm_policy)
    frame = predict_table(predictor, normalized)
    frame["hearing"] = normalized.frame["hearing"].to_numpy()
    frame["hpt_z"] = normalized.column("hpt_z").astype(float)
    frame["T_mid_s"] = normalized.column("T_mid_s").astype(float)

    n = len(frame)
    distance = np.zeros(n)
    r = np.zeros(n)
    theta = np.zeros(n)
    sentences = frame.groupby(["cuer_id", "sentence_id"], sort=False).indices
    for (cuer_id, sentence_id), idx in sentences.items():
        track = tracks.get((cuer_id, sentence_id))
        if track is None:
            raise MissingTrackError(f"no landmark track for {cuer_id}/{sentence_id}")
        gt = frame["T_mid_s"].to_numpy()[idx]
        pred = frame["T_pred_s"].to_numpy()[idx]
        distance[idx] = hand_distances(track, gt, pred, interpolate)
        hand, lip = sample_track(track, pred, interpolate)
        r[idx], theta[idx] = polar_arrays(hand, lip)

    frame["distance_px"] = distance
    frame["r_px"] = r
    frame["theta_rad"] = theta
    frame["position_class"] = [position_map.get(label, 0) for label in frame["label"]]
    return frame


def samples_from_rows(frame: pd.DataFrame) -> list[PolarSample]:
    """PolarSamples of the rows whose vowel has a known position class."""
    known = frame[frame["position_class"] > 0]
    return [
        PolarSample(row.label, int(row.position_class), float(row.r_px), float(row.theta_rad))
        for row in known.itertuples(index=False)
    ]


def _cuer_scores(rows: pd.DataFrame) -> CuerScores:
    classified = rows["correct"].dropna()
    return CuerScores(
        e_hpt=mse_norm(rows["hpt_z_pred"], rows["hpt_z"]),
        d_hpt_px=float(rows["distance_px"].mean()),
        position_accuracy=float(classified.mean()) if len(classified) else 0.0,
        n_rows=len(rows),
        n_classified=len(classified),
    )


def evaluate_predictor(
    table: MeasureTable,
    predictor: HptPredictor,
    tracks: dict[SentenceKey, HandTrack],
    split: tuple[list[SentenceKey], list[SentenceKey]],
    position_map: dict[str, int] | None = None,
    subset: Subset | str = Subset.ALL,
    interpolate: bool = False,
) -> EvalReport:
    """
    Score one predictor on the test side of a split.

    The position classifier is trained on the predictor's own hand positions
    over the training sentences and applied to the test sentences.

    Raises:
        MissingTrackError: A scored sentence has no landmark track.
        InstantOutOfRangeError: A predicted instant falls outside its track.
        MissingClassError: The training sentences miss a position class.
    """
    position_map = position_map or DEFAULT_POSITION_MAP
    subset = Subset(subset)
    train_keys, test_keys = split

    train_rows = _predicted_rows(
        table.select_sentences(train_keys), predictor, tracks, position_map, interpolate
    )
    test_table = table.select_sentences(test_keys).subset(subset)
    if len(test_table) == 0:
        raise LengthMismatchError(f"no {subset.value} rows in the test sentences")
    rows = _predicted_rows(test_table, predictor, tracks, position_map, interpolate)

    centroids = fit_centroids(samples_from_rows(train_rows))
    known = rows["position_class"].to_numpy() > 0
    correct = np.full(len(rows), np.nan)
    assigned = classify(centroids, samples_from_rows(rows))
    correct[known] = (assigned == rows["position_class"].to_numpy()[known]).astype(float)
    rows["correct"] = correct

    overall = _cuer_scores(rows)
    per_cuer = {
        str(cuer_id): _cuer_scores(group) for cuer_id, group in rows.groupby("cuer_id", sort=True)
    }
    logger.info(
        "%s on %s: e_hpt=%.4f d_hpt=%.2fpx acc=%.3f",
        predictor.predictor_id,
        subset.value,
        overall.e_hpt,
        overall.d_hpt_px,
        overall.position_accuracy,
    )
    return EvalReport(
        predictor_id=predictor.predictor_id,
        subset=subset.value,
        e_hpt=overall.e_hpt,
        d_hpt_px=overall.d_hpt_px,
        position_accuracy=overall.position_accuracy,
        per_cuer=per_cuer,
        rows=rows,
    )


def compare_predictors(
    table: MeasureTable,
    predictors: list[HptPredictor],
    tracks: dict[SentenceKey, HandTrack],
    split: tuple[list[SentenceKey], list[SentenceKey]],
    position_map: dict[str, int] | None = None,
    subset: Subset | str = Subset.ALL,
    interpolate: bool = False,
) -> list[EvalReport]:
    """One EvalReport per predictor, in the order the predictors were given."""
    return [
        evaluate_predictor(table, p, tracks, split, position_map, subset, interpolate)
        for p in predictors
    ]


def mse_matrix(
    table: MeasureTable, predictors: list[HptPredictor], test_keys: list[SentenceKey]
) -> pd.DataFrame:
    """
    e_hpt of every predictor on every evaluated subset of the test sentences.

    Rows are the subsets present (ALL, NORMAL, DEAF); columns are predictor ids.
    """
    test_table = table.select_sentences(test_keys)
    matrix: dict[str, dict[str, float]] = {}
    for predictor in predictors:
        column = {}
        for subset in Subset:
            rows = test_table.subset(subset)
            if len(rows) == 0:
                continue
            normalized = normalize_table(rows, list(predictor.groups), predictor.norm_policy)
            pred = predict_table(predictor, normalized)["hpt_z_pred"]
            column[subset.value] = mse_norm(pred, normalized.column("hpt_z"))
        matrix[predictor.predictor_id] = column
    frame = pd.DataFrame(matrix)
    frame.index.name = "subset"
    return frame


# ─────────────────────────────────────────────────────────────────────────────
# Report emission
# ─────────────────────────────────────────────────────────────────────────────


def reports_frame(reports: list[EvalReport]) -> pd.DataFrame:
    """Summary rows: each report's ALL row followed by its per-cuer rows."""
    records = []
    for report in reports:
        records.append(
            [report.predictor_id, report.subset, ALL_CUERS, report.e_hpt, report.d_hpt_px,
             report.position_accuracy]
        )  # fmt: skip
        for cuer_id, scores in sorted(report.per_cuer.items()):
            records.append(
                [report.predictor_id, report.subset, cuer_id, scores.e_hpt, scores.d_hpt_px,
                 scores.position_accuracy]
            )  # fmt: skip
    return pd.DataFrame(records, columns=REPORT_COLUMNS)


def polar_frame(reports: list[EvalReport]) -> pd.DataFrame:
    """Hand positions at predicted instants of test syllables with a known class."""
    frames = []
    for report in reports:
        rows = report.rows[report.rows["position_class"] > 0]
        frames.append(
            pd.DataFrame(
                {
                    "predictor": report.predictor_id,
                    "cuer": rows["cuer_id"].to_numpy(),
                    "vowel": rows["label"].to_numpy(),
                    "position_class": rows["position_class"].to_numpy(),
                    "r_px": rows["r_px"].to_numpy(),
                    "theta_rad": rows["theta_rad"].to_numpy(),
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=POLAR_COLUMNS)
    return pd.concat(frames, ignore_index=True)[POLAR_COLUMNS]


def mhcd_summary(reports: list[EvalReport]) -> pd.DataFrame:
    """Five-number summary of hand distances per predictor and cuer (box plot data)."""
    records = []
    for report in reports:
        groups = [(ALL_CUERS, report.rows)] + list(report.rows.groupby("cuer_id", sort=True))
        for cuer_id, rows in groups:
            d = rows["distance_px"].to_numpy(dtype=float)
            q = np.quantile(d, [0.0, 0.25, 0.5, 0.75, 1.0])
            records.append([report.predictor_id, str(cuer_id), len(d), *q.tolist()])
    return pd.DataFrame(records, columns=MHCD_SUMMARY_COLUMNS)


def frame_to_csv(frame: pd.DataFrame, index: bool = False) -> str:
    return frame.to_csv(index=index, lineterminator="\n")
