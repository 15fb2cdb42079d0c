"""
Synthetic corpus generator - seeded Cued Speech timelines with known truth.

Each sentence is laid out on the lip stream first (vowel durations, consonant
gaps, pauses), then the hand target instants are placed by running the
normalized HPT model forward with the cuer's true statistics:

    Δ' = model(δ', α', β') + noise      Δ = μ_Δ + σ_Δ·Δ'      T = t - Δ

A landmark track moves the hand point linearly between the position anchors
of successive vowels, arriving at each anchor exactly at its hand target
instant. Everything the generator decides is recorded in a truth table so
analysis results can be checked against it.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import yaml

from cuesync.annot_io import (
    DEFAULT_POSITION_MAP,
    DEFAULT_VOWEL_LABELS,
    AnnotationTier,
    Frame,
    HandTrack,
    Hearing,
    PhoneInterval,
    SentenceTimeline,
    Stream,
    write_corpus,
    write_eaf,
    write_landmarks,
    write_textgrid,
)
from cuesync.errors import InvalidProfileError
from cuesync.measures import MEASURE_COLUMNS, NORMALIZED_COLUMNS, LviSource
from cuesync.normalize import GroupStats
from cuesync.regression import (
    DEFAULT_GAMMA,
    HptPredictor,
    Line,
    PiecewiseLveModel,
    Variant,
    lambda_weights,
)

logger = logging.getLogger(__name__)

TRUTH_EXTRA_COLUMNS = ["hpt_target_s", "model_z", "noise_z"]

# Hand position anchors relative to the lip center, image pixels (y down)
DEFAULT_ANCHORS = {
    1: (200.0, 60.0),  # side
    2: (40.0, 0.0),  # mouth
    3: (40.0, 120.0),  # chin
    4: (60.0, 240.0),  # throat
    5: (140.0, -100.0),  # cheek
}
REST_OFFSET = (250.0, 400.0)

# Iterations allowed to push hand targets apart before a profile is rejected
MAX_LAYOUT_PASSES = 500


@dataclass(frozen=True)
class GroundTruthModel:
    """Coefficients the generator uses for the normalized HPT model."""

    gamma: float = DEFAULT_GAMMA
    f0_left: Line = Line(1.5, 0.3)
    f0_right: Line = Line(-0.3, 0.1)
    f1: Line = Line(2.0, 0.8)
    f2: Line = Line(0.9, 0.0)

    @classmethod
    def null(cls) -> "GroundTruthModel":
        """A model predicting 0 everywhere, so Δ' is pure noise."""
        zero = Line(0.0, 0.0)
        return cls(gamma=DEFAULT_GAMMA, f0_left=zero, f0_right=zero, f1=zero, f2=zero)

    def predict_norm(self, lve_log, lvi_log, lvd_z, lam1, lam2) -> np.ndarray:
        interior = lam1 * self.f1(lvi_log) + lam2 * self.f2(lvd_z)
        return np.where(lve_log <= self.gamma, self.f0_left(lve_log), interior)

    def as_predictor(self, groups: list[GroupStats]) -> HptPredictor:
        """The combined predictor these coefficients define, under the given statistics."""
        return HptPredictor(
            variant=Variant.COMBINED,
            gamma=self.gamma,
            f0=PiecewiseLveModel(self.gamma, self.f0_left, self.f0_right),
            f1=self.f1,
            f2=self.f2,
            groups=tuple(groups),
        )

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "f0_left": self.f0_left.to_dict(),
            "f0_right": self.f0_right.to_dict(),
            "f1": self.f1.to_dict(),
            "f2": self.f2.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruthModel":
        defaults = cls()
        try:
            lines = {
                name: Line(float(data[name]["slope"]), float(data[name]["intercept"]))
                if name in data
                else getattr(defaults, name)
                for name in ("f0_left", "f0_right", "f1", "f2")
            }
            return cls(gamma=float(data.get("gamma", defaults.gamma)), **lines)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidProfileError(f"invalid model coefficients: {e}") from e


@dataclass(frozen=True)
class CuerProfile:
    """Generating parameters of one synthetic cuer. Times in seconds."""

    cuer_id: str
    hearing: Hearing
    mu_hpt: float
    sigma_hpt: float
    mu_lvd: float
    sigma_lvd: float
    pause_prob: float = 0.1
    pause_range: tuple[float, float] = (0.15, 0.5)
    syllables_mean: float = 10.6
    syllables_range: tuple[int, int] = (4, 27)
    residual_sigma: float = 0.3
    model: GroundTruthModel | None = None

    def validate(self) -> None:
        """Raises InvalidProfileError when a parameter is out of range."""
        lo, hi = self.syllables_range
        problems = []
        if not (self.sigma_hpt > 0 and self.sigma_lvd > 0):
            problems.append("standard deviations must be positive")
        if not self.mu_lvd > 0:
            problems.append("mean vowel duration must be positive")
        if not 0.0 <= self.pause_prob <= 1.0:
            problems.append("pause probability must lie in [0, 1]")
        if not 0.0 <= self.pause_range[0] <= self.pause_range[1]:
            problems.append("pause range must be ordered and non-negative")
        if not 1 <= lo <= hi <= 40:
            problems.append("syllable range must lie within [1, 40]")
        elif not lo <= self.syllables_mean <= hi:
            problems.append("mean syllable count outside the syllable range")
        if self.residual_sigma < 0:
            problems.append("residual sigma must be non-negative")
        if problems:
            raise InvalidProfileError(f"profile {self.cuer_id!r}: {'; '.join(problems)}")

    def true_stats(self, count: int = 2) -> GroupStats:
        return GroupStats(
            self.cuer_id, self.mu_hpt, self.sigma_hpt, self.mu_lvd, self.sigma_lvd, count
        )


def _reference_profile(cuer_id: str, hearing: Hearing, *ms: float) -> CuerProfile:
    mu_hpt, sigma_hpt, mu_lvd, sigma_lvd = (v / 1000 for v in ms)
    return CuerProfile(cuer_id, hearing, mu_hpt, sigma_hpt, mu_lvd, sigma_lvd)


def reference_profiles() -> list[CuerProfile]:
    """The five reference cuers: three hearing, two deaf (HPT and LVD in ms)."""
    return [
        _reference_profile("NF1", Hearing.NORMAL, 242, 177, 338, 79),
        _reference_profile("NF2", Hearing.NORMAL, 246, 150, 389, 94),
        _reference_profile("NM1", Hearing.NORMAL, 352, 137, 464, 144),
        _reference_profile("DF1", Hearing.DEAF, 154, 110, 365, 97),
        _reference_profile("DM1", Hearing.DEAF, 164, 105, 397, 101),
    ]


@dataclass(frozen=True)
class SynthOptions:
    """Layout and rendering knobs shared by all cuers."""

    fps: float = 30.0
    quantum: float | None = 0.001  # snap annotation times to this grid (None: exact)
    min_duration: float = 0.05
    consonant_gap: tuple[float, float] = (0.06, 0.16)
    lead_silence: tuple[float, float] = (1.0, 1.5)
    min_hand_sep: float = 0.02
    track_tail: float = 1.0
    release_after: float = 0.4
    dwell: float | None = None  # anchor hold in seconds (None: the vowel's hand-interval duration)
    lip_center: tuple[float, float] = (640.0, 360.0)
    anchor_jitter_px: float = 6.0
    vowel_labels: frozenset[str] = DEFAULT_VOWEL_LABELS
    position_map: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_POSITION_MAP))
    anchors: dict[int, tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_ANCHORS))


@dataclass
class SynthCorpus:
    """Generated timelines, their landmark tracks and the truth table."""

    timelines: list[SentenceTimeline]
    tracks: dict[tuple[str, str], HandTrack]
    truth: pd.DataFrame
    profiles: list[CuerProfile]

    def true_stats(self) -> list[GroupStats]:
        """Each profile's generating statistics, with its generated row count."""
        counts = self.truth.groupby("cuer_id").size()
        return [p.true_stats(int(counts.get(p.cuer_id, 2))) for p in self.profiles]


# ─────────────────────────────────────────────────────────────────────────────
# Generation
# ─────────────────────────────────────────────────────────────────────────────


def _truncated_normal(rng: np.random.Generator, mu: float, sigma: float, n: int, floor: float):
    values = rng.normal(mu, sigma, n)
    low = values < floor
    while low.any():
        values[low] = rng.normal(mu, sigma, int(low.sum()))
        low = values < floor
    return values


def _snap(values: np.ndarray, quantum: float | None) -> np.ndarray:
    if quantum is None:
        return values
    ticks = 1.0 / quantum
    return np.round(values * ticks) / ticks


def _lip_measures(starts: np.ndarray, ends: np.ndarray):
    """(t_mid, lve, lvi, lvd, sources) exactly as the analysis side defines them."""
    t_mid = (starts + ends) / 2
    lve = ends[-1] - t_mid
    lvd = ends - starts
    n = len(t_mid)
    if n == 1:
        return t_mid, lve, lvd.copy(), lvd, [LviSource.IMPUTED_SINGLETON]
    steps = np.diff(t_mid)
    lvi = np.concatenate([[steps.max()], steps])
    return t_mid, lve, lvi, lvd, [LviSource.IMPUTED_MAX] + [LviSource.MEASURED] * (n - 1)


def _hand_intervals(
    targets: np.ndarray, widths: np.ndarray, quantum: float | None
) -> tuple[np.ndarray, np.ndarray]:
    """Hand intervals centered on the targets, shrunk so neighbours never overlap."""
    if quantum is not None:
        ticks = 1.0 / quantum
        centers = np.round(targets * ticks)
        gaps = np.diff(centers)
        room = np.full(len(centers), np.inf)
        room[:-1] = gaps // 2 - 1
        room[1:] = np.minimum(room[1:], gaps // 2 - 1)
        half = np.minimum(np.floor(widths / 2 * ticks), room)
        half[0] = min(half[0], centers[0] - 1)
        return (centers - half) / ticks, (centers + half) / ticks

    gaps = np.diff(targets)
    room = np.full(len(targets), np.inf)
    room[:-1] = gaps / 2 - 0.001
    room[1:] = np.minimum(room[1:], gaps / 2 - 0.001)
    half = np.minimum(widths / 2, room)
    half[0] = min(half[0], targets[0] - 0.001)
    return targets - half, targets + half


def _make_track(
    rng: np.random.Generator,
    targets: np.ndarray,
    labels: list[str],
    end_time: float,
    widths: np.ndarray,
    options: SynthOptions,
) -> HandTrack:
    lip_x, lip_y = options.lip_center
    n_frames = int(np.floor(end_time * options.fps)) + 1
    times = np.arange(n_frames) / options.fps

    jitter = rng.normal(0.0, options.anchor_jitter_px, (len(targets), 2))
    shapes = rng.integers(1, 9, len(targets))
    anchors = np.array(
        [options.anchors[options.position_map.get(label, 1)] for label in labels], dtype=float
    )
    anchors = anchors + jitter + [lip_x, lip_y]
    rest = np.array([lip_x + REST_OFFSET[0], lip_y + REST_OFFSET[1]])

    key_t = [0.0]
    key_xy = [rest]
    for i, (t, xy) in enumerate(zip(targets, anchors)):
        key_t.append(float(t))
        key_xy.append(xy)
        dwell = float(widths[i]) if options.dwell is None else options.dwell
        if dwell > 0:
            following = targets[i + 1] if i + 1 < len(targets) else t + options.release_after
            hold = min(dwell, (following - t) / 2)
            key_t.append(float(t + hold))
            key_xy.append(xy)
    key_t.append(float(targets[-1] + options.release_after))
    key_xy.append(rest)

    key_xy = np.array(key_xy)
    hand_x = np.round(np.interp(times, key_t, key_xy[:, 0]), 2)
    hand_y = np.round(np.interp(times, key_t, key_xy[:, 1]), 2)
    upcoming = np.clip(np.searchsorted(targets, times, side="left"), 0, len(targets) - 1)

    frames = tuple(
        Frame(
            time=float(t),
            lip_center=(lip_x, lip_y),
            hand_point=(float(x), float(y)),
            hand_shape=int(shapes[k]),
        )
        for t, x, y, k in zip(times, hand_x, hand_y, upcoming)
    )
    return HandTrack(fps=options.fps, frames=frames)


def _gen_sentence(
    rng: np.random.Generator,
    profile: CuerProfile,
    model: GroundTruthModel,
    sentence_id: str,
    options: SynthOptions,
) -> tuple[SentenceTimeline, HandTrack, list[dict]]:
    lo, hi = profile.syllables_range
    n = int(min(lo + rng.poisson(profile.syllables_mean - lo), hi))
    labels = [str(v) for v in rng.choice(sorted(options.vowel_labels), n)]

    durations = _truncated_normal(rng, profile.mu_lvd, profile.sigma_lvd, n, options.min_duration)
    gaps = rng.uniform(*options.consonant_gap, n)
    pauses = rng.random(n) < profile.pause_prob
    gaps = gaps + np.where(pauses, rng.uniform(*profile.pause_range, n), 0.0)
    gaps[0] = rng.uniform(*options.lead_silence)
    noise = rng.normal(0.0, profile.residual_sigma, n)
    hand_widths = _truncated_normal(
        rng, profile.mu_lvd, profile.sigma_lvd, n, options.min_duration
    )

    for _ in range(MAX_LAYOUT_PASSES):
        ends = np.cumsum(gaps + durations)
        starts = _snap(ends - durations, options.quantum)
        ends = _snap(ends, options.quantum)
        t_mid, lve, lvi, lvd, sources = _lip_measures(starts, ends)

        lam1, lam2 = lambda_weights(lvi, lvd, np.full(n, lvi.mean()), np.full(n, lvd.mean()))
        if n == 1:
            lam1, lam2 = np.zeros(1), np.ones(1)
        lve_log = np.log10(lve)
        lvi_log = np.log10(lvi)
        lvd_z = (lvd - profile.mu_lvd) / profile.sigma_lvd
        model_z = model.predict_norm(lve_log, lvi_log, lvd_z, lam1, lam2)
        hpt_target = profile.mu_hpt + profile.sigma_hpt * (model_z + noise)
        targets = t_mid - hpt_target

        # hand targets must leave room for non-overlapping hand intervals
        short = np.concatenate([[targets[0]], np.diff(targets)]) < options.min_hand_sep
        if not short.any():
            break
        first = int(np.argmax(short))
        spacing = targets[0] if first == 0 else targets[first] - targets[first - 1]
        shortfall = options.min_hand_sep - spacing
        gaps[first] += shortfall + 0.005
    else:
        raise InvalidProfileError(
            f"profile {profile.cuer_id!r}: could not place ordered hand targets for {sentence_id}"
        )

    hand_starts, hand_ends = _hand_intervals(targets, hand_widths, options.quantum)
    lip_vowels = tuple(
        PhoneInterval(float(s), float(e), lab) for s, e, lab in zip(starts, ends, labels)
    )
    hand_vowels = tuple(
        PhoneInterval(float(s), float(e), lab) for s, e, lab in zip(hand_starts, hand_ends, labels)
    )
    sentence_end = float(ends[-1])
    timeline = SentenceTimeline(
        sentence_id, profile.cuer_id, profile.hearing, lip_vowels, hand_vowels, sentence_end
    )

    t_hand = (hand_starts + hand_ends) / 2
    track_end = max(sentence_end, float(t_hand[-1])) + options.track_tail
    track = _make_track(rng, t_hand, labels, track_end, hand_ends - hand_starts, options)

    hpt = t_mid - t_hand
    records = [
        {
            "cuer_id": profile.cuer_id,
            "hearing": profile.hearing.value,
            "sentence_id": sentence_id,
            "index": i,
            "label": labels[i],
            "t_mid_s": float(t_mid[i]),
            "T_mid_s": float(t_hand[i]),
            "hpt_s": float(hpt[i]),
            "lve_s": float(lve[i]),
            "lvi_s": float(lvi[i]),
            "lvd_s": float(lvd[i]),
            "lvi_source": sources[i].value,
            "hpt_z": float((hpt[i] - profile.mu_hpt) / profile.sigma_hpt),
            "lvd_z": float(lvd_z[i]),
            "lve_log": float(lve_log[i]),
            "lvi_log": float(lvi_log[i]),
            "hpt_target_s": float(hpt_target[i]),
            "model_z": float(model_z[i]),
            "noise_z": float(noise[i]),
        }
        for i in range(n)
    ]
    return timeline, track, records


def gen_corpus(
    profiles: list[CuerProfile],
    model: GroundTruthModel | None = None,
    n_sentences: int = 100,
    seed: int = 0,
    options: SynthOptions | None = None,
) -> SynthCorpus:
    """
    Generate n_sentences sentences per cuer.

    Sentence k of the cuer at position c draws from its own substream seeded
    with (seed, c, k), so the corpus does not depend on generation order.
    A profile's own model, when set, overrides the shared one.

    Raises:
        InvalidProfileError: Bad profile parameters, duplicate cuer ids, n_sentences
            below 1, or hand targets that cannot be ordered.
    """
    if n_sentences < 1:
        raise InvalidProfileError(f"n_sentences must be at least 1, got {n_sentences}")
    model = model or GroundTruthModel()
    options = options or SynthOptions()

    seen: set[str] = set()
    for profile in profiles:
        profile.validate()
        if profile.cuer_id in seen:
            raise InvalidProfileError(f"duplicate cuer id {profile.cuer_id!r}")
        seen.add(profile.cuer_id)

    timelines: list[SentenceTimeline] = []
    tracks: dict[tuple[str, str], HandTrack] = {}
    records: list[dict] = []
    for c, profile in enumerate(profiles):
        cuer_model = profile.model or model
        for k in range(n_sentences):
            rng = np.random.default_rng([seed, c, k])
            sentence_id = f"{profile.cuer_id}_s{k:04d}"
            timeline, track, rows = _gen_sentence(rng, profile, cuer_model, sentence_id, options)
            timelines.append(timeline)
            tracks[(profile.cuer_id, sentence_id)] = track
            records.extend(rows)
        logger.debug("Generated %d sentences for %s", n_sentences, profile.cuer_id)

    columns = MEASURE_COLUMNS + NORMALIZED_COLUMNS + TRUTH_EXTRA_COLUMNS
    truth = pd.DataFrame.from_records(records, columns=columns)
    return SynthCorpus(timelines, tracks, truth, list(profiles))


# ─────────────────────────────────────────────────────────────────────────────
# Rendering
# ─────────────────────────────────────────────────────────────────────────────


def render_textgrid(timeline: SentenceTimeline, margin: float = 0.5) -> str:
    """The lip (acoustic) vowel tier as a TextGrid ending margin seconds after the sentence."""
    tier = AnnotationTier("vowels", Stream.LIP, timeline.lip_vowels)
    return write_textgrid([tier], xmax=round(timeline.sentence_end + margin, 3))


def render_eaf(timeline: SentenceTimeline) -> str:
    """The hand vowel tier as an EAF document."""
    return write_eaf([AnnotationTier("hand", Stream.HAND, timeline.hand_vowels)])


def save_corpus(
    corpus: SynthCorpus, out_dir: Path, header: str = "", annotations: bool = True
) -> list[Path]:
    """
    Write a generated corpus under out_dir.

    Layout:
        corpus.jsonl                      canonical sentences
        truth.csv                         generator truth per syllable
        tracks/<cuer>/<sentence>.csv      landmark tracks
        annotations/<cuer>/<sentence>.TextGrid and .eaf

    Args:
        header: Provenance line(s) prepended to the JSONL, CSV files.

    Returns:
        Paths written, in write order.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    corpus_path = out_dir / "corpus.jsonl"
    corpus_path.write_text(header + write_corpus(corpus.timelines))
    written.append(corpus_path)

    truth_path = out_dir / "truth.csv"
    truth_path.write_text(header + corpus.truth.to_csv(index=False, lineterminator="\n"))
    written.append(truth_path)

    for (cuer_id, sentence_id), track in corpus.tracks.items():
        path = out_dir / "tracks" / cuer_id / f"{sentence_id}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(header + write_landmarks(track))
        written.append(path)

    if annotations:
        for timeline in corpus.timelines:
            folder = out_dir / "annotations" / timeline.cuer_id
            folder.mkdir(parents=True, exist_ok=True)
            tg_path = folder / f"{timeline.sentence_id}.TextGrid"
            tg_path.write_text(render_textgrid(timeline))
            eaf_path = folder / f"{timeline.sentence_id}.eaf"
            eaf_path.write_text(render_eaf(timeline))
            written += [tg_path, eaf_path]
    return written


# ─────────────────────────────────────────────────────────────────────────────
# Profile files
# ─────────────────────────────────────────────────────────────────────────────

_PROFILE_MS_KEYS = ("mu_hpt_ms", "sigma_hpt_ms", "mu_lvd_ms", "sigma_lvd_ms")


def _profile_from_mapping(entry: dict) -> CuerProfile:
    try:
        mu_hpt, sigma_hpt, mu_lvd, sigma_lvd = (
            float(entry[key]) / 1000 for key in _PROFILE_MS_KEYS
        )
        extra = {}
        if "pause_prob" in entry:
            extra["pause_prob"] = float(entry["pause_prob"])
        if "pause_range_ms" in entry:
            lo, hi = entry["pause_range_ms"]
            extra["pause_range"] = (float(lo) / 1000, float(hi) / 1000)
        if "syllables_mean" in entry:
            extra["syllables_mean"] = float(entry["syllables_mean"])
        if "syllables_range" in entry:
            lo, hi = entry["syllables_range"]
            extra["syllables_range"] = (int(lo), int(hi))
        if "residual_sigma" in entry:
            extra["residual_sigma"] = float(entry["residual_sigma"])
        if "model" in entry:
            extra["model"] = GroundTruthModel.from_dict(entry["model"])
        return CuerProfile(
            cuer_id=str(entry["cuer_id"]),
            hearing=Hearing(entry["hearing"]),
            mu_hpt=mu_hpt,
            sigma_hpt=sigma_hpt,
            mu_lvd=mu_lvd,
            sigma_lvd=sigma_lvd,
            **extra,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidProfileError(f"invalid profile entry {entry!r}: {e}") from e


def load_profiles(path: Path) -> tuple[list[CuerProfile], GroundTruthModel]:
    """
    Read cuer profiles (and optionally the shared model) from a YAML file.

    Expected shape:
        model: {gamma: -0.34, f1: {slope: 2.0, intercept: 0.8}, ...}
        profiles:
          - {cuer_id: NF1, hearing: normal, mu_hpt_ms: 242, sigma_hpt_ms: 177,
             mu_lvd_ms: 338, sigma_lvd_ms: 79, residual_sigma: 0.3}

    Raises:
        InvalidProfileError: Unreadable file or invalid entries.
    """
    try:
        data = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as e:
        raise InvalidProfileError(f"cannot read profiles {path}: {e}") from e
    if not isinstance(data, dict) or not isinstance(data.get("profiles"), list):
        raise InvalidProfileError(f"{path}: expected a mapping with a 'profiles' list")

    model = GroundTruthModel.from_dict(data.get("model") or {})
    profiles = [_profile_from_mapping(entry) for entry in data["profiles"]]
    for profile in profiles:
        profile.validate()
    return profiles, model
