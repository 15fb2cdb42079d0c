"""
Per-vowel timing measures on the lip stream and the flat analysis table.

For vowel i of a sentence with lip target instant t_i (lip interval midpoint)
and hand target instant T_i (hand interval midpoint):

    HPT  (hpt)  = t_i - T_i                       hand preceding time
    LVE  (lve)  = sentence_end - t_i              lip vowel to end
    LVI  (lvi)  = t_i - t_(i-1)                   lip vowel interval
    LVD  (lvd)  = lip interval duration           lip vowel duration

The syllable without a measured interval gets the sentence maximum LVI;
a one-syllable sentence uses its LVD.
"""

import io
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from cuesync.annot_io import Hearing, PhoneInterval, SentenceTimeline
from cuesync.errors import (
    DuplicateSentenceError,
    NonmonotonicMidpointsError,
    NonpositiveLveError,
    SchemaViolationError,
)

if TYPE_CHECKING:
    from cuesync.normalize import GroupStats

logger = logging.getLogger(__name__)

MEASURE_COLUMNS = [
    "cuer_id",
    "hearing",
    "sentence_id",
    "index",
    "label",
    "t_mid_s",
    "T_mid_s",
    "hpt_s",
    "lve_s",
    "lvi_s",
    "lvd_s",
    "lvi_source",
]
NORMALIZED_COLUMNS = ["hpt_z", "lvd_z", "lve_log", "lvi_log"]

_STRING_COLUMNS = {"cuer_id": str, "hearing": str, "sentence_id": str, "label": str}


class LviConvention(str, Enum):
    """Which neighbour an LVI is measured against."""

    BACKWARD = "backward"  # t_i - t_(i-1); the first syllable is imputed
    FORWARD = "forward"  # t_(i+1) - t_i; the last syllable is imputed


class LviSource(str, Enum):
    """How a row's LVI value was obtained."""

    MEASURED = "measured"
    IMPUTED_MAX = "imputed_max"
    IMPUTED_SINGLETON = "imputed_singleton"


class Subset(str, Enum):
    """Corpus subsets regressions are fit and scored on."""

    ALL = "ALL"
    NORMAL = "NORMAL"
    DEAF = "DEAF"


@dataclass(frozen=True)
class VowelMeasures:
    """Raw timing measures of one vowel, all in seconds."""

    sentence_id: str
    cuer_id: str
    hearing: Hearing
    index: int
    label: str
    t_mid: float
    T_mid: float
    hpt: float
    lve: float
    lvi: float
    lvd: float
    lvi_source: LviSource


def midpoint(interval: PhoneInterval) -> float:
    """Target instant of an interval: the mean of its start and end."""
    return (interval.start + interval.end) / 2


def compute_measures(
    timeline: SentenceTimeline,
    lvi_convention: LviConvention = LviConvention.BACKWARD,
) -> list[VowelMeasures]:
    """
    Compute HPT, LVE, LVI and LVD for every vowel of a sentence.

    Raises:
        NonmonotonicMidpointsError: Lip target instants do not strictly increase.
        NonpositiveLveError: A lip target instant is at or after the sentence end.
    """
    lip_mids = np.array([midpoint(iv) for iv in timeline.lip_vowels])
    hand_mids = np.array([midpoint(iv) for iv in timeline.hand_vowels])
    steps = np.diff(lip_mids)
    if (steps <= 0).any():
        raise NonmonotonicMidpointsError(
            f"{timeline.cuer_id}/{timeline.sentence_id}: lip target instants do not increase"
        )

    lve = timeline.sentence_end - lip_mids
    if (lve <= 0).any():
        raise NonpositiveLveError(
            f"{timeline.cuer_id}/{timeline.sentence_id}: lip target instant at or after "
            f"sentence end {timeline.sentence_end}"
        )
    lvd = np.array([iv.duration for iv in timeline.lip_vowels])

    n = timeline.n_vowels
    if n == 1:
        lvi = lvd.copy()
        sources = [LviSource.IMPUTED_SINGLETON]
    elif LviConvention(lvi_convention) is LviConvention.BACKWARD:
        lvi = np.concatenate([[steps.max()], steps])
        sources = [LviSource.IMPUTED_MAX] + [LviSource.MEASURED] * (n - 1)
    else:
        lvi = np.concatenate([steps, [steps.max()]])
        sources = [LviSource.MEASURED] * (n - 1) + [LviSource.IMPUTED_MAX]

    return [
        VowelMeasures(
            sentence_id=timeline.sentence_id,
            cuer_id=timeline.cuer_id,
            hearing=timeline.hearing,
            index=i,
            label=timeline.lip_vowels[i].label,
            t_mid=float(lip_mids[i]),
            T_mid=float(hand_mids[i]),
            hpt=float(lip_mids[i] - hand_mids[i]),
            lve=float(lve[i]),
            lvi=float(lvi[i]),
            lvd=float(lvd[i]),
            lvi_source=sources[i],
        )
        for i in range(n)
    ]


def _to_record(m: VowelMeasures) -> dict:
    return {
        "cuer_id": m.cuer_id,
        "hearing": m.hearing.value,
        "sentence_id": m.sentence_id,
        "index": m.index,
        "label": m.label,
        "t_mid_s": m.t_mid,
        "T_mid_s": m.T_mid,
        "hpt_s": m.hpt,
        "lve_s": m.lve,
        "lvi_s": m.lvi,
        "lvd_s": m.lvd,
        "lvi_source": m.lvi_source.value,
    }


@dataclass
class MeasureTable:
    """
    Flat table of vowel measures backed by a DataFrame.

    Rows are ordered by (cuer_id, sentence_id, index). Once normalize_table has
    run, the frame also carries hpt_z, lvd_z, lve_log and lvi_log, and the table
    remembers the policy and statistics that produced them.
    """

    frame: pd.DataFrame
    norm_policy: str | None = None
    norm_stats: tuple["GroupStats", ...] = ()
    excluded: list[tuple[str, str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def is_normalized(self) -> bool:
        return all(col in self.frame.columns for col in NORMALIZED_COLUMNS)

    def column(self, name: str) -> np.ndarray:
        return self.frame[name].to_numpy()

    def rows(self) -> list[VowelMeasures]:
        return [
            VowelMeasures(
                sentence_id=r.sentence_id,
                cuer_id=r.cuer_id,
                hearing=Hearing(r.hearing),
                index=int(r.index),
                label=r.label,
                t_mid=float(r.t_mid_s),
                T_mid=float(r.T_mid_s),
                hpt=float(r.hpt_s),
                lve=float(r.lve_s),
                lvi=float(r.lvi_s),
                lvd=float(r.lvd_s),
                lvi_source=LviSource(r.lvi_source),
            )
            for r in self.frame[MEASURE_COLUMNS].itertuples(index=False)
        ]

    def _derive(self, frame: pd.DataFrame) -> "MeasureTable":
        return MeasureTable(
            frame.reset_index(drop=True), norm_policy=self.norm_policy, norm_stats=self.norm_stats
        )

    def sentence_keys(self) -> list[tuple[str, str]]:
        """Unique (cuer_id, sentence_id) pairs in table order."""
        keys = self.frame[["cuer_id", "sentence_id"]].drop_duplicates()
        return list(keys.itertuples(index=False, name=None))

    def select_sentences(self, keys) -> "MeasureTable":
        """Rows belonging to the given (cuer_id, sentence_id) pairs."""
        wanted = set(keys)
        mask = [key in wanted for key in zip(self.frame["cuer_id"], self.frame["sentence_id"])]
        return self._derive(self.frame[np.array(mask, dtype=bool)])

    def subset(self, subset: Subset | str) -> "MeasureTable":
        """Rows of the ALL, NORMAL or DEAF subset."""
        subset = Subset(subset)
        if subset is Subset.ALL:
            return self._derive(self.frame)
        hearing = Hearing.NORMAL if subset is Subset.NORMAL else Hearing.DEAF
        return self._derive(self.frame[self.frame["hearing"] == hearing.value])

    def syllable_counts(self) -> dict[str, int]:
        """Number of vowel rows per cuer (the "Syllable number" column)."""
        return {str(k): int(v) for k, v in self.frame.groupby("cuer_id").size().items()}

    def sentence_means(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-row sentence means of LVI and LVD (the weighting constants' inputs)."""
        grouped = self.frame.groupby(["cuer_id", "sentence_id"], sort=False)
        alpha_bar = grouped["lvi_s"].transform("mean").to_numpy(dtype=float)
        beta_bar = grouped["lvd_s"].transform("mean").to_numpy(dtype=float)
        return alpha_bar, beta_bar

    def to_csv(self) -> str:
        columns = MEASURE_COLUMNS + [c for c in NORMALIZED_COLUMNS if c in self.frame.columns]
        return self.frame[columns].to_csv(index=False, lineterminator="\n")

    @classmethod
    def from_csv(cls, text: str) -> "MeasureTable":
        """
        Load a table exported by to_csv. Leading '#' provenance lines are skipped.

        Raises:
            SchemaViolationError: Missing measure columns.
        """
        body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
        try:
            frame = pd.read_csv(
                io.StringIO(body), dtype=_STRING_COLUMNS, float_precision="round_trip"
            )
        except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
            raise SchemaViolationError(f"unreadable measure table: {e}") from e
        missing = [col for col in MEASURE_COLUMNS if col not in frame.columns]
        if missing:
            raise SchemaViolationError(f"measure table is missing columns: {', '.join(missing)}")
        frame["index"] = frame["index"].astype(int)
        return cls(frame)


def assemble_table(
    timelines: list[SentenceTimeline],
    lvi_convention: LviConvention = LviConvention.BACKWARD,
    skip_invalid: bool = False,
) -> MeasureTable:
    """
    Concatenate the measures of many sentences into one table.

    Args:
        timelines: Sentences to measure.
        lvi_convention: Backward or forward LVI definition.
        skip_invalid: Exclude (and count) sentences whose measures cannot be
            computed instead of raising.

    Raises:
        DuplicateSentenceError: The same cuer/sentence pair appears twice.
        NonmonotonicMidpointsError, NonpositiveLveError: Unless skip_invalid.
    """
    seen: set[tuple[str, str]] = set()
    records: list[dict] = []
    excluded: list[tuple[str, str, str]] = []
    for timeline in timelines:
        key = (timeline.cuer_id, timeline.sentence_id)
        if key in seen:
            raise DuplicateSentenceError(f"sentence {key[1]!r} of cuer {key[0]!r} seen twice")
        seen.add(key)
        try:
            measures = compute_measures(timeline, lvi_convention)
        except (NonmonotonicMidpointsError, NonpositiveLveError) as e:
            if not skip_invalid:
                raise
            excluded.append((key[0], key[1], type(e).__name__))
            continue
        records.extend(_to_record(m) for m in measures)

    if excluded:
        logger.warning("Excluded %d sentence(s) with invalid timing", len(excluded))

    frame = pd.DataFrame.from_records(records, columns=MEASURE_COLUMNS)
    frame = frame.sort_values(["cuer_id", "sentence_id", "index"], kind="mergesort")
    return MeasureTable(frame.reset_index(drop=True), excluded=excluded)
