"""
Annotation I/O - parse, align and serialize Cued Speech annotations.

Provides functionality for:
    - Parsing long-format Praat TextGrid interval tiers (acoustic/lip stream)
    - Parsing ELAN EAF alignable annotations (hand stream)
    - Pairing lip and hand vowel tiers into sentence timelines
    - Reading and writing landmark tracks (lip center + hand point per frame)
    - The canonical line-oriented JSON format for sentence timelines

All parsers are pure functions of their input text.
"""

import io
import json
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import pandas as pd

from cuesync.errors import (
    CountMismatchError,
    DanglingTimeSlotRefError,
    LabelMismatchError,
    MalformedFileError,
    NonmonotonicIntervalsError,
    NonmonotonicTimeError,
    SchemaViolationError,
)

logger = logging.getLogger(__name__)

# The 16 Mandarin finals coded by the CS system (Pinyin, "v" stands for u-umlaut)
DEFAULT_VOWEL_LABELS = frozenset(
    {"a", "o", "e", "i", "u", "v", "er", "ai", "ei", "ao", "ou", "an", "en", "ang", "eng", "ong"}
)

# Vowel -> hand position class (1 side, 2 mouth, 3 chin, 4 throat, 5 cheek)
DEFAULT_POSITION_MAP = {
    "a": 1, "o": 1, "er": 1,
    "e": 2, "ai": 2, "ou": 2,
    "i": 3, "ao": 3, "ang": 3,
    "u": 4, "ei": 4, "an": 4, "eng": 4,
    "v": 5, "en": 5, "ong": 5,
}  # fmt: skip

LANDMARK_COLUMNS = ["time_s", "lip_x", "lip_y", "hand_x", "hand_y"]

# Allowed deviation of a frame gap from 1/fps before a track is reported irregular
FRAME_GAP_TOLERANCE = 0.10


class Stream(str, Enum):
    """Which modality an annotation tier describes."""

    LIP = "lip"
    HAND = "hand"


class Hearing(str, Enum):
    """Hearing condition of a cuer."""

    NORMAL = "normal"
    DEAF = "deaf"


@dataclass(frozen=True)
class PhoneInterval:
    """A labelled annotation segment, times in seconds."""

    start: float
    end: float
    label: str

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"Interval start must be non-negative, got {self.start}")
        if not self.end > self.start:
            raise NonmonotonicIntervalsError(
                f"interval {self.label!r} ends at {self.end} but starts at {self.start}"
            )
        if not self.label.strip():
            raise ValueError("Interval label must not be empty")

    @property
    def duration(self) -> float:
        return self.end - self.start


def _check_ordered(intervals: tuple[PhoneInterval, ...], what: str) -> None:
    for prev, cur in zip(intervals, intervals[1:]):
        if cur.start < prev.end:
            raise NonmonotonicIntervalsError(
                f"{what}: {prev.label!r} [{prev.start}, {prev.end}] overlaps "
                f"{cur.label!r} [{cur.start}, {cur.end}]"
            )


@dataclass(frozen=True)
class AnnotationTier:
    """One annotation tier: sorted, non-overlapping intervals of a single stream."""

    tier_name: str
    stream: Stream
    intervals: tuple[PhoneInterval, ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        _check_ordered(self.intervals, f"tier {self.tier_name!r}")

    @property
    def labels(self) -> list[str]:
        return [iv.label for iv in self.intervals]


@dataclass(frozen=True)
class SentenceTimeline:
    """A sentence's paired lip and hand vowel intervals plus cuer metadata."""

    sentence_id: str
    cuer_id: str
    hearing: Hearing
    lip_vowels: tuple[PhoneInterval, ...]
    hand_vowels: tuple[PhoneInterval, ...]
    sentence_end: float

    def __post_init__(self):
        object.__setattr__(self, "hearing", Hearing(self.hearing))
        object.__setattr__(self, "lip_vowels", tuple(self.lip_vowels))
        object.__setattr__(self, "hand_vowels", tuple(self.hand_vowels))

        n_lip, n_hand = len(self.lip_vowels), len(self.hand_vowels)
        if n_lip != n_hand or n_lip == 0:
            raise CountMismatchError(n_lip, n_hand)
        for i, (lip, hand) in enumerate(zip(self.lip_vowels, self.hand_vowels)):
            if lip.label != hand.label:
                raise LabelMismatchError(i, lip.label, hand.label)
        _check_ordered(self.lip_vowels, f"{self.sentence_id} lip vowels")
        _check_ordered(self.hand_vowels, f"{self.sentence_id} hand vowels")
        if self.sentence_end < self.lip_vowels[-1].end:
            raise SchemaViolationError(
                f"{self.sentence_id}: sentence end {self.sentence_end} precedes "
                f"last lip vowel end {self.lip_vowels[-1].end}"
            )

    @property
    def n_vowels(self) -> int:
        return len(self.lip_vowels)

    @property
    def labels(self) -> list[str]:
        return [iv.label for iv in self.lip_vowels]

    @property
    def hand_overrun(self) -> bool:
        """True when a hand interval extends past the sentence end."""
        return self.hand_vowels[-1].end > self.sentence_end


@dataclass(frozen=True)
class Frame:
    """One landmark frame: lip center and selected hand point in pixels."""

    time: float
    lip_center: tuple[float, float]
    hand_point: tuple[float, float]
    hand_shape: int | None = None


@dataclass(frozen=True)
class HandTrack:
    """Per-frame lip and hand coordinates for one sentence video."""

    fps: float
    frames: tuple[Frame, ...]

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.frames], dtype=float)

    @cached_property
    def hand_xy(self) -> np.ndarray:
        return np.array([f.hand_point for f in self.frames], dtype=float).reshape(-1, 2)

    @cached_property
    def lip_xy(self) -> np.ndarray:
        return np.array([f.lip_center for f in self.frames], dtype=float).reshape(-1, 2)


# ─────────────────────────────────────────────────────────────────────────────
# TextGrid (long format)
# ─────────────────────────────────────────────────────────────────────────────

_TG_FILE_TYPE = 'File type = "ooTextFile"'
_TG_OBJECT_CLASS = 'Object class = "TextGrid"'
_TG_ITEM = re.compile(r"^item \[(\d+)\]:$")
_TG_INTERVAL = re.compile(r"^intervals \[(\d+)\]:$")
_TG_INTERVALS_SIZE = re.compile(r"^intervals: size = (\d+)$")
_TG_KEY_VALUE = re.compile(r"^(\w+) = (.*)$")


def _tg_unquote(raw: str) -> str:
    raw = raw.strip()
    if len(raw) >= 2 and raw.startswith('"') and raw.endswith('"'):
        return raw[1:-1].replace('""', '"')
    return raw


def _tg_float(block: dict, key: str, where: str) -> float:
    try:
        return float(block[key])
    except KeyError:
        raise MalformedFileError(f"{where}: missing {key}") from None
    except ValueError:
        raise MalformedFileError(f"{where}: {key} is not a number: {block[key]!r}") from None


def parse_textgrid(text: str, stream: Stream = Stream.LIP) -> list[AnnotationTier]:
    """
    Parse a long-format TextGrid document into annotation tiers.

    Empty or whitespace-only interval texts are silence and are dropped.

    Args:
        text: TextGrid file content.
        stream: Stream the tiers describe (acoustic annotations are the lip stream).

    Returns:
        One AnnotationTier per IntervalTier, in file order.

    Raises:
        MalformedFileError: Missing header, short format, point tiers or
            unbalanced item/interval blocks.
        NonmonotonicIntervalsError: An interval with xmax <= xmin, or overlapping
            intervals.
    """
    lines = [line.strip() for line in text.lstrip("\ufeff").splitlines() if line.strip()]
    if len(lines) < 2 or lines[0] != _TG_FILE_TYPE or lines[1] != _TG_OBJECT_CLASS:
        raise MalformedFileError("missing TextGrid header")

    declared_items: int | None = None
    items: list[dict] = []
    item: dict | None = None
    interval: dict | None = None

    for lineno, line in enumerate(lines[2:], 3):
        if line == "item []:" or line.startswith("tiers?"):
            continue
        if match := _TG_ITEM.match(line):
            item = {"intervals": [], "size": None}
            items.append(item)
            interval = None
            continue
        if match := _TG_INTERVAL.match(line):
            if item is None:
                raise MalformedFileError(f"line {lineno}: interval outside an item block")
            interval = {}
            item["intervals"].append(interval)
            continue
        if match := _TG_INTERVALS_SIZE.match(line):
            if item is None:
                raise MalformedFileError(f"line {lineno}: interval count outside an item block")
            item["size"] = int(match.group(1))
            continue
        match = _TG_KEY_VALUE.match(line)
        if not match:
            raise MalformedFileError(f"line {lineno}: unrecognized content {line!r}")
        key, raw = match.groups()
        if interval is not None:
            interval[key] = _tg_unquote(raw)
        elif item is not None:
            item[key] = _tg_unquote(raw)
        elif key == "size":
            try:
                declared_items = int(raw)
            except ValueError:
                raise MalformedFileError(f"line {lineno}: bad tier count {raw!r}") from None

    if declared_items is None or declared_items != len(items):
        raise MalformedFileError(
            f"unbalanced item blocks: declared {declared_items}, found {len(items)}"
        )

    tiers = []
    for k, block in enumerate(items, 1):
        tier_class = block.get("class")
        if tier_class != "IntervalTier":
            raise MalformedFileError(f"item {k}: unsupported tier class {tier_class!r}")
        name = block.get("name", f"tier{k}")
        if block["size"] is None or block["size"] != len(block["intervals"]):
            raise MalformedFileError(
                f"tier {name!r}: declared {block['size']} intervals, found "
                f"{len(block['intervals'])}"
            )
        intervals = []
        for j, entry in enumerate(block["intervals"], 1):
            where = f"tier {name!r} interval {j}"
            xmin = _tg_float(entry, "xmin", where)
            xmax = _tg_float(entry, "xmax", where)
            if "text" not in entry:
                raise MalformedFileError(f"{where}: missing text")
            if not xmax > xmin:
                raise NonmonotonicIntervalsError(f"{where}: xmax {xmax} <= xmin {xmin}")
            label = entry["text"].strip()
            if label:
                intervals.append(PhoneInterval(xmin, xmax, label))
        tiers.append(AnnotationTier(name, stream, tuple(intervals)))
    return tiers


def _tg_quote(label: str) -> str:
    return '"' + label.replace('"', '""') + '"'


def write_textgrid(tiers: list[AnnotationTier], xmax: float, xmin: float = 0.0) -> str:
    """
    Render tiers as a long-format TextGrid.

    Gaps between intervals are written as empty-text intervals so the tier
    covers [xmin, xmax] contiguously. Times use repr() so they re-parse exactly.
    """
    lines = [
        _TG_FILE_TYPE,
        _TG_OBJECT_CLASS,
        "",
        f"xmin = {xmin!r}",
        f"xmax = {xmax!r}",
        "tiers? <exists>",
        f"size = {len(tiers)}",
        "item []:",
    ]
    for k, tier in enumerate(tiers, 1):
        cells: list[tuple[float, float, str]] = []
        cursor = xmin
        for iv in tier.intervals:
            if iv.start > cursor:
                cells.append((cursor, iv.start, ""))
            cells.append((iv.start, iv.end, iv.label))
            cursor = iv.end
        if xmax > cursor:
            cells.append((cursor, xmax, ""))

        lines += [
            f"    item [{k}]:",
            '        class = "IntervalTier"',
            f"        name = {_tg_quote(tier.tier_name)}",
            f"        xmin = {xmin!r}",
            f"        xmax = {xmax!r}",
            f"        intervals: size = {len(cells)}",
        ]
        for j, (start, end, label) in enumerate(cells, 1):
            lines += [
                f"        intervals [{j}]:",
                f"            xmin = {start!r}",
                f"            xmax = {end!r}",
                f"            text = {_tg_quote(label)}",
            ]
    return "\n".join(lines) + "\n"


# ─────────────────────────────────────────────────────────────────────────────
# ELAN EAF
# ─────────────────────────────────────────────────────────────────────────────


def parse_eaf(xml: str, stream: Stream = Stream.HAND) -> list[AnnotationTier]:
    """
    Parse an ELAN EAF document's alignable annotations into tiers.

    TIME_SLOT values are milliseconds; interval times are value / 1000.

    Raises:
        MalformedFileError: Not an EAF document, missing TIME_ORDER, bad slot
            values, or reference (symbolic) annotations.
        DanglingTimeSlotRefError: An annotation references an undefined slot.
        NonmonotonicIntervalsError: An annotation ends before it starts, or
            annotations of one tier overlap.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as e:
        raise MalformedFileError(f"invalid EAF XML: {e}") from e
    if root.tag != "ANNOTATION_DOCUMENT":
        raise MalformedFileError(f"root element is {root.tag!r}, expected ANNOTATION_DOCUMENT")

    time_order = root.find("TIME_ORDER")
    if time_order is None:
        raise MalformedFileError("missing TIME_ORDER")

    slots: dict[str, int] = {}
    for slot in time_order.findall("TIME_SLOT"):
        slot_id = slot.get("TIME_SLOT_ID")
        if slot_id is None:
            raise MalformedFileError("TIME_SLOT without TIME_SLOT_ID")
        value = slot.get("TIME_VALUE")
        if value is None:
            continue  # unaligned slot; referencing it is an error below
        try:
            slots[slot_id] = int(value)
        except ValueError:
            raise MalformedFileError(f"slot {slot_id}: bad TIME_VALUE {value!r}") from None

    tiers = []
    for tier in root.findall("TIER"):
        name = tier.get("TIER_ID")
        if name is None:
            raise MalformedFileError("TIER without TIER_ID")
        intervals = []
        for annotation in tier.findall("ANNOTATION"):
            aligned = annotation.find("ALIGNABLE_ANNOTATION")
            if aligned is None:
                raise MalformedFileError(f"tier {name!r}: only alignable annotations are supported")
            refs = aligned.get("TIME_SLOT_REF1"), aligned.get("TIME_SLOT_REF2")
            for ref in refs:
                if ref not in slots:
                    raise DanglingTimeSlotRefError(str(ref))
            start, end = slots[refs[0]] / 1000, slots[refs[1]] / 1000
            if not end > start:
                raise NonmonotonicIntervalsError(
                    f"tier {name!r} annotation {aligned.get('ANNOTATION_ID')}: "
                    f"end {end} <= start {start}"
                )
            value = aligned.find("ANNOTATION_VALUE")
            label = (value.text or "").strip() if value is not None else ""
            if label:
                intervals.append(PhoneInterval(start, end, label))
        intervals.sort(key=lambda iv: iv.start)
        tiers.append(AnnotationTier(name, stream, tuple(intervals)))
    return tiers


def write_eaf(tiers: list[AnnotationTier], author: str = "cuesync") -> str:
    """
    Render tiers as a minimal EAF document with alignable annotations.

    Times are rounded to whole milliseconds, the EAF time unit.
    """
    root = ET.Element(
        "ANNOTATION_DOCUMENT",
        {"AUTHOR": author, "FORMAT": "3.0", "VERSION": "3.0"},
    )
    ET.SubElement(root, "HEADER", {"MEDIA_FILE": "", "TIME_UNITS": "milliseconds"})
    time_order = ET.SubElement(root, "TIME_ORDER")

    slot_count = 0
    annotation_count = 0
    tier_elements = []
    for tier in tiers:
        tier_el = ET.Element(
            "TIER", {"LINGUISTIC_TYPE_REF": "default-lt", "TIER_ID": tier.tier_name}
        )
        for iv in tier.intervals:
            refs = []
            for seconds in (iv.start, iv.end):
                slot_count += 1
                slot_id = f"ts{slot_count}"
                ET.SubElement(
                    time_order,
                    "TIME_SLOT",
                    {"TIME_SLOT_ID": slot_id, "TIME_VALUE": str(round(seconds * 1000))},
                )
                refs.append(slot_id)
            annotation_count += 1
            annotation = ET.SubElement(tier_el, "ANNOTATION")
            aligned = ET.SubElement(
                annotation,
                "ALIGNABLE_ANNOTATION",
                {
                    "ANNOTATION_ID": f"a{annotation_count}",
                    "TIME_SLOT_REF1": refs[0],
                    "TIME_SLOT_REF2": refs[1],
                },
            )
            ET.SubElement(aligned, "ANNOTATION_VALUE").text = iv.label
        tier_elements.append(tier_el)

    root.extend(tier_elements)
    ET.SubElement(
        root, "LINGUISTIC_TYPE", {"LINGUISTIC_TYPE_ID": "default-lt", "TIME_ALIGNABLE": "true"}
    )
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


# ─────────────────────────────────────────────────────────────────────────────
# Vowel filtering and alignment
# ─────────────────────────────────────────────────────────────────────────────


def filter_vowels(
    tier: AnnotationTier, vowel_labels: frozenset[str] | set[str] = DEFAULT_VOWEL_LABELS
) -> tuple[AnnotationTier, int]:
    """
    Keep only intervals whose label is a known vowel.

    Returns:
        Tuple of (filtered tier, number of ignored intervals).
    """
    kept = tuple(iv for iv in tier.intervals if iv.label in vowel_labels)
    ignored = len(tier.intervals) - len(kept)
    if ignored:
        logger.warning("Tier %r: ignored %d non-vowel interval(s)", tier.tier_name, ignored)
    return AnnotationTier(tier.tier_name, tier.stream, kept), ignored


def align_tiers(
    lip: AnnotationTier,
    hand: AnnotationTier,
    sentence_id: str,
    cuer_id: str,
    hearing: Hearing | str,
) -> SentenceTimeline:
    """
    Pair lip and hand vowel tiers index-wise into a sentence timeline.

    The sentence end is the end of the last lip vowel. Count or label
    disagreements are annotation defects and are never repaired.

    Raises:
        ValueError: If the tiers are not a lip tier and a hand tier.
        CountMismatchError: Different numbers of vowels.
        LabelMismatchError: First index where the labels differ.
    """
    if lip.stream is not Stream.LIP or hand.stream is not Stream.HAND:
        raise ValueError("align_tiers expects a lip tier and a hand tier")
    if len(lip.intervals) != len(hand.intervals) or not lip.intervals:
        raise CountMismatchError(len(lip.intervals), len(hand.intervals))

    timeline = SentenceTimeline(
        sentence_id=sentence_id,
        cuer_id=cuer_id,
        hearing=Hearing(hearing),
        lip_vowels=lip.intervals,
        hand_vowels=hand.intervals,
        sentence_end=lip.intervals[-1].end,
    )
    if timeline.hand_overrun:
        logger.warning(
            "%s/%s: hand interval ends at %.3f s, past sentence end %.3f s",
            cuer_id,
            sentence_id,
            timeline.hand_vowels[-1].end,
            timeline.sentence_end,
        )
    return timeline


# ─────────────────────────────────────────────────────────────────────────────
# Landmark tracks
# ─────────────────────────────────────────────────────────────────────────────


def _strip_comments(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))


def _shape_value(cell) -> int | None:
    if cell is None or pd.isna(cell):
        return None
    try:
        return int(cell)
    except (TypeError, ValueError):
        raise MalformedFileError(f"bad hand shape value {cell!r}") from None


def read_landmarks(csv: str) -> HandTrack:
    """
    Read a landmark CSV (time_s,lip_x,lip_y,hand_x,hand_y[,shape]) into a track.

    The frame rate is inferred from the median inter-frame gap.

    Raises:
        MalformedFileError: Missing columns, non-numeric cells or fewer than 2 rows.
        NonmonotonicTimeError: Frame times not strictly increasing.
    """
    try:
        frame = pd.read_csv(io.StringIO(_strip_comments(csv)), float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError, TypeError) as e:
        raise MalformedFileError(f"unreadable landmark CSV: {e}") from e

    missing = [col for col in LANDMARK_COLUMNS if col not in frame.columns]
    if missing:
        raise MalformedFileError(f"landmark CSV is missing columns: {', '.join(missing)}")
    if len(frame) < 2:
        raise MalformedFileError("landmark CSV needs at least 2 frames")
    try:
        values = frame[LANDMARK_COLUMNS].to_numpy(dtype=float)
    except (ValueError, TypeError) as e:
        raise MalformedFileError(f"non-numeric landmark value: {e}") from e
    if np.isnan(values).any():
        raise MalformedFileError("landmark CSV has empty cells")

    times = values[:, 0]
    gaps = np.diff(times)
    if (gaps <= 0).any():
        bad = int(np.argmax(gaps <= 0)) + 1
        raise NonmonotonicTimeError(f"frame {bad} at {times[bad]} s does not advance time")

    median_gap = float(np.median(gaps))
    if (np.abs(gaps - median_gap) > FRAME_GAP_TOLERANCE * median_gap).any():
        logger.warning("Landmark track has irregular frame spacing (median gap %.4f s)", median_gap)

    shapes = frame["shape"].tolist() if "shape" in frame.columns else [None] * len(frame)
    frames = tuple(
        Frame(
            time=float(row[0]),
            lip_center=(float(row[1]), float(row[2])),
            hand_point=(float(row[3]), float(row[4])),
            hand_shape=_shape_value(shape),
        )
        for row, shape in zip(values, shapes)
    )
    return HandTrack(fps=1.0 / median_gap, frames=frames)


def write_landmarks(track: HandTrack) -> str:
    """Render a track as landmark CSV; the shape column is written when any frame has one."""
    data = {
        "time_s": [f.time for f in track.frames],
        "lip_x": [f.lip_center[0] for f in track.frames],
        "lip_y": [f.lip_center[1] for f in track.frames],
        "hand_x": [f.hand_point[0] for f in track.frames],
        "hand_y": [f.hand_point[1] for f in track.frames],
    }
    if any(f.hand_shape is not None for f in track.frames):
        data["shape"] = pd.array([f.hand_shape for f in track.frames], dtype="Int64")
    return pd.DataFrame(data).to_csv(index=False, lineterminator="\n")


# ─────────────────────────────────────────────────────────────────────────────
# Canonical sentence JSON
# ─────────────────────────────────────────────────────────────────────────────

_CANONICAL_KEYS = ("sentence_id", "cuer_id", "hearing", "sentence_end_s", "vowels")
_VOWEL_KEYS = ("label", "lip_start_s", "lip_end_s", "hand_start_s", "hand_end_s")


def write_canonical(timeline: SentenceTimeline) -> str:
    """
    Serialize a timeline as one canonical JSON line.

    Floats are written with repr(), which round-trips exactly and always
    carries at least microsecond precision.
    """
    document = {
        "sentence_id": timeline.sentence_id,
        "cuer_id": timeline.cuer_id,
        "hearing": timeline.hearing.value,
        "sentence_end_s": timeline.sentence_end,
        "vowels": [
            {
                "label": lip.label,
                "lip_start_s": lip.start,
                "lip_end_s": lip.end,
                "hand_start_s": hand.start,
                "hand_end_s": hand.end,
            }
            for lip, hand in zip(timeline.lip_vowels, timeline.hand_vowels)
        ],
    }
    return json.dumps(document, ensure_ascii=False) + "\n"


def _require_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolationError(f"{where} must be a number, got {value!r}")
    return float(value)


def read_canonical(text: str) -> SentenceTimeline:
    """
    Parse one canonical JSON document back into a timeline.

    Raises:
        SchemaViolationError: Invalid JSON, missing or mistyped fields, or a
            document whose content violates the timeline invariants.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaViolationError(f"invalid canonical JSON: {e}") from e
    if not isinstance(document, dict):
        raise SchemaViolationError("canonical document must be a JSON object")
    missing = [key for key in _CANONICAL_KEYS if key not in document]
    if missing:
        raise SchemaViolationError(f"canonical document is missing: {', '.join(missing)}")

    try:
        hearing = Hearing(document["hearing"])
    except ValueError:
        raise SchemaViolationError(f"bad hearing value {document['hearing']!r}") from None
    vowels = document["vowels"]
    if not isinstance(vowels, list) or not vowels:
        raise SchemaViolationError("vowels must be a non-empty list")

    lip, hand = [], []
    try:
        for i, vowel in enumerate(vowels):
            if not isinstance(vowel, dict) or any(key not in vowel for key in _VOWEL_KEYS):
                raise SchemaViolationError(f"vowel {i} must have keys {', '.join(_VOWEL_KEYS)}")
            label = vowel["label"]
            if not isinstance(label, str):
                raise SchemaViolationError(f"vowel {i} label must be a string")
            lip.append(
                PhoneInterval(
                    _require_number(vowel["lip_start_s"], f"vowel {i} lip_start_s"),
                    _require_number(vowel["lip_end_s"], f"vowel {i} lip_end_s"),
                    label,
                )
            )
            hand.append(
                PhoneInterval(
                    _require_number(vowel["hand_start_s"], f"vowel {i} hand_start_s"),
                    _require_number(vowel["hand_end_s"], f"vowel {i} hand_end_s"),
                    label,
                )
            )
        return SentenceTimeline(
            sentence_id=str(document["sentence_id"]),
            cuer_id=str(document["cuer_id"]),
            hearing=hearing,
            lip_vowels=tuple(lip),
            hand_vowels=tuple(hand),
            sentence_end=_require_number(document["sentence_end_s"], "sentence_end_s"),
        )
    except SchemaViolationError:
        raise
    except (ValueError, NonmonotonicIntervalsError, CountMismatchError, LabelMismatchError) as e:
        raise SchemaViolationError(f"invalid timeline content: {e}") from e


def write_corpus(timelines: list[SentenceTimeline]) -> str:
    """Serialize timelines as canonical JSON lines, one sentence per line."""
    return "".join(write_canonical(t) for t in timelines)


def read_corpus(text: str) -> list[SentenceTimeline]:
    """Parse canonical JSON lines; blank lines and '#' comment lines are skipped."""
    return [
        read_canonical(line)
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    ]
