"""
Descriptive statistics and normalization of the measure table.

HPT and LVD are z-scored against the statistics of a row's group; LVE and
LVI are log10-scaled (in seconds) and need no grouping. Which group a row
belongs to is set by the normalization policy:

    per-cuer   each cuer against its own statistics
    per-group  NORMAL and DEAF cuers pooled separately
    global     one pooled group, "ALL"
"""

import logging
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np
import pandas as pd

from cuesync.annot_io import Hearing
from cuesync.errors import (
    DegenerateGroupError,
    EmptyGroupError,
    MissingStatsError,
    NonpositiveInputError,
)
from cuesync.measures import MeasureTable

logger = logging.getLogger(__name__)

STATS_COLUMNS = [
    "group",
    "mu_hpt_ms",
    "sigma_hpt_ms",
    "mu_lvd_ms",
    "sigma_lvd_ms",
    "syllable_count",
]

NORMAL_KEY = "NORMAL"
DEAF_KEY = "DEAF"
ALL_KEY = "ALL"


class Grouping(str, Enum):
    """How rows are grouped for descriptive statistics."""

    PER_CUER = "per-cuer"
    NORMAL_DEAF = "normal-deaf"
    ALL = "all"


class NormPolicy(str, Enum):
    """Which group's statistics z-score a row."""

    PER_CUER = "per-cuer"
    PER_GROUP = "per-group"
    GLOBAL = "global"

    @property
    def grouping(self) -> Grouping:
        return {
            NormPolicy.PER_CUER: Grouping.PER_CUER,
            NormPolicy.PER_GROUP: Grouping.NORMAL_DEAF,
            NormPolicy.GLOBAL: Grouping.ALL,
        }[self]


@dataclass(frozen=True)
class GroupStats:
    """Mean and population standard deviation of HPT and LVD for one group (seconds)."""

    group_key: str
    mu_hpt: float
    sigma_hpt: float
    mu_lvd: float
    sigma_lvd: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise DegenerateGroupError(f"group {self.group_key!r} has only {self.count} row(s)")
        if not (self.sigma_hpt > 0 and self.sigma_lvd > 0):
            raise DegenerateGroupError(f"group {self.group_key!r} has zero spread")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GroupStats":
        return cls(
            group_key=str(data["group_key"]),
            mu_hpt=float(data["mu_hpt"]),
            sigma_hpt=float(data["sigma_hpt"]),
            mu_lvd=float(data["mu_lvd"]),
            sigma_lvd=float(data["sigma_lvd"]),
            count=int(data["count"]),
        )


def group_key_for(policy: NormPolicy | str, cuer_id: str, hearing: Hearing | str) -> str:
    """Group a row with this cuer and hearing status belongs to under a policy."""
    policy = NormPolicy(policy)
    if policy is NormPolicy.PER_CUER:
        return cuer_id
    if policy is NormPolicy.PER_GROUP:
        return NORMAL_KEY if Hearing(hearing) is Hearing.NORMAL else DEAF_KEY
    return ALL_KEY


def row_group_keys(table: MeasureTable, policy: NormPolicy | str) -> np.ndarray:
    """Group key of every row of the table, as an object array."""
    policy = NormPolicy(policy)
    frame = table.frame
    if policy is NormPolicy.PER_CUER:
        return frame["cuer_id"].to_numpy(dtype=object)
    if policy is NormPolicy.PER_GROUP:
        normal = frame["hearing"].to_numpy() == Hearing.NORMAL.value
        return np.where(normal, NORMAL_KEY, DEAF_KEY).astype(object)
    return np.full(len(frame), ALL_KEY, dtype=object)


def lookup_stats(stats, group_key: str) -> GroupStats:
    """Find one group's statistics. Raises MissingStatsError if absent."""
    for s in stats:
        if s.group_key == group_key:
            return s
    raise MissingStatsError(group_key)


def _stats_of(group_key: str, hpt: np.ndarray, lvd: np.ndarray) -> GroupStats:
    if len(hpt) == 0:
        raise EmptyGroupError(group_key)
    return GroupStats(
        group_key=group_key,
        mu_hpt=float(np.mean(hpt)),
        sigma_hpt=float(np.std(hpt)),
        mu_lvd=float(np.mean(lvd)),
        sigma_lvd=float(np.std(lvd)),
        count=len(hpt),
    )


def descriptive_stats(table: MeasureTable, grouping: Grouping | str) -> list[GroupStats]:
    """
    Mean and population standard deviation of HPT and LVD per group.

    Per-cuer groups come back sorted by cuer id, NORMAL before DEAF; only groups
    with rows in the table are reported.

    Raises:
        EmptyGroupError: The table has no rows.
        DegenerateGroupError: A group has fewer than 2 rows or zero spread.
    """
    grouping = Grouping(grouping)
    if len(table) == 0:
        raise EmptyGroupError(ALL_KEY if grouping is Grouping.ALL else "*", "table has no rows")

    policy = {
        Grouping.PER_CUER: NormPolicy.PER_CUER,
        Grouping.NORMAL_DEAF: NormPolicy.PER_GROUP,
        Grouping.ALL: NormPolicy.GLOBAL,
    }[grouping]
    keys = row_group_keys(table, policy)
    hpt = table.column("hpt_s").astype(float)
    lvd = table.column("lvd_s").astype(float)

    if grouping is Grouping.NORMAL_DEAF:
        order = [k for k in (NORMAL_KEY, DEAF_KEY) if (keys == k).any()]
    else:
        order = sorted(set(keys))
    return [_stats_of(key, hpt[keys == key], lvd[keys == key]) for key in order]


def merge_stats(group_key: str, parts: list[GroupStats]) -> GroupStats:
    """
    Pool several groups' statistics by count-weighted mean and variance merging.

    The result equals descriptive_stats over the union of the groups' rows,
    whatever the partition.
    """
    if not parts:
        raise EmptyGroupError(group_key, "nothing to merge")
    counts = np.array([p.count for p in parts], dtype=float)
    total = counts.sum()

    def pooled(mus, sigmas):
        mu = float(np.dot(counts, mus) / total)
        m2 = np.dot(counts, sigmas**2 + (mus - mu) ** 2)
        return mu, float(np.sqrt(m2 / total))

    mu_hpt, sigma_hpt = pooled(
        np.array([p.mu_hpt for p in parts]), np.array([p.sigma_hpt for p in parts])
    )
    mu_lvd, sigma_lvd = pooled(
        np.array([p.mu_lvd for p in parts]), np.array([p.sigma_lvd for p in parts])
    )
    return GroupStats(group_key, mu_hpt, sigma_hpt, mu_lvd, sigma_lvd, int(total))


def summary_stats(table: MeasureTable) -> list[GroupStats]:
    """Per-cuer rows followed by the pooled NORMAL, DEAF and ALL rows."""
    per_cuer = descriptive_stats(table, Grouping.PER_CUER)
    hearing_of = dict(zip(table.frame["cuer_id"], table.frame["hearing"]))

    rows = list(per_cuer)
    for key, hearing in ((NORMAL_KEY, Hearing.NORMAL), (DEAF_KEY, Hearing.DEAF)):
        members = [s for s in per_cuer if hearing_of[s.group_key] == hearing.value]
        if members:
            rows.append(merge_stats(key, members))
    rows.append(merge_stats(ALL_KEY, per_cuer))
    return rows


def stats_to_csv(stats: list[GroupStats]) -> str:
    """Render statistics as CSV, in whole milliseconds."""

    def ms(seconds: float) -> int:
        return int(round(seconds * 1000))

    frame = pd.DataFrame(
        [
            [s.group_key, ms(s.mu_hpt), ms(s.sigma_hpt), ms(s.mu_lvd), ms(s.sigma_lvd), s.count]
            for s in stats
        ],
        columns=STATS_COLUMNS,
    )
    return frame.to_csv(index=False, lineterminator="\n")


def zscore(x, mu: float, sigma: float):
    """(x - mu) / sigma. Works on scalars and arrays."""
    if not sigma > 0:
        raise DegenerateGroupError(f"cannot z-score with sigma={sigma}")
    if np.ndim(x):
        return (np.asarray(x, dtype=float) - mu) / sigma
    return (x - mu) / sigma


def log_scale(x):
    """log10 of a duration in seconds. Works on scalars and arrays."""
    values = np.asarray(x, dtype=float)
    if (values <= 0).any():
        raise NonpositiveInputError(f"log scale needs positive durations, got min {values.min()}")
    result = np.log10(values)
    return result if np.ndim(x) else float(result)


def normalize_table(
    table: MeasureTable,
    stats: list[GroupStats],
    policy: NormPolicy | str = NormPolicy.PER_CUER,
) -> MeasureTable:
    """
    Add the normalized columns hpt_z, lvd_z, lve_log and lvi_log.

    Args:
        table: Raw measure table.
        stats: Statistics covering every group the policy assigns rows to.
        policy: Which group's statistics z-score each row.

    Returns:
        A new table carrying the policy and the statistics it used.

    Raises:
        MissingStatsError: A row's group has no statistics.
    """
    policy = NormPolicy(policy)
    keys = row_group_keys(table, policy)
    used = [lookup_stats(stats, key) for key in dict.fromkeys(keys)]
    by_key = {s.group_key: s for s in used}

    mu_hpt = np.array([by_key[k].mu_hpt for k in keys], dtype=float)
    sigma_hpt = np.array([by_key[k].sigma_hpt for k in keys], dtype=float)
    mu_lvd = np.array([by_key[k].mu_lvd for k in keys], dtype=float)
    sigma_lvd = np.array([by_key[k].sigma_lvd for k in keys], dtype=float)

    frame = table.frame.copy()
    frame["hpt_z"] = (frame["hpt_s"].to_numpy(dtype=float) - mu_hpt) / sigma_hpt
    frame["lvd_z"] = (frame["lvd_s"].to_numpy(dtype=float) - mu_lvd) / sigma_lvd
    frame["lve_log"] = log_scale(frame["lve_s"].to_numpy(dtype=float))
    frame["lvi_log"] = log_scale(frame["lvi_s"].to_numpy(dtype=float))

    logger.debug(
        "Normalized %d rows over %d group(s) with policy %s", len(frame), len(used), policy.value
    )
    return MeasureTable(
        frame, norm_policy=policy.value, norm_stats=tuple(used), excluded=table.excluded
    )
