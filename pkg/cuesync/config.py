"""
Run configuration shared by every CLI subcommand.

Defaults live on RunConfig; a flat YAML file can override them and command
line flags override the file. The hash of the effective configuration is
stamped on every output file so results can be traced to their settings.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from cuesync import __version__
from cuesync.annot_io import DEFAULT_POSITION_MAP, DEFAULT_VOWEL_LABELS
from cuesync.errors import SchemaViolationError
from cuesync.measures import LviConvention
from cuesync.normalize import NormPolicy
from cuesync.regression import DEFAULT_GAMMA, F1F2Estimator, F1F2Rows


@dataclass(frozen=True)
class RunConfig:
    """Configuration for the analysis pipeline."""

    # Model
    gamma: float = DEFAULT_GAMMA
    norm_policy: NormPolicy = NormPolicy.PER_CUER
    lvi_convention: LviConvention = LviConvention.BACKWARD
    fit_f1f2_on: F1F2Rows = F1F2Rows.RIGHT
    f1f2_estimator: F1F2Estimator = F1F2Estimator.SEPARATE

    # Evaluation
    split_ratio: tuple[int, int] = (4, 1)
    seed: int = 0
    mhcd_interpolate: bool = False

    # Labels
    vowel_labels: frozenset[str] = DEFAULT_VOWEL_LABELS
    position_map: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_POSITION_MAP))


def _parse_ratio(value) -> tuple[int, int]:
    if isinstance(value, str):
        parts = value.split(":")
    else:
        parts = list(value)
    try:
        train, test = (int(p) for p in parts)
    except (TypeError, ValueError):
        raise SchemaViolationError(f"split ratio must look like 4:1, got {value!r}") from None
    if train <= 0 or test <= 0:
        raise SchemaViolationError(f"split ratio parts must be positive, got {value!r}")
    return train, test


def _parse_labels(value) -> frozenset[str]:
    items = value.split(",") if isinstance(value, str) else list(value)
    labels = frozenset(str(item).strip() for item in items if str(item).strip())
    if not labels:
        raise SchemaViolationError("vowel_labels is empty")
    return labels


def _parse_position_map(value) -> dict[str, int]:
    if isinstance(value, str):
        pairs = [item.split(":") for item in value.split(",") if item.strip()]
    elif isinstance(value, dict):
        pairs = list(value.items())
    else:
        raise SchemaViolationError(f"position_map must be a mapping, got {type(value).__name__}")
    mapping = {}
    for pair in pairs:
        try:
            label, position = pair
            position = int(position)
        except (TypeError, ValueError):
            raise SchemaViolationError(f"bad position_map entry {pair!r}") from None
        if position not in range(1, 6):
            raise SchemaViolationError(f"position class for {label!r} must be 1..5")
        mapping[str(label).strip()] = position
    return mapping


def _coerce(name: str, value):
    """Convert a raw (file or flag) value to the type of a RunConfig field."""
    try:
        if name == "gamma":
            return float(value)
        if name == "norm_policy":
            return NormPolicy(value)
        if name == "lvi_convention":
            return LviConvention(value)
        if name == "fit_f1f2_on":
            return F1F2Rows(value)
        if name == "f1f2_estimator":
            return F1F2Estimator(value)
        if name == "seed":
            return int(value)
        if name == "mhcd_interpolate":
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
    except (TypeError, ValueError) as e:
        raise SchemaViolationError(f"invalid value for {name}: {value!r} ({e})") from None
    if name == "split_ratio":
        return _parse_ratio(value)
    if name == "vowel_labels":
        return _parse_labels(value)
    if name == "position_map":
        return _parse_position_map(value)
    raise SchemaViolationError(f"unknown config key {name!r}")


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Copy of config with every non-None override applied."""
    changes = {name: _coerce(name, value) for name, value in overrides.items() if value is not None}
    return replace(config, **changes)


def load_config(path: Path | None) -> RunConfig:
    """
    Load a flat YAML mapping of RunConfig field names to values.

    Raises:
        SchemaViolationError: Unreadable file, unknown keys or invalid values.
    """
    if path is None:
        return RunConfig()
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as e:
        raise SchemaViolationError(f"cannot read config {path}: {e}") from e
    if data is None:
        return RunConfig()
    if not isinstance(data, dict):
        raise SchemaViolationError(f"{path}: config must be a key-value mapping")

    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise SchemaViolationError(f"{path}: unknown config keys: {', '.join(unknown)}")
    return with_overrides(RunConfig(), **data)


def config_to_dict(config: RunConfig) -> dict:
    """Plain JSON-able view of a config, with sets and maps in sorted order."""
    data = asdict(config)
    for name in ("norm_policy", "lvi_convention", "fit_f1f2_on", "f1f2_estimator"):
        data[name] = getattr(config, name).value
    data["split_ratio"] = list(config.split_ratio)
    data["vowel_labels"] = sorted(config.vowel_labels)
    data["position_map"] = dict(sorted(config.position_map.items()))
    return data


def config_hash(config: RunConfig) -> str:
    """First 12 hex digits of the SHA-256 of the canonical config JSON."""
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def provenance_line(config: RunConfig) -> str:
    """Comment line that opens every CLI output file."""
    return f"# cuesync {__version__} config={config_hash(config)}\n"
