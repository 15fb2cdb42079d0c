"""cuesync - Lip/hand re-synchronization toolkit for Cued Speech annotations."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("cuesync")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.0.0"

# Annotation file extensions recognized by directory scans (shared across modules)
TEXTGRID_EXTENSIONS = {".textgrid"}
EAF_EXTENSIONS = {".eaf"}
CANONICAL_EXTENSIONS = {".jsonl", ".json"}
