from .backbone import FEATURE_DIM, build_backbone, weight_digest
from .extract import (
    TOOL_NAME,
    TOOL_VERSION,
    ExtractJob,
    ExtractResult,
    ManifestError,
    SkippedImage,
    extract,
    read_manifest,
)
from .nfte import NfteWriter

__version__ = TOOL_VERSION

__all__ = [
    "FEATURE_DIM",
    "ExtractJob",
    "ExtractResult",
    "ManifestError",
    "NfteWriter",
    "SkippedImage",
    "TOOL_NAME",
    "TOOL_VERSION",
    "build_backbone",
    "extract",
    "read_manifest",
    "weight_digest",
    "__version__",
]
