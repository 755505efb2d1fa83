"""Image feature extraction for art-style bias analysis.

Trains a residual classifier to tell art movements apart and exports
each image's penultimate-layer activations as JSON Lines records, the
interchange format the companion analysis package consumes.
"""

__version__ = "0.1.0"

from .errors import (
    ExtractorError,
    ManifestError,
    ManifestParseError,
    TrainingError,
)
from .extract import TrainingLog, train_and_extract
from .manifest import ExtractionManifest, ImageRow, load_manifest
from .network import ARCHS, LAYERS, StyleNetwork, build_network

__all__ = [
    "ARCHS",
    "LAYERS",
    "ExtractionManifest",
    "ExtractorError",
    "ImageRow",
    "ManifestError",
    "ManifestParseError",
    "StyleNetwork",
    "TrainingError",
    "TrainingLog",
    "build_network",
    "load_manifest",
    "train_and_extract",
    "__version__",
]
