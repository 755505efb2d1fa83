class ExtractorError(Exception):
    """Base for everything this package raises on purpose."""


class ManifestError(ExtractorError):
    """Semantically invalid manifest (missing images, bad values)."""


class ManifestParseError(ManifestError):
    """Unparsable manifest file."""


class TrainingError(ExtractorError):
    """Training could not start or finish (e.g. weights unavailable)."""
