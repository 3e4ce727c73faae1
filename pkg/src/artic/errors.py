"""Exception hierarchy for the toolkit.

All toolkit errors derive from :class:`ArticError` so callers can catch one
base class at pipeline boundaries (the CLI maps them to exit code 1 or 2).
"""


class ArticError(Exception):
    """Base class for all toolkit errors."""


class LoadError(ArticError):
    """A referenced file is missing or unreadable."""


class SchemaError(ArticError):
    """Loaded data violates a structural invariant (point counts, labels)."""


class FormatError(ArticError):
    """A binary or JSON container is corrupt or has the wrong layout."""


class ConfigurationError(ArticError):
    """A configuration value is invalid or inconsistent."""


class AlignmentError(ArticError):
    """Paired signals disagree in length or rate beyond tolerance."""


class StatisticsError(ArticError):
    """Not enough data to compute the requested statistic."""


class ShapeError(ArticError):
    """A tensor or matrix has an unexpected shape."""


class TrainingDivergedError(ArticError):
    """A loss term became non-finite; message names the term and step."""


class TransportError(ArticError):
    """An external client (ASR, feature extractor) failed."""


class DeviceError(ArticError):
    """The requested compute device is unavailable."""
