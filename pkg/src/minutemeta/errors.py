"""Exception hierarchy shared across the package."""


class MinuteMetaError(Exception):
    """Base class for all package errors."""


class SchemaError(MinuteMetaError):
    """A corpus record does not match the expected schema."""

    def __init__(self, message: str, doc_id: str | None = None, field: str | None = None):
        self.doc_id = doc_id
        self.field = field
        parts = [message]
        if doc_id is not None:
            parts.append(f"doc_id={doc_id!r}")
        if field is not None:
            parts.append(f"field={field!r}")
        super().__init__(" ".join(parts))


class SpanError(MinuteMetaError):
    """A character span is out of bounds or overlaps another span."""


class AlignmentError(MinuteMetaError):
    """Annotation or subword boundaries do not line up with tokens."""


class ConfigError(MinuteMetaError):
    """Invalid configuration value or combination."""


class DataError(MinuteMetaError):
    """Dataset is empty or inconsistent in a way that prevents training."""


class BackendError(MinuteMetaError):
    """Model loading, device placement, or inference failure."""


class DimensionError(MinuteMetaError):
    """Score matrices with mismatched shapes."""


class OverlapError(MinuteMetaError):
    """Predicted opening and closing segments overlap (strict mode)."""


class CoordError(MinuteMetaError):
    """Entity offsets exceed document bounds."""


class PoolExhausted(MinuteMetaError):
    """A finite replacement pool cannot supply enough distinct surfaces."""


class UnparseableDatetime(MinuteMetaError):
    """A date/time surface does not match any recognized format."""


class MeterUnavailable(MinuteMetaError):
    """No hardware energy counters are available."""


class ParseFailure(MinuteMetaError):
    """A model response could not be parsed as JSON after all repairs."""


class EndpointError(MinuteMetaError):
    """The completion endpoint failed after retries."""
