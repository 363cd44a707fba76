"""Exception types shared across the package."""


class VteError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(VteError):
    """Operands have incompatible dimensions."""


class ZeroVectorError(VteError):
    """A vector that must have positive norm is (numerically) zero."""


class NonFiniteError(VteError):
    """A value that must be finite is NaN or infinite."""


class CycleError(VteError):
    """An edge insertion would create a directed cycle."""


class SelfLoopError(VteError):
    """An edge may not connect a term to itself."""


class UnknownTermError(VteError):
    """The queried term is not present in the taxonomy."""


class ParseError(VteError):
    """An input file is malformed. Carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionMismatchError(ParseError):
    """An embedding record disagrees with the established dimension."""


class BatchTooSmallError(VteError):
    """A contrastive batch needs at least two items."""


class NoNegativeAvailableError(VteError):
    """All negative-sampling pools for an anchor pair are empty."""


class MissingTextEmbeddingError(VteError):
    """A term that must have a text embedding does not."""


class NonFiniteLossError(VteError):
    """Training produced a non-finite loss value."""

    def __init__(self, message, batch_index=None):
        super().__init__(message)
        self.batch_index = batch_index


class VersionError(VteError):
    """A checkpoint has an unsupported format version or inconsistent shapes."""


class EmptyInputError(VteError):
    """An operation that needs at least one record received none."""


class ConfigError(VteError):
    """A configuration value is invalid."""
