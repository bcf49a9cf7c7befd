"""Exception hierarchy for biasnet."""


class BiasnetError(Exception):
    """Base class for all biasnet errors."""


class InvalidArgumentError(BiasnetError, ValueError):
    """An argument is outside the domain an operation accepts."""


class AbsorbingStateError(InvalidArgumentError):
    """The chain would start in (and never leave) the empty graph."""


class EdgeListParseError(BiasnetError):
    """An edge-list file could not be parsed."""

    def __init__(self, message: str, line_number: int, source: str | None = None):
        self.message = message
        self.line_number = line_number
        self.source = source
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line_number}: {message}")

    def __reduce__(self):
        # survives the trip back from worker processes
        return (type(self), (self.message, self.line_number, self.source))


class SchemaMismatchError(BiasnetError):
    """Feature schema or schema hash differs between artifacts."""


class ArtifactFormatError(BiasnetError):
    """A persisted artifact is corrupt or has an unsupported version."""
