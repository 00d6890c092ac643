"""Exception hierarchy shared across the package."""


class CellforgeError(Exception):
    """Base class for all package errors."""


class UnknownSurfaceError(CellforgeError, LookupError):
    """A region references a surface id that does not exist."""


class InvalidCellError(CellforgeError):
    """A cell violates a validity requirement (unbounded, empty interior, ...)."""


class UnboundedCellError(InvalidCellError):
    """Operation requires a bounded cell."""


class MixedRegionError(CellforgeError):
    """Interior samples of an arrangement region disagree about membership.

    This indicates a surface missing from the arrangement, i.e. a bug in the
    decomposition, never a data condition.
    """


class EmptySolidError(CellforgeError):
    """A CSG expression has no interior at all."""


class DisconnectedError(CellforgeError):
    """The adjacency graph is not connected."""


class SequenceTooShortError(CellforgeError):
    """Splitting needs at least two cells."""


class InconsistentExampleError(CellforgeError):
    """A split example references ids unknown to its part."""


class ScriptError(CellforgeError):
    """Base for script parsing failures."""

    def __init__(self, msg, line=None, col=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {col})" if col is not None else ")")
        super().__init__(msg + loc)
        self.line = line
        self.col = col


class ScriptSyntaxError(ScriptError):
    """The text violates the script grammar."""


class ScriptSemanticError(ScriptError):
    """Grammatically valid script with undefined/duplicate ids or bad params."""


class DegeneratePartError(CellforgeError):
    """Part has a zero-extent bounding box; no canonical form exists."""


class BadInputError(CellforgeError):
    """The trusted input side of an evaluation example does not parse."""


class EmptyGeometryError(CellforgeError):
    """Rendering needs at least one cell."""


class EmptyDatasetError(CellforgeError):
    """Aggregation or splitting over an empty row list."""


class TransportError(CellforgeError):
    """Annotation endpoint unreachable or persistently failing."""


class ProtocolError(CellforgeError):
    """Annotation endpoint answered with a malformed response."""
