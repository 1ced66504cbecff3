"""Exception hierarchy shared by every weylkit module."""


class WeylkitError(Exception):
    """Base class for all library errors."""


class ParseError(WeylkitError, ValueError):
    """Malformed expression text. ``offset`` is the byte offset of the first error."""

    def __init__(self, message, offset, text=""):
        self.message = message
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class EvalError(WeylkitError, ValueError):
    """Expression could not be evaluated (unbound name, bad call)."""


class DomainError(EvalError):
    """log of non-positive, sqrt of negative, division by zero, ..."""


class SpecFileError(WeylkitError, ValueError):
    def __init__(self, message, path="<string>", line=0, col=0):
        self.message = message
        self.path = path
        self.line = line
        self.col = col
        super().__init__(f"{path}:{line}:{col}: {message}")


class TensorError(WeylkitError, ValueError):
    """Shape, slot or variance mismatch in a tensor operation."""


class GeometryError(WeylkitError):
    """Base class for failures of the geometric data at a point."""


class DegenerateMetricError(GeometryError):
    pass


class SignatureError(GeometryError):
    pass


class PreconditionError(WeylkitError, ValueError):
    """An operation's documented precondition does not hold at the point."""


class NoPotentialError(PreconditionError):
    pass
