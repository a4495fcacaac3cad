"""Exception types raised across the package."""


class GSQGError(Exception):
    """Base class for all package errors."""


class NonZeroMean(GSQGError, ValueError):
    """A negative-power multiplier was applied to a field with nonzero mean."""


class NotDivergenceFree(GSQGError, ValueError):
    pass


class PointInsideSupport(GSQGError, ValueError):
    pass


class OverlappingSupports(GSQGError, ValueError):
    pass


class NonDyadic(GSQGError, ValueError):
    pass


class NoContraction(GSQGError, RuntimeError):
    pass


class IterLimit(GSQGError, RuntimeError):
    pass


class InconsistentPair(GSQGError, RuntimeError):
    """Forward and back-to-labels maps are no longer mutually inverse."""


class ConsistencyLost(InconsistentPair):
    pass


class BlowupSuspected(GSQGError, RuntimeError):
    pass


class DegenerateDirection(GSQGError, RuntimeError):
    pass


class ParseError(GSQGError, ValueError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ValidationError(GSQGError, ValueError):
    def __init__(self, key, constraint):
        self.key = key
        self.constraint = constraint
        super().__init__(key, constraint)

    def __str__(self):
        return f"{self.key}: {self.constraint}"


class FieldFileError(GSQGError, IOError):
    pass


class BadMagic(FieldFileError):
    pass


class BadLength(FieldFileError):
    pass


class BadVersion(FieldFileError):
    pass
