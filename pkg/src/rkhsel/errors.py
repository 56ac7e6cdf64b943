"""Exception types raised across the package."""


class RkhselError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(RkhselError, ValueError):
    pass


class NonPSD(RkhselError, ValueError):
    """Symmetric factorization failed even at the maximum jitter."""


class NotPositiveDefinite(RkhselError, ValueError):
    pass


class InvalidInterval(RkhselError, ValueError):
    pass


class InvalidBandwidth(RkhselError, ValueError):
    pass


class DegenerateData(RkhselError, ValueError):
    pass


class KernelOverflow(RkhselError, OverflowError):
    """A Gram entry exceeded the finite range guard."""


class IndexOutOfRange(RkhselError, IndexError):
    pass


class InvalidLabel(RkhselError, ValueError):
    pass


class InvalidDimension(RkhselError, ValueError):
    pass


class EmptySupport(RkhselError, ValueError):
    pass


class ParseError(RkhselError, ValueError):
    pass


class LabelError(RkhselError, ValueError):
    pass


class ShapeError(RkhselError, ValueError):
    pass


class SchemaError(RkhselError, ValueError):
    pass
