"""Exception types raised by iceseg loaders and operators."""


class IcesegError(Exception):
    """Base class for all iceseg errors."""


class InputError(IcesegError, ValueError):
    """Base class for errors caused by bad user input (CLI exit code 2)."""


class MissingFrames(InputError):
    """Fewer than two frames matched the input pattern."""


class DimensionMismatch(InputError):
    """Rasters that must share dimensions do not."""


class DecodeError(InputError):
    """An image file could not be decoded."""


class BadMagic(InputError):
    """A .flo file does not start with the Middlebury sanity constant."""


class TruncatedFile(InputError):
    """A .flo file ended before the declared payload."""


class NonFiniteValue(InputError):
    """A value that must be finite is NaN or infinite."""


class BadConfig(InputError):
    """A run configuration violates its invariants."""


class EmptyBoundary(IcesegError, ValueError):
    """A proposal has no boundary pixels."""


class EmptyMask(IcesegError, ValueError):
    """A proposal mask has no pixels."""


class EmptyInput(IcesegError, ValueError):
    """An operation that needs at least one sample got none."""


class EmptyDictionary(IcesegError, ValueError):
    """A bag-of-words dictionary is empty and the fallback is disabled."""


class BlockMismatch(IcesegError, ValueError):
    """Histogram block layouts differ between the two operands."""


class BadThresholds(IcesegError, ValueError):
    """Trimap thresholds violate theta1 > theta2."""


class EmptyMatrix(IcesegError, ValueError):
    """An assignment cost matrix has no rows or columns."""


class LengthMismatch(InputError):
    """Two aligned sequences have different lengths."""


class InternalError(IcesegError):
    """An internal invariant was violated (CLI exit code 3)."""
