"""Exception hierarchy shared by the numeric models, allocator and CLI."""


class ConvIPError(Exception):
    """Base class for all errors raised by convip."""


class WidthError(ConvIPError, ValueError):
    """An operand or format is wider than the datapath allows."""


class AccumulatorOverflowError(ConvIPError, OverflowError):
    """An exact sum no longer fits the accumulator format."""


class RangeError(ConvIPError, ValueError):
    """A value falls outside the target format and saturation is disabled."""


class DimensionError(ConvIPError, ValueError):
    """Image, kernel or window shapes are inconsistent."""


class PhaseError(ConvIPError, RuntimeError):
    """An engine was driven out of its load/compute order."""


class OverloadError(PhaseError):
    """More coefficients were loaded than the kernel holds."""


class ArityError(ConvIPError, ValueError):
    """Wrong number of windows supplied to an engine step."""


class SearchSpaceError(ConvIPError, ValueError):
    """The brute-force allocator was asked to enumerate too many vectors."""


class FileFormatError(ConvIPError, ValueError):
    """An input file could not be parsed."""
