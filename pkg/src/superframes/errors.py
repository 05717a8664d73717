"""
Typed errors raised by the superframe toolkit.
"""


class SuperframeError(Exception):
    """Base class for all toolkit errors."""


class FormatError(SuperframeError, ValueError):
    """An input file does not follow its declared format."""


class BadMagic(FormatError):
    """A flow file does not start with the Middlebury magic number."""


class Truncated(FormatError):
    """A payload is shorter than its header declares."""


class NonPositiveDims(FormatError):
    """A header declares a zero or negative width or height."""


class BadHeader(FormatError):
    """An image header cannot be parsed."""


class UnsupportedMaxval(FormatError):
    """A PGM maxval outside 1..255."""


class OutOfRange(FormatError):
    """A boundary index outside [1, n_frames - 1]."""


class NotAnInteger(FormatError):
    """A boundary line that is not an integer."""


class MissingColumn(FormatError):
    """A feature table lacks a required column."""


class NonConsecutiveFrames(FormatError):
    """Feature table frame indices are not 0..N-1 in order."""


class NegativeHistogramValue(FormatError):
    """A histogram bin mass below zero."""


class MalformedRow(FormatError):
    """A table row with a missing or non-numeric value."""


class InvalidFieldError(SuperframeError, ValueError):
    """A domain value breaks a construction rule."""


class InvalidBoundaries(SuperframeError, ValueError):
    """Boundary indices are not strictly increasing."""


class KTooLarge(SuperframeError, ValueError):
    """Requested cluster count exceeds the number of frames."""


class FrameCountMismatch(SuperframeError, ValueError):
    """Result and ground truth describe videos of different length."""


class MixedDimensions(SuperframeError, ValueError):
    """Frames of one sequence have different sizes."""


class DimensionMismatch(SuperframeError, ValueError):
    """Two volumes compared by phase correlation differ in shape."""


class SpecInvalid(SuperframeError, ValueError):
    """A synthetic sequence description is inconsistent."""


class IndexOutOfRange(SuperframeError, IndexError):
    """A frame index has no central-difference neighbours."""


class IoFailure(SuperframeError, OSError):
    """Writing an output file failed."""
