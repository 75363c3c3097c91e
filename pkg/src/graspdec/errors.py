"""Exception types raised across the decoding pipeline."""


class GraspDecError(Exception):
    """Base class for all package errors."""


class InvalidConfig(GraspDecError):
    """A configuration value violates its documented constraints."""


class InvalidBand(GraspDecError):
    """Band edges violate 0 < low < high < Nyquist."""


class UnstableDesign(GraspDecError):
    """Designed IIR filter has poles on or outside the unit circle."""


class WindowTooLong(GraspDecError):
    """Requested analysis window exceeds the signal duration."""


class EmptySegment(GraspDecError):
    """An empty sample vector was passed where data is required."""


class MissingEMG(GraspDecError):
    """Trial lacks the EMG epoch required by this operation."""


class ChannelCountMismatch(GraspDecError):
    """Epoch channel count differs from what the pipeline expects."""


class UnlabeledTrial(GraspDecError):
    """Trial lacks the class label required by this operation."""


class EmptyInput(GraspDecError):
    """An empty collection was passed where at least one item is required."""


class DegenerateSegment(GraspDecError):
    """Segment carries zero total power; covariance/features undefined."""


class DimensionMismatch(GraspDecError):
    """Array dimensions are inconsistent between operands."""


class SingularComposite(GraspDecError):
    """Composite class covariance is numerically singular."""


class SingleClassInput(GraspDecError):
    """Training labels contain fewer than two classes."""


class SingularCovariance(GraspDecError):
    """Pooled covariance is rank-deficient and shrinkage is zero."""


class EmptyLibrary(GraspDecError):
    """Pattern library holds no patterns to match against."""


class InsufficientData(GraspDecError):
    """Not enough trials to satisfy the evaluation protocol."""


class FormatError(GraspDecError):
    """A file does not conform to the on-disk format.

    Carries the offending path and, when known, the line number.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(f"{message}{where}")


class ChecksumMismatch(FormatError):
    """Stored CRC32 does not match the payload."""


class VersionMismatch(FormatError):
    """File was written by a newer format version than this library reads."""
