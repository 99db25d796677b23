"""Exception types shared across the package.

Two families: validation errors (bad shapes, lengths, or configuration;
CLI exit code 2) and numerical errors (a computation could not produce a
trustworthy result; CLI exit code 3).
"""


class ValidationError(Exception):
    """Invalid input shape, length, file, or configuration."""


class NumericalError(Exception):
    """A numerical routine failed or its result cannot be trusted."""


class DimensionMismatch(ValidationError):
    """Array dimensions are inconsistent with each other."""


class ShapeMismatch(ValidationError):
    """A collection of arrays does not share the required common shape."""


class InvalidLowFrequencyParameter(ValidationError):
    """Number of kept spectrum slices outside [1, floor(N/2)+1]."""


class TooManyAnchors(ValidationError):
    """More anchors requested than samples available."""


class TooManyClusters(ValidationError):
    """More clusters requested than samples available."""


class EmbedDimTooSmall(ValidationError):
    """Column normalization needs at least two rows."""


class LengthMismatch(ValidationError):
    """Two label sequences have different lengths."""


class EmptyInput(ValidationError):
    """An operation received fewer elements than it can work on."""


class ParseError(ValidationError):
    """A data file could not be parsed."""


class MissingFile(ValidationError):
    """A referenced data file does not exist."""


class NonRealResult(NumericalError):
    """Inverse transform of a non-symmetric spectrum left a large imaginary part."""


class DegenerateView(NumericalError):
    """Kernel-width estimation collapsed to zero (all sampled distances zero)."""


class SingularSystem(NumericalError):
    """Ridge system unsolvable within tolerance even via pseudo-inverse."""
