"""Exception types raised across the package."""


class RoadStereoError(Exception):
    """Base class for all errors raised by roadstereo."""


class FormatError(RoadStereoError):
    """A file does not conform to the expected on-disk format."""


class UnsupportedDepthError(FormatError):
    """Image bit depth or channel layout is not supported."""


class TruncatedPayloadError(FormatError):
    """File header promises more pixel data than the file contains."""


class DisparityOverflowError(RoadStereoError):
    """A disparity value cannot be represented in the requested format."""


class InsufficientMatchesError(RoadStereoError):
    """Too few correspondences to determine the row-shift model."""


class RankDeficientError(RoadStereoError):
    """The least-squares system has no unique solution."""


class DegenerateBlockError(RoadStereoError):
    """A matching block has zero intensity variance; its cost is undefined."""


class NoSamplesError(RoadStereoError):
    """A selection of disparity pixels came up empty."""


class BadSceneError(RoadStereoError):
    """A synthetic scene would produce negative disparities somewhere."""
