"""Exception hierarchy shared across the package."""


class SightlineError(Exception):
    """Base class for all package-specific errors."""


class MapFormatError(SightlineError):
    """Base class for map file parsing errors."""


class MalformedHeader(MapFormatError):
    pass


class DimensionMismatch(MapFormatError):
    pass


class InvalidCellSymbol(MapFormatError):
    pass


class GenerationFailed(SightlineError):
    """Procedural map generation could not meet its connectivity target."""


class OutOfBounds(SightlineError):
    """A coordinate or cell index falls outside the grid."""


class StartOccupied(SightlineError):
    pass


class GoalOccupied(SightlineError):
    pass


class OriginOccupied(SightlineError):
    """A ray or scan was requested from inside an occupied cell."""


class NoInspectionPoint(SightlineError):
    """No traversable cell has line of sight to the target within range."""


class Unreachable(SightlineError):
    """A goal exists but is disconnected from the start."""


class InvalidStartPose(SightlineError):
    pass


class InvalidEpisode(SightlineError):
    pass


class SamplingExhausted(SightlineError):
    """Rejection sampling hit its attempt budget without an accepted episode."""


class SteppingTerminatedEpisode(SightlineError):
    pass


class MissingHistory(SightlineError):
    """Reward computation was handed states with inconsistent histories."""


class EmptyRecordSet(SightlineError):
    pass


class UnknownPolicy(SightlineError):
    pass


class UnknownMode(SightlineError):
    pass


class UsageError(SightlineError):
    """Bad command-line arguments or configuration values."""
