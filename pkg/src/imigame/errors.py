"""Exception types shared across the package."""


class ImigameError(Exception):
    """Base class for all package errors."""


class MissingAnchor(ImigameError):
    """Skeleton cannot be normalized: neck invisible or no usable scale reference."""


class Incomparable(ImigameError):
    """Two feature sets share too few valid features to be scored."""


class AmbiguousRoles(ImigameError):
    """Side-based role assignment requested with a track count other than two."""


class EmptyStream(ImigameError):
    """A matcher or stats window received no frames."""


class WindowTooSmall(ImigameError):
    """Motion statistics need at least two frames."""


class MalformedJson(ImigameError):
    """Input bytes are not a valid pose-frame JSON document."""


class WrongKeypointCount(ImigameError):
    """A person's flat keypoint array is not 18 (x, y, confidence) triples."""


class EmptyDirectory(ImigameError):
    """Replay directory contains no keypoint files."""


class BindFailure(ImigameError):
    """Listen endpoint could not be bound."""


class UnknownGesture(ImigameError):
    """A scenario script references a gesture with no registered template."""


class UnknownParticipant(ImigameError):
    """Session start requested for an unregistered participant id."""


class DuplicateId(ImigameError):
    """Participant id already registered."""


class SessionClosed(ImigameError):
    """Append attempted on a closed session log."""


class IllegalTransition(ImigameError):
    """A command is not legal in the current phase."""


class SecondOperator(ImigameError):
    """A second connection claimed the operator role."""


class ConfigError(ImigameError):
    """Configuration file or override could not be applied."""
