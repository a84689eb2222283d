"""Exception hierarchy for the gesturekit engine."""


class GestureKitError(Exception):
    """Base class for all gesturekit errors."""


class EmptyFrameError(GestureKitError):
    """A frame with no detected hands was passed where a hand is required."""


class UnknownSettingError(GestureKitError):
    """Requested a built-in augmentation setting id that does not exist."""


class NoHandDetectedError(GestureKitError):
    """No hand was detected in any augmentation stage of the input image."""


class MissingContextError(GestureKitError):
    """A replay detector was invoked without a replay key."""


class ReplayFormatError(GestureKitError):
    """A replay file record is malformed.

    Carries the 1-based line number of the offending record.
    """

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyClassError(GestureKitError):
    """A gesture class has no training vectors."""


class DimensionMismatchError(GestureKitError):
    """Vectors of inconsistent dimensionality were mixed."""


class ZeroVectorError(GestureKitError):
    """Cosine similarity is undefined for an all-zero vector."""


class NotFittedError(GestureKitError):
    """Classifier used before fit()."""


class NonFiniteLossError(GestureKitError):
    """Logistic regression training loss diverged to a non-finite value."""


class DegenerateTrajectoryError(GestureKitError):
    """A trajectory with zero total arc length: the hand never moved."""


class InvalidCountsError(GestureKitError):
    """Evaluation counts violate 0 <= correct <= detected <= total."""


class InsufficientSamplesError(GestureKitError):
    """A class has too few samples for the requested n-shot plan."""


class UnsupportedVersionError(GestureKitError):
    """A persisted model file declares a format newer than this library supports."""
