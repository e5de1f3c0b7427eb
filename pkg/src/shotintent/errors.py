"""Exception hierarchy shared across the toolkit.

Every failure a caller is expected to handle derives from ShotIntentError,
so the CLI can map any of them to a single-line diagnostic and exit 1.
"""


class ShotIntentError(Exception):
    """Base class for all toolkit errors."""


# --- pose / ball data ingestion ---

class MalformedHeader(ShotIntentError):
    pass


class MalformedRow(ShotIntentError):
    pass


class NonMonotonicFrames(ShotIntentError):
    pass


class CoordinateOutOfRange(ShotIntentError):
    pass


class EmptyClip(ShotIntentError):
    pass


class EmptyFolder(ShotIntentError):
    pass


class UnknownRegion(ShotIntentError):
    pass


class NegativeRuns(ShotIntentError):
    pass


# --- preprocessing ---

class AllMissingFeature(ShotIntentError):
    pass


class DegenerateTorso(ShotIntentError):
    pass


class TooShort(ShotIntentError):
    pass


class ExceedsTarget(ShotIntentError):
    pass


# --- learning engine / classifiers ---

class ShapeMismatch(ShotIntentError):
    pass


class NonFiniteGradient(ShotIntentError):
    pass


class SingleClassTraining(ShotIntentError):
    pass


class ConfigMismatch(ShotIntentError):
    pass


# --- metrics / evaluation ---

class EmptyInput(ShotIntentError):
    pass


class SingleClassTest(ShotIntentError):
    pass


class TooFewRuns(ShotIntentError):
    pass


class TooFewFolders(ShotIntentError):
    pass


# --- segmentation ---

class NoBatterFound(ShotIntentError):
    pass


class TrackLost(ShotIntentError):
    """Raised when more than gap_max consecutive frames have no usable detection.

    Carries enough state for callers to keep the partial clip and resume.
    """

    def __init__(self, message, start_frame=None, last_tracked_frame=None,
                 lost_at_frame=None):
        super().__init__(message)
        self.start_frame = start_frame
        self.last_tracked_frame = last_tracked_frame
        self.lost_at_frame = lost_at_frame


# --- weak statistics ---

class DuplicateOverKey(ShotIntentError):
    pass


class RegionMismatch(ShotIntentError):
    pass


# --- persistence / config ---

class VersionMismatch(ShotIntentError):
    pass


class CorruptContainer(ShotIntentError):
    pass


class UnknownConfigKey(ShotIntentError):
    pass
