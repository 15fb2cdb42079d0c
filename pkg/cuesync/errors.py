"""
Error types raised by cuesync.

Every failure the pipeline can diagnose has its own class so the CLI can
report it by name. All of them derive from CueSyncError.
"""


class CueSyncError(Exception):
    """Base class for all cuesync errors."""

    pass


# Annotation parsing and alignment


class MalformedFileError(CueSyncError):
    """Raised when an annotation, landmark or canonical file cannot be parsed."""

    pass


class NonmonotonicIntervalsError(CueSyncError):
    """Raised when an interval ends before it starts or intervals overlap."""

    pass


class DanglingTimeSlotRefError(CueSyncError):
    """Raised when an EAF annotation references an undefined time slot."""

    def __init__(self, ref: str):
        super().__init__(f"annotation references undefined time slot {ref!r}")
        self.ref = ref


class CountMismatchError(CueSyncError):
    """Raised when lip and hand tiers hold different numbers of vowels."""

    def __init__(self, n_lip: int, n_hand: int):
        super().__init__(f"{n_lip} lip vowels but {n_hand} hand vowels")
        self.n_lip = n_lip
        self.n_hand = n_hand


class LabelMismatchError(CueSyncError):
    """Raised when paired lip and hand vowels carry different labels."""

    def __init__(self, index: int, lip_label: str, hand_label: str):
        super().__init__(f"vowel {index}: lip label {lip_label!r} != hand label {hand_label!r}")
        self.index = index
        self.lip_label = lip_label
        self.hand_label = hand_label


class NonmonotonicTimeError(CueSyncError):
    """Raised when landmark frame times do not strictly increase."""

    pass


class SchemaViolationError(CueSyncError):
    """Raised when a canonical document or config file breaks its schema."""

    pass


# Timing measures


class NonmonotonicMidpointsError(CueSyncError):
    """Raised when lip target instants of a sentence do not strictly increase."""

    pass


class NonpositiveLveError(CueSyncError):
    """Raised when a lip target instant is not before the sentence end."""

    pass


class DuplicateSentenceError(CueSyncError):
    """Raised when the same cuer/sentence pair is assembled twice."""

    pass


# Statistics and normalization


class EmptyGroupError(CueSyncError):
    """Raised when a statistics group or fit subset has no rows."""

    def __init__(self, group_key: str, detail: str = ""):
        message = f"group {group_key!r} has no rows"
        super().__init__(f"{message}: {detail}" if detail else message)
        self.group_key = group_key


class DegenerateGroupError(CueSyncError):
    """Raised when a group has zero spread (or too few rows) to z-score against."""

    pass


class NonpositiveInputError(CueSyncError):
    """Raised when a log-scale or weighting input is not strictly positive."""

    pass


class MissingStatsError(CueSyncError):
    """Raised when a row's normalization group has no statistics."""

    def __init__(self, group_key: str):
        super().__init__(f"no statistics for group {group_key!r}")
        self.group_key = group_key


# Regression


class DegenerateDesignError(CueSyncError):
    """Raised when a regressor has zero variance."""

    pass


class TooFewPointsError(CueSyncError):
    """Raised when a fit has fewer than two points."""

    pass


class EmptySideError(CueSyncError):
    """Raised when one side of the LVE breakpoint cannot support a fit."""

    def __init__(self, gamma: float, detail: str = ""):
        message = f"breakpoint gamma={gamma} leaves a side with fewer than 2 rows"
        super().__init__(f"{message} ({detail})" if detail else message)
        self.gamma = gamma


class UnfittedPredictorError(CueSyncError):
    """Raised when a predictor lacks the models its variant needs."""

    pass


# Evaluation


class TooFewSentencesError(CueSyncError):
    """Raised when a cuer has too few sentences to split."""

    pass


class LengthMismatchError(CueSyncError):
    """Raised when paired prediction/truth sequences differ in length or are empty."""

    pass


class InstantOutOfRangeError(CueSyncError):
    """Raised when a sampling instant falls outside a landmark track."""

    pass


class MissingClassError(CueSyncError):
    """Raised when classifier training data lacks a hand position class."""

    pass


class MissingTrackError(CueSyncError):
    """Raised when a scored sentence has no landmark track."""

    pass


# Synthesis


class InvalidProfileError(CueSyncError):
    """Raised when a synthetic cuer profile or generation request is invalid."""

    pass


# Command line


class InputNotFoundError(CueSyncError):
    """Raised when a command line input path does not exist."""

    pass
