"""Exception types shared across the toolkit.

The CLI maps DataError to exit code 2 and NumericError to exit code 3;
plain usage problems exit with 1.
"""


class EarlywarnError(Exception):
    """Base class for all toolkit errors."""


class DataError(EarlywarnError):
    """Input data is missing, malformed, or inconsistent."""


class NumericError(EarlywarnError):
    """A numeric routine failed or was called outside its domain."""


class MissingFileError(DataError):
    """A required input file is absent."""


class SchemaError(DataError):
    """A CSV header does not contain the required columns."""


class ParseError(DataError):
    """A row holds a malformed field; the message carries the line number."""


class UnknownCourseError(DataError):
    """Requested course/presentation not present in the loaded tables."""


class EmptyCourseError(DataError):
    """A course/presentation selection yielded no participating learners."""


class UnassignedCohortError(DataError):
    """A sample's presentation belongs to neither the train nor the test split."""


class ShapeMismatchError(DataError):
    """Array shapes or channel vocabularies are inconsistent."""


class InvalidHorizonError(DataError):
    """Observation horizon must be at least one week."""


class LengthMismatchError(DataError):
    """Prediction and truth vectors differ in length."""


class ClassOutOfRangeError(DataError):
    """A class index lies outside [0, n_classes)."""


class EmptySeriesError(DataError):
    """DTW requires non-empty sequences."""


class InvalidTargetError(DataError):
    """A classification target lies outside [0, n_classes)."""


class SingleClassTrainingSetError(DataError):
    """Training requires at least two distinct classes."""


class DegenerateBatchError(NumericError):
    """Batch normalization needs a batch of at least two samples in train mode."""


class TrainingFailedError(NumericError):
    """Training diverged (non-finite loss) or could not complete."""
