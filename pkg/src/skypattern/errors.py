"""Exception hierarchy shared across the toolkit.

Every error carries a stable machine-readable ``code`` so the CLI can emit
single-line, parseable failures.
"""


class SkyPatternError(Exception):
    """Base class for all toolkit errors."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return self.message or self.code


class ZeroDistanceError(SkyPatternError):
    code = "ZeroDistance"


class OrientationOutOfScopeError(SkyPatternError):
    code = "OrientationOutOfScope"


class NonPositiveInputError(SkyPatternError):
    code = "NonPositiveInput"


class IncompleteGridError(SkyPatternError):
    code = "IncompleteGrid"


class InvalidBinWidthError(SkyPatternError):
    code = "InvalidBinWidth"


class EmptyGridError(SkyPatternError):
    code = "EmptyGrid"


class ParseError(SkyPatternError):
    code = "ParseError"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column

    def __str__(self) -> str:
        loc = ""
        if self.line is not None:
            loc = f" (line {self.line}" + (f", column {self.column})" if self.column is not None else ")")
        return f"{self.message}{loc}"


class GridShapeMismatchError(SkyPatternError):
    code = "GridShapeMismatch"


class MissingHeaderError(SkyPatternError):
    code = "MissingHeader"


class EmptyFileError(SkyPatternError):
    code = "EmptyFile"


class MissingFieldError(SkyPatternError):
    code = "MissingField"

    def __init__(self, name: str):
        super().__init__(f"missing required field: {name}")
        self.name = name


class ValueOutOfRangeError(SkyPatternError):
    code = "ValueOutOfRange"

    def __init__(self, name: str, detail: str = ""):
        super().__init__(f"field out of range: {name}" + (f" ({detail})" if detail else ""))
        self.name = name


class IoError(SkyPatternError):
    code = "IoError"


class EmptySamplesError(SkyPatternError):
    code = "EmptySamples"


class MismatchedTestSetsError(SkyPatternError):
    code = "MismatchedTestSets"


class DegenerateTrajectoryError(SkyPatternError):
    code = "DegenerateTrajectory"


class NoAcceptedSamplesError(SkyPatternError):
    code = "NoAcceptedSamples"


class NonMonotoneTimestampsWarning(UserWarning):
    """Flight-log timestamps decreased somewhere; the log is still usable."""
