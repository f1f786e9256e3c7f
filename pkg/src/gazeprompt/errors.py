"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class CsvSchemaError(PipelineError):
    """The fixation CSV is missing a required column."""

    def __init__(self, column: str) -> None:
        self.column = column
        super().__init__(f"fixation CSV is missing required column {column!r}")


class ImageDecodeError(PipelineError):
    """An image file could not be read or decoded."""

    def __init__(self, path: str, cause: Exception | None = None) -> None:
        self.path = path
        detail = f": {cause}" if cause is not None else ""
        super().__init__(f"cannot decode image at {path!r}{detail}")


class PlanMismatchError(PipelineError):
    """A frame plan does not belong to the scanpath it is applied to."""


class ScoreValidationError(PipelineError):
    """A score set is incomplete or inconsistent."""
