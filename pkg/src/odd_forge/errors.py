"""Exception types shared across the toolkit."""


class OddForgeError(Exception):
    """Base class for all toolkit-specific errors."""


class InvalidInputError(OddForgeError, ValueError):
    """An operation received a value outside its documented domain."""


class ConfigurationError(OddForgeError):
    """A required configuration element is missing or malformed."""


class GenerationError(OddForgeError):
    """Trajectory generation produced a frame outside the approach cone.

    ``frame`` and ``parameter`` identify the first offending keyframe so the
    caller can report which constraint was broken.
    """

    def __init__(self, message: str, frame: int | None = None,
                 parameter: str | None = None):
        super().__init__(message)
        self.frame = frame
        self.parameter = parameter


class InvalidLabelError(OddForgeError, ValueError):
    """A label's corner polygon is degenerate or self-intersecting."""


class DatasetIOError(OddForgeError):
    """A dataset file is unreadable, unwritable, or structurally broken."""


class DatasetFormatError(DatasetIOError):
    """The file parses but most rows violate the schema."""


class SplitIntegrityError(DatasetIOError):
    """The same image id appears in splits that must be disjoint."""


class NotApplicableError(OddForgeError):
    """A quality check cannot run on the provided data."""
