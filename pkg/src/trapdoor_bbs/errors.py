"""Exception hierarchy shared by every module of the package."""


class TaskError(Exception):
    """Base class for all errors raised by trapdoor_bbs."""


class ParameterError(TaskError, ValueError):
    """An argument is outside the domain an operation accepts."""


class PreconditionError(TaskError, ValueError):
    """The input violates a mathematical precondition (e.g. not a residue)."""


class DegenerateInputError(TaskError, ValueError):
    """The input shares a factor with the modulus."""


class UnsupportedModeError(TaskError):
    """The operation is not available for the task configuration."""


class CapacityError(TaskError):
    """Exhaustive enumeration would be too large."""


class FormatError(TaskError, ValueError):
    """A key or dataset file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VersionError(FormatError):
    """A file carries an unsupported format version."""
