"""Exception hierarchy shared by all modules."""


class PosinormalError(Exception):
    """Base class for errors raised by this package."""


class InputError(PosinormalError, ValueError):
    """Malformed or out-of-domain input."""


class DegenerateInputError(InputError):
    """Input is numerically zero where a nonzero operator is required."""


class PreconditionError(PosinormalError):
    """An operation was called on an input that fails its precondition.

    ``defect`` carries the measured violation (e.g. a range-inclusion defect).
    """

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class InternalConsistencyError(PosinormalError, AssertionError):
    """Results contradict an identity that must hold; signals a bug."""
