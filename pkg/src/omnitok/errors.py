"""Exception hierarchy shared by every omnitok module."""


class OmnitokError(Exception):
    """Base class for all errors raised by omnitok."""


class InvalidInputError(OmnitokError, ValueError):
    """An argument is outside its documented domain."""


class BudgetInfeasibleError(OmnitokError):
    """A patch budget admits no even grid."""


class OversizeSequenceError(InvalidInputError):
    """A sequence is longer than the packing capacity."""

    def __init__(self, index: int, length: int, capacity: int):
        super().__init__(
            f"sequence {index} has length {length} > capacity {capacity}"
        )
        self.index = index
        self.length = length
        self.capacity = capacity


class MalformedStreamError(OmnitokError):
    """A token-event stream violates the single think-block grammar."""


class InvalidStateError(OmnitokError):
    """An operation was called in a state that does not allow it."""


class InvariantViolation(OmnitokError, AssertionError):
    """Internal consistency check failed; indicates a bug, not bad input."""
