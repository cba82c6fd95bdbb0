"""Error taxonomy shared across the toolkit.

The CLI maps these onto exit codes: InputError -> 2, DivergenceError -> 3,
anything else -> 1.
"""


class InputError(ValueError):
    """Raised when caller-supplied data violates an operation's contract."""


class DivergenceError(RuntimeError):
    """Raised when training produces a non-finite loss or parameters."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")
