"""Exceptions raised by fresco and mapped to CLI exit codes."""


class FrescoError(Exception):
    """Base class for errors raised by fresco."""

    exit_code = 1


class InvalidInputError(FrescoError, ValueError):
    """Input curves, parameters or files violate a precondition."""

    exit_code = 1


class CandidateLimitError(FrescoError, RuntimeError):
    """Candidate enumeration would exceed the configured cap."""

    exit_code = 2

    def __init__(self, requested: int, limit: int) -> None:
        """Initializes the error with the requested and allowed candidate counts.

        Args:
            requested: int, number of candidate curves the enumeration needs.
            limit: int, configured maximum.
        """
        self.requested = requested
        self.limit = limit
        super().__init__(
            f"candidate enumeration needs {requested} curves, limit is {limit}"
        )


class InvariantViolationError(FrescoError, AssertionError):
    """An internal consistency check failed."""

    exit_code = 3
