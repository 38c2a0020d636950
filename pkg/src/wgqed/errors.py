class WgqedError(Exception):
    """Base class for all package errors."""


class ValidationError(WgqedError, ValueError):
    """A scenario or argument violates one or more invariants.

    ``problems`` holds every violation found, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConfigError(ValidationError):
    """A config file could not be parsed."""


class SingularSeparationError(ValidationError):
    """Two emitters sit at the same position."""


class MissingDriveError(WgqedError):
    """A drive was requested for a scenario without an input pulse."""


class NumericalError(WgqedError, ArithmeticError):
    """A solver failed (singular matrix, NaN, non-convergence)."""
