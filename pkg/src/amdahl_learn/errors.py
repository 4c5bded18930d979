"""Exception and warning types shared across the package."""


class AmdahlError(Exception):
    """Base class for every error raised by amdahl_learn."""


class DomainError(AmdahlError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InputError(AmdahlError, ValueError):
    """Malformed or invalid user input (files, flags, rows).

    ``source`` names the offending file/flag and ``line`` the 1-based line
    number when one applies.
    """

    def __init__(self, message, source=None, line=None):
        self.source = source
        self.line = line
        where = ""
        if source is not None:
            where = f"{source}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class NumericalError(AmdahlError, ArithmeticError):
    """A numerical procedure could not produce a usable result."""


class PredictionError(DomainError):
    """A fitted model produced a nonpositive inverse score for a config."""

    def __init__(self, message, config=None, value=None):
        self.config = config
        self.value = value
        super().__init__(message)


class RankDeficiencyWarning(UserWarning):
    """The design matrix is rank deficient or has a constant feature column."""
