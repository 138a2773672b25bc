"""Semantic exception hierarchy shared across the package."""


class SatisrankError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(SatisrankError, ValueError):
    """A divergence or run configuration is invalid (e.g. bad theta)."""


class DomainError(SatisrankError, ValueError):
    """A point lies outside the domain of a conjugate function."""


class InfeasibleEvaluationError(SatisrankError, RuntimeError):
    """Every probe of an inner minimization evaluated to +inf."""


class SolverError(SatisrankError, RuntimeError):
    """A solver could not produce a solution; carries diagnostics in args."""


class InfeasibleParametersError(SatisrankError, ValueError):
    """Bound parameters make a sample-size or probability formula degenerate."""


class ParseError(SatisrankError, ValueError):
    """A data file failed to parse; `line` is the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StreamError(ParseError):
    """A streaming observation source produced a malformed record."""
