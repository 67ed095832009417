"""Exception types raised across the package."""


class GaugeLabError(Exception):
    """Base class for all errors raised by gauge_lab."""


class DomainError(GaugeLabError, ValueError):
    """Input lies outside the domain of a geometric operation (zero vector, non-unit row, ...)."""


class DimensionError(GaugeLabError, ValueError):
    """Operand shapes are incompatible."""


class DivergenceError(GaugeLabError, RuntimeError):
    """The solver produced a non-finite objective."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class ParseError(GaugeLabError, ValueError):
    """An embedding file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
