"""Exception types shared across the package."""


class StochLieError(Exception):
    """Base class for all package errors."""


class UnknownVariableError(StochLieError, KeyError):
    def __init__(self, name, variables=()):
        self.name = name
        self.variables = tuple(variables)
        super().__init__(f"unknown variable {name!r} (declared: {', '.join(self.variables) or 'none'})")

    def __str__(self):
        return self.args[0]


class PoleError(StochLieError, ZeroDivisionError):
    """A denominator vanishes (or nearly vanishes) where a value was requested."""

    def __init__(self, message, label=None, step=None):
        super().__init__(message)
        self.label = label
        self.step = step


class ParseError(StochLieError, ValueError):
    def __init__(self, message, text="", column=None, line=None):
        self.message = message
        self.text = text
        self.column = column
        self.line = line
        where = ""
        if line is not None:
            where += f"line {line}, "
        if column is not None:
            where += f"column {column}: "
        super().__init__(f"{where}{message}")


class ChartMismatchError(StochLieError, ValueError):
    pass


class InterpretationError(StochLieError, ValueError):
    """Operation called on an operator with the wrong Itô/Stratonovich flag."""


class NotClosedError(StochLieError, ValueError):
    def __init__(self, message, pair=None, bracket=None):
        super().__init__(message)
        self.pair = pair
        self.bracket = bracket


class DecompositionMismatch(StochLieError, ValueError):
    def __init__(self, message, component=None, residual=None):
        super().__init__(message)
        self.component = component
        self.residual = residual


class SamplingError(StochLieError, RuntimeError):
    """Could not find a usable random sample point within the retry budget."""
