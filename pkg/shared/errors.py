from typing import Optional


class StrictEpiError(Exception):
    """Root of every error raised by this package."""


class InputError(StrictEpiError, ValueError):
    """Malformed user input: dimensions, parameters, files."""


class ExpressionSyntaxError(InputError):
    """
    Syntax error in an expression.
    `position` is the 0-based character offset of the offending token.
    """

    def __init__(self, message: str, position: Optional[int] = None, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(message)

    def diagnostic(self) -> str:
        if self.position is None or not self.source:
            return str(self)
        caret = " " * self.position + "^"
        return f"{self}\n  {self.source}\n  {caret}"


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class VariableIndexError(ExpressionSyntaxError):
    pass


class CorpusFormatError(InputError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EvaluationDomainError(StrictEpiError):
    """log of non-positive, division by zero, sqrt of negative, overflow."""


class NondifferentiableError(EvaluationDomainError):
    pass


class RegionTooThinError(StrictEpiError):
    """Rejection sampling acceptance rate fell below the configured floor."""
