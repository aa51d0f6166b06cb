"""Exception hierarchy shared by all modules."""


class PolyDecompError(Exception):
    """Base class for every error raised by this package."""


class DivisionByZero(PolyDecompError, ZeroDivisionError):
    pass


class CtxMismatch(PolyDecompError, ValueError):
    pass


class ArityMismatch(PolyDecompError, ValueError):
    pass


class IndexOutOfRange(PolyDecompError, IndexError):
    pass


class DegreeTooSmall(PolyDecompError, ValueError):
    pass


class DimMismatch(PolyDecompError, ValueError):
    pass


class NoSolution(PolyDecompError, ArithmeticError):
    """A linear system (or a left-factor ansatz) has no solution."""


class DegenerateLinearForm(PolyDecompError, ValueError):
    pass


class EmptySpace(PolyDecompError, ValueError):
    pass


class DimExceedsN(PolyDecompError, ValueError):
    pass


class InvalidRank(PolyDecompError, ValueError):
    pass


class PreconditionError(PolyDecompError, ValueError):
    pass


class HypothesisViolated(PolyDecompError, ValueError):
    pass


class BudgetExceeded(PolyDecompError, RuntimeError):
    pass


class ParseError(PolyDecompError, ValueError):
    """Malformed serialized input. ``position`` is a char offset or a JSON path."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at {position})"
        super().__init__(message)


class DecompositionFailure(PolyDecompError):
    """A decomposition pipeline gave up.

    ``stage`` names the step that failed; ``diagnostics`` is a plain dict
    suitable for JSON output.
    """

    def __init__(self, stage, message="", diagnostics=None):
        self.stage = stage
        self.diagnostics = dict(diagnostics or {})
        super().__init__(f"[{stage}] {message}" if message else f"[{stage}]")
