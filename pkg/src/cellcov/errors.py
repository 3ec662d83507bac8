"""Exception hierarchy shared by the library and the CLI.

The CLI maps :class:`InvalidParameterError` to exit code 2 and
:class:`NumericalError` to exit code 3.
"""


class CellCovError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(CellCovError, ValueError):
    """An input violates a documented precondition."""


class DivergentIntegralError(InvalidParameterError):
    """The interference integral diverges (path-loss exponent <= 2)."""


class ZeroDenominatorError(InvalidParameterError):
    """All per-BS cost terms vanish, so the optimal density is undefined."""


class EmptyPatternError(InvalidParameterError):
    """An operation needs at least one point but the pattern is empty."""


class NoActiveBSError(CellCovError):
    """A realization has no BS with an associated mobile."""


class NumericalError(CellCovError, ArithmeticError):
    """A numerical routine failed to reach its target accuracy."""


class NonConvergenceError(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget."""


class BracketError(NumericalError):
    """The search bracket is invalid or never captured the minimizer."""


class NonUnimodalError(BracketError):
    """The objective is monotone across the fully expanded bracket."""
