"""Exception hierarchy.

Validation failures derive from :class:`ValidationError` (a ``ValueError``),
so callers that only care about "bad input" can catch one class. The CLI maps
the three top-level families onto its exit codes.
"""


class QDivError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QDivError, ValueError):
    """An input failed one of its type invariants."""


class NotHermitian(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class InvalidEntropicIndex(ValidationError):
    pass


class NonPositiveArgument(ValidationError):
    pass


class BadRank(ValidationError):
    pass


class BadPartition(ValidationError):
    pass


class IndexMismatch(ValidationError):
    """Two divergence values carry different entropic indices."""


class DimensionMismatch(QDivError, ValueError):
    """Operands live on Hilbert spaces of different dimension."""


class InvalidProjectorFamily(QDivError, ValueError):
    """Projectors are not idempotent, not mutually orthogonal, or do not sum to I."""


class NotRankOneFamily(InvalidProjectorFamily):
    pass


class SingularSupport(QDivError, ArithmeticError):
    """A matrix logarithm was requested for an operator with a zero eigenvalue."""


class SupportViolation(QDivError, ArithmeticError):
    """The support of rho is not contained in the support of sigma."""


class ConvergenceFailure(QDivError, ArithmeticError):
    pass
