"""Exception types shared across the package."""


class TaseRkError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(TaseRkError):
    """Cholesky factorization hit a non-positive pivot."""


class NotSymmetric(TaseRkError):
    """Matrix deviates from symmetry beyond the accepted tolerance."""


class NotNegativeDefinite(TaseRkError):
    """Matrix has a non-negative eigenvalue where strict negativity is required."""


class NoConvergence(TaseRkError):
    """An iterative eigenvalue solver exhausted its iteration budget."""


class IllConditioned(TaseRkError):
    """Fractional matrix power would overflow or underflow."""


class SingularA(TaseRkError):
    """The splitting matrix A is singular."""


class DuplicateOmega(TaseRkError):
    """Two reciprocal TASE weights coincide and the partial-fraction form breaks down."""


class SolveFailure(TaseRkError):
    """A linear solve inside a time step failed."""


class NonFiniteState(TaseRkError):
    """A stage or state vector became NaN/Inf during a step."""


class PoleHit(TaseRkError):
    """Stability-function evaluation landed exactly on a resolvent pole."""


class RootFindingFailure(TaseRkError):
    """No admissible boundary root was found for some angle."""


class InvalidMu(TaseRkError):
    """A generalized eigenvalue violates Re(mu) >= -1."""


class NotSimultaneouslyDiagonalizable(TaseRkError):
    """The splitting matrices do not share a common eigenbasis."""


class NoBracket(TaseRkError):
    """Empirical step-size search could not bracket the stability threshold."""


class DomainError(TaseRkError, ValueError):
    """Argument outside the mathematical domain of the function."""
