"""Exception hierarchy shared by all fracwave modules."""


class FracwaveError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FracwaveError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class PoleError(DomainError):
    """The Gamma function was evaluated at (or numerically on) a pole."""


class SingularAlphaError(DomainError):
    """The fractional order hits alpha = 1/2, where the similarity solution diverges."""


class IntegerAlphaError(DomainError):
    """The fractional order is an integer and the fractional construction does not apply."""


class NonConvergence(FracwaveError, ArithmeticError):
    """A series did not meet its stopping rule within the allowed number of terms."""


class ConditionError(DomainError):
    """Operator coefficients violate the invariance condition 16*nu - 4*beta + gamma = 0."""


class DegenerateError(DomainError):
    """Parameters collapse a solution family to a trivial (time-frozen) case."""


class NotInvariantError(FracwaveError):
    """The basis is not invariant under the operator, so no closed ODE system exists."""


class SupportError(DomainError):
    """A sample point falls outside the compact support of a solution."""
