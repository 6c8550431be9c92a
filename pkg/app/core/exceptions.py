"""Exceptions raised by the tt* toolkit."""


class TtStarError(Exception):
    """Base class for every error raised by this package"""


class TruncationMismatchError(TtStarError):
    """Two truncated series with different truncation orders were combined"""


class NonUnitError(TtStarError):
    """An inverse was requested for an element whose constant term is not a unit"""


class SeriesDomainError(TtStarError):
    """A series function was applied outside its domain (log/exp)"""


class FactorizationError(TtStarError):
    """The Birkhoff factorization precondition failed"""


class ConventionError(TtStarError):
    """A quantity that must be z-free or diagonal in (q, qbar) is not"""


class PolynomialityError(TtStarError):
    """A metric coefficient F_n is not a polynomial of the expected shape"""


class SingularSystemError(TtStarError):
    """The linear system for a recursion coefficient is rank deficient"""


class InconsistentSystemError(TtStarError):
    """The linear system for a recursion coefficient has no solution"""


class OdeDivergenceError(TtStarError):
    """The integrated trajectory left the separatrix and blew up"""


class StepSizeError(TtStarError):
    """The adaptive integrator could not make progress"""


class TailConvergenceError(TtStarError):
    """An improper integral did not converge on the configured window"""


class HardLefschetzError(TtStarError):
    """The raising operator does not satisfy hard Lefschetz"""


class NotNilpotentError(TtStarError):
    """A weight filtration was requested for a non-nilpotent operator"""


class UsageError(TtStarError):
    """Bad command-line usage"""
