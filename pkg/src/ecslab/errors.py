"""Exception hierarchy shared by all ecslab modules.

Every numerical failure mode gets its own loud signal instead of a silently
wrong number: series that cannot meet their tail bound, evaluation too close
to a lattice point, arguments outside an analyticity domain, infeasible
configuration sampling, and parameter sets that violate an identity's
precondition.
"""


class EcsError(Exception):
    """Base class for all ecslab errors."""


class TruncationError(EcsError):
    """A series/product hit its term cap before meeting the tail bound."""


class SingularityError(EcsError):
    """Evaluation requested within delta_sing of a lattice point, or a
    coordinate pair closer than the configured minimum separation."""


class DomainError(EcsError):
    """Argument outside the function's domain of definition (annulus bounds,
    ordering violations, beta-derivative at the trigonometric limit)."""


class QuadratureError(DomainError):
    """Contour radius outside the annulus, too few nodes, or a node-doubling
    convergence check that failed."""


class PackingError(EcsError):
    """Requested configuration cannot fit on the circle with the given
    minimum separation and margin."""


class ConstraintError(EcsError):
    """Parameter set violates a precondition of the requested identity
    (e.g. an eigenfunction suite run with the wrong coupling)."""


class DegenerateCoefficientError(EcsError):
    """A contour coefficient vanished (relative to the coefficient scale) at
    every attempted configuration, so the eigenvalue ratio is undefined."""
