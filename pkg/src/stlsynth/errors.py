"""Exception hierarchy shared across the toolkit."""


class StlSynthError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(StlSynthError):
    """Operands have incompatible ambient dimensions."""


class InfeasibleConstraint(StlSynthError):
    """A coefficient constraint system has no solution at all."""


class EmptySet(StlSynthError):
    """Operation requires a non-empty set."""


class UnsupportedDimension(StlSynthError):
    """Operation is only implemented for a restricted ambient dimension."""


class ComplexityGuard(StlSynthError):
    """Combinatorial work would exceed the configured cap."""


class DegenerateCenters(StlSynthError):
    """Seed centers produce a rank-deficient generator matrix."""


class NonConvexGap(StlSynthError):
    """A leftover workspace component has no convex cover."""

    def __init__(self, message, component_points=None):
        super().__init__(message)
        self.component_points = component_points


class StlSyntaxError(StlSynthError):
    """Formula text could not be parsed."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class UnknownRegion(StlSynthError):
    """Formula references a region absent from the named-region table."""


class MalformedInterval(StlSynthError):
    """Temporal interval with a > b."""


class OutOfWindow(StlSynthError):
    """Until-rewrite instant lies outside the operator window."""


class HorizonTooShort(StlSynthError):
    """Trajectory does not span the formula horizon."""


class UnsupportedFragment(StlSynthError):
    """Formula node outside the supported fragment."""


class ZeroEvaluation(StlSynthError):
    """A path cell evaluates to zero, so no time share can be assigned."""


class NoPath(StlSynthError):
    """No admissible path realizes the accepting sequence."""


class WindowConflict(StlSynthError):
    """Terminal operator window is incompatible with the assigned task window."""


class InfeasibleProblem(StlSynthError):
    """Optimization problem admits no feasible point."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class StateExplosion(StlSynthError):
    """Simulated state left the sanity envelope."""


class NumericalFailure(StlSynthError):
    """Solver exceeded its iteration budget without a verdict."""


class MaxIterations(StlSynthError):
    """Iterative solver failed to converge within the budget."""


class NoConvergence(StlSynthError):
    """Riccati iteration did not converge (pair may not be stabilizable)."""
