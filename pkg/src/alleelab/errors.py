"""Exception hierarchy shared by all analysis modules."""


class AlleeLabError(Exception):
    """Base class for all package errors."""


class DomainError(AlleeLabError):
    """Raised when an evaluation point or parameter set is infeasible."""


class DegenerateError(AlleeLabError):
    """A classification was requested at a degenerate (non-hyperbolic) point."""


class BoundaryCase(AlleeLabError):
    """A sign-based classification was requested inside its roundoff band."""


class IllConditioned(AlleeLabError):
    """A linear-algebra kernel failed to converge or lost all accuracy."""


class NotDegenerate(AlleeLabError):
    """A degeneracy test was invoked at a point that is not degenerate."""


class ConditionsNotMet(AlleeLabError):
    """Preconditions of a normal-form test do not hold at the given point."""


class NotHopf(AlleeLabError):
    """Hopf conditions (equilibrium, zero trace, positive determinant) fail."""


class NotDegenerateHopf(AlleeLabError):
    """Second Lyapunov coefficient requested away from a first-coefficient zero."""


class NewtonDivergence(AlleeLabError):
    """Newton corrector failed after exhausting step halving."""


class SingularJacobianAtStart(AlleeLabError):
    """Continuation cannot start: singular Jacobian at the initial solution."""


class DegenerateHopf(AlleeLabError):
    """Branch switching at a Hopf point with vanishing first Lyapunov coefficient."""


class BVPDivergence(AlleeLabError):
    """Collocation corrector for a periodic orbit failed to converge."""


class MeshCollapse(AlleeLabError):
    """Adaptive remeshing can no longer resolve the orbit profile."""


class IllConditionedMonodromy(AlleeLabError):
    """Floquet computation produced an unreliable monodromy matrix."""


class NoPeriodBlowup(AlleeLabError):
    """Homoclinic approximation requested on a branch without period growth."""


class IncompleteBranch(AlleeLabError):
    """Topology classification requested on a branch that did not terminate."""


class StartNotOnCurve(AlleeLabError):
    """Two-parameter continuation started from a point violating the defining system."""


class MissingCodim2Data(AlleeLabError):
    """Region construction lacks a required codimension-two point."""


class AmbiguousSample(AlleeLabError):
    """A region sample point lies too close to a bounding curve."""
