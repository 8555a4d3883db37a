"""Exception hierarchy shared by every module."""


class CuspforgeError(Exception):
    """Base class for all errors raised by cuspforge."""


class DomainError(CuspforgeError, ValueError):
    """A coordinate lies outside the domain of a profile or metric."""


class AxisError(DomainError):
    """Evaluation too close to a coordinate axis where a warping factor vanishes."""


class PatchFailure(CuspforgeError):
    """No smoothing window satisfied the convexity margin."""


class QuadratureFailure(CuspforgeError):
    """Adaptive quadrature did not reach its tolerance under the subdivision cap."""


class TailError(CuspforgeError):
    """A matched truncation fell before the exponential tail of a profile."""


class SideConditionError(CuspforgeError, ValueError):
    """The cyclic-cover side condition (m-1)/m < 1-eps is violated."""


class Inconclusive(CuspforgeError):
    """No comparison series decided convergence within the term budget."""


class BudgetInfeasible(CuspforgeError):
    """A truncation plan cannot keep the curvature below the growth budget."""

    def __init__(self, message: str, radius: float | None = None):
        super().__init__(message)
        self.radius = radius


class HorizonError(CuspforgeError, ValueError):
    """A requested radius lies beyond the extent of a chain model."""


class ConfigError(CuspforgeError):
    """Required configuration (for instance the Margulis constant) is missing."""


class StepFailure(CuspforgeError):
    """The ODE integrator's step size underflowed."""


class DomainExit(CuspforgeError):
    """A geodesic left the coordinate chart of its surface."""


class NoBracket(CuspforgeError):
    """Shooting found no sign change of the miss function."""


class ToleranceFailure(CuspforgeError):
    """Shooting bracketed a root but could not reach the endpoint tolerance."""
