"""Exception taxonomy.

``InvalidParameter`` marks caller errors (bad dimension, out-of-range
Delaunay parameter, malformed grids).  Everything that can fail *numerically*
derives from ``NumericalError`` so callers ­— the sweep driver and the CLI —
can distinguish "you asked for something illegal" from "the computation did
not converge".
"""


class InvalidParameter(ValueError):
    """A precondition on user-supplied input is violated."""


class NumericalError(Exception):
    """Base class for numerical failures (non-convergence, blow-up, ...)."""


class NonPositiveV(NumericalError):
    """The conformal factor reached the positivity floor.

    For shooting trajectories this is meaningful feedback (the trajectory
    crashed), not a bug.
    """


class QuadratureFailure(NumericalError):
    """A quadrature could not reach the requested tolerance."""


class StepFloor(NumericalError):
    """The adaptive integrator would need a step below its hard floor."""


class MaxStepsExceeded(NumericalError):
    """The integrator exhausted its step budget."""


class NoTurningPoint(NumericalError):
    """No critical point of v was found before t_max."""


class BracketFailure(NumericalError):
    """The shooting scan found no sign change to bracket a root."""


class NoConvergence(NumericalError):
    """Root iterations were exhausted without meeting the tolerance."""


class EigenFailure(NumericalError):
    """The dense symmetric eigensolver failed to converge."""
