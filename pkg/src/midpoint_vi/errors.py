"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach the requested tolerance.

    Attributes
    ----------
    iterations : int
        Number of iterations performed before giving up.
    residual_norm : float
        Infinity norm of the residual at the last iterate.
    x : ndarray or None
        The last iterate.
    """

    def __init__(self, message, iterations=0, residual_norm=float("nan"), x=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual_norm = residual_norm
        self.x = x


class ConditioningError(ConvergenceError):
    """The Jacobian became singular (or numerically so) during a Newton solve."""


class StepFailure(ConvergenceError):
    """A time step of an integrator could not be solved.

    Carries the failing step index and the trajectory computed so far
    (``partial``, a :class:`~midpoint_vi.record.TrajectoryRecord`) so
    callers can still emit the completed rows.
    """

    def __init__(self, message, step, cause, partial=None):
        super().__init__(message, cause.iterations, cause.residual_norm, cause.x)
        self.step = step
        self.cause = cause
        self.partial = partial
