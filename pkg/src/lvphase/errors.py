"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid user-facing configuration (bad ensemble kind, grid, filter window, ...)."""


class DegenerateTrialError(RuntimeError):
    """The resolvent guard failed: largest singular value of A/(alpha sqrt n) >= 1 - delta.

    Degenerate trials are counted and excluded by campaign runners, never
    silently dropped.
    """

    def __init__(self, guard_sigma: float, message: str | None = None):
        self.guard_sigma = float(guard_sigma)
        super().__init__(
            message or f"degenerate trial: guard_sigma={guard_sigma:.6g} >= 1 - 1e-6"
        )


class NonConvergenceError(RuntimeError):
    """An iterative method hit its iteration cap; carries the last iterate."""

    def __init__(self, last_estimate: float, iterations: int, message: str | None = None):
        self.last_estimate = float(last_estimate)
        self.iterations = int(iterations)
        super().__init__(
            message
            or f"no convergence after {iterations} iterations (last estimate {last_estimate:.6g})"
        )


class SolveError(RuntimeError):
    """Linear solve failed its residual certificate even after refinement."""


class IntegrationError(RuntimeError):
    """ODE integration failure; carries the time at which it occurred."""

    def __init__(self, time: float, message: str):
        self.time = float(time)
        super().__init__(message)


class DivergenceError(IntegrationError):
    """Trajectory blow-up (a component exceeded the magnitude cap)."""

    def __init__(self, time: float, magnitude: float):
        self.magnitude = float(magnitude)
        super().__init__(time, f"trajectory diverged at t={time:.6g} (|x| reached {magnitude:.3g})")
