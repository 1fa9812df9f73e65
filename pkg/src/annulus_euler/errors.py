"""Exception types raised by the solvers.

Each error carries the number a caller needs for a diagnosis (the offending
angle, the flux defect, the last update norm) as an attribute.
"""


class AnnulusEulerError(Exception):
    """Base class for every error raised by this package."""


class GateViolation(AnnulusEulerError):
    """Input data violate a hypothesis the construction depends on."""


class NonPositiveThroughflow(GateViolation):
    def __init__(self, theta, value=None):
        self.theta = float(theta)
        self.value = value
        msg = f"through-flow is not positive at theta={self.theta:.6g}"
        if value is not None:
            msg += f" (value {value:.3e})"
        super().__init__(msg)


class NonMonotoneDiffeo(GateViolation):
    def __init__(self, theta, slope=None):
        self.theta = float(theta)
        self.slope = slope
        super().__init__(f"T' is not positive at theta={self.theta:.6g}")


class FluxMismatch(GateViolation):
    def __init__(self, gap):
        self.gap = float(gap)
        super().__init__(f"inner and outer fluxes differ by {self.gap:.3e}")


class ThroughflowSignChange(GateViolation):
    def __init__(self, r, theta):
        self.r = float(r)
        self.theta = float(theta)
        super().__init__(
            f"radial through-flow changes sign near r={self.r:.6g}, theta={self.theta:.6g}"
        )


class NonPeriodicData(AnnulusEulerError):
    pass


class SingularMode(AnnulusEulerError):
    def __init__(self, mode):
        self.mode = int(mode)
        super().__init__(f"radial system for Fourier mode {self.mode} is singular")


class NoConvergence(AnnulusEulerError):
    def __init__(self, iterations, last_update, report=None):
        self.iterations = int(iterations)
        self.last_update = float(last_update)
        self.report = report
        super().__init__(
            f"no convergence after {self.iterations} iterations "
            f"(last update {self.last_update:.3e})"
        )


class CurlDefect(AnnulusEulerError):
    def __init__(self, norm, tol):
        self.norm = float(norm)
        self.tol = float(tol)
        super().__init__(f"curl of G is {self.norm:.3e} > {self.tol:.3e}")


class SeamMismatch(AnnulusEulerError):
    def __init__(self, gap):
        self.gap = float(gap)
        super().__init__(f"potential does not close around the annulus (gap {self.gap:.3e})")


class Mismatch(AnnulusEulerError):
    """The outer pressure datum is incompatible with the computed trace."""

    def __init__(self, gap):
        self.gap = float(gap)
        super().__init__(f"compatibility gap {self.gap:.3e}")


class ConfigError(AnnulusEulerError):
    pass
