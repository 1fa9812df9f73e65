"""Steady incompressible Euler flows in an annulus with through-flow data.

Two solution routes share one discretization (finite differences in r,
Fourier collocation in theta): a Grad-Shafranov route for the stream function
and a vorticity-transport route built on characteristics and a div-curl
solver.
"""

from .boundary import BoundaryData, Diffeo, flux_closure
from .config import RunConfig, config_from_dict, load_config
from .elliptic import DivCurlProblem, EllipticProblem, solve_div_curl, solve_elliptic
from .errors import (
    AnnulusEulerError,
    ConfigError,
    CurlDefect,
    FluxMismatch,
    GateViolation,
    Mismatch,
    NoConvergence,
    NonMonotoneDiffeo,
    NonPositiveThroughflow,
    SeamMismatch,
    ThroughflowSignChange,
)
from .fields import AnnulusGrid, BoundaryFunction, PolarVectorField, ScalarField
from .grad_shafranov import GSConfig, solve_bc3_gs, solve_bc12
from .pressure import pressure_from_velocity, trace_and_compat
from .report import SolveReport
from .transport import FixedPointConfig, TransportProblem, fixed_point, solve_transport
from .verify import convergence_study, euler_residual, run

__version__ = "0.1.0"
