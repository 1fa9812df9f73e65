"""Linear boundary-value solvers: the weighted elliptic operator and div-curl.

Both reduce, after an FFT in theta, to one tridiagonal radial system per
Fourier mode with Dirichlet rows at r0 and r1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from ._parallel import ordered_map
from .errors import FluxMismatch, SingularMode
from .fields import (
    TWO_PI,
    BoundaryFunction,
    PolarVectorField,
    ScalarField,
    check_periodic_row,
    d_r,
    d_theta,
    face_coefficients,
)

WEIGHTED_K = "weighted_K"
LAPLACE_C = "laplace_c"


@dataclass(frozen=True)
class EllipticProblem:
    """Dirichlet-in-r, periodic-in-theta problem.

    ``weighted_K``: -div_z(K(z1) grad_z phi) = rhs with K = diag(z1, 1/z1).
    ``laplace_c``:  Delta_c phi = rhs.
    """

    grid: object
    rhs: ScalarField
    dirichlet_inner: np.ndarray
    dirichlet_outer: np.ndarray
    operator_kind: str = WEIGHTED_K


@dataclass(frozen=True)
class DivCurlProblem:
    grid: object
    omega: ScalarField
    f0: BoundaryFunction
    f1: BoundaryFunction
    j0: float = 0.0

    @property
    def J0(self):
        return self.f0.integral()


def _laplacian_target(p):
    """Right-hand side rewritten as r * Delta_c phi at every node."""
    g = p.grid
    rhs = p.rhs.values if isinstance(p.rhs, ScalarField) else np.asarray(p.rhs, float)
    if p.operator_kind == WEIGHTED_K:
        return -rhs
    if p.operator_kind == LAPLACE_C:
        return g.rr * rhs
    raise ValueError(f"unknown operator_kind {p.operator_kind!r}")


def _modal_solve(grid, rho, k, b, lo, hi):
    """Solve one radial system; b holds (real, imag) columns of the interior rhs."""
    r = grid.r[1:-1]
    n = r.size
    diag = -(rho[:-1] + rho[1:] + (k * k) * grid.dr**2 / r)
    ab = np.zeros((3, n))
    ab[0, 1:] = rho[1:-1]
    ab[1] = diag
    ab[2, :-1] = rho[1:-1]
    b = b.copy()
    b[0] -= rho[0] * lo
    b[-1] -= rho[-1] * hi
    try:
        x = solve_banded((1, 1), ab, b, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SingularMode(k) from exc
    if not np.all(np.isfinite(x)):
        raise SingularMode(k)
    return x


def solve_elliptic(p: EllipticProblem) -> ScalarField:
    g = p.grid
    inner = check_periodic_row(p.dirichlet_inner, g.ntheta, "inner Dirichlet data")
    outer = check_periodic_row(p.dirichlet_outer, g.ntheta, "outer Dirichlet data")
    target = _laplacian_target(p)
    n = g.ntheta
    rhs_hat = np.fft.rfft(target[1:-1], axis=-1) * g.dr**2
    lo_hat = np.fft.rfft(inner)
    hi_hat = np.fft.rfft(outer)
    rho = face_coefficients(g)

    def one(k):
        b = np.column_stack([rhs_hat[:, k].real, rhs_hat[:, k].imag])
        lo = np.array([lo_hat[k].real, lo_hat[k].imag])
        hi = np.array([hi_hat[k].real, hi_hat[k].imag])
        x = _modal_solve(g, rho, k, b, lo, hi)
        return x[:, 0] + 1j * x[:, 1]

    cols = ordered_map(one, g.wavenumbers)
    phi_hat = np.empty((g.nr, n // 2 + 1), dtype=complex)
    phi_hat[0] = lo_hat
    phi_hat[-1] = hi_hat
    phi_hat[1:-1] = np.column_stack(cols)
    phi = np.fft.irfft(phi_hat, n=n, axis=-1)
    phi[0] = inner
    phi[-1] = outer
    return ScalarField(g, phi)


def apply_operator(phi, operator_kind=WEIGHTED_K):
    """Discrete operator of :func:`solve_elliptic` at interior rows.

    Returns an (nr-2, ntheta) array that equals ``rhs[1:-1]`` for a solution.
    """
    g = phi.grid
    v = phi.values
    rho = face_coefficients(g)
    r = g.r[1:-1, None]
    flux = rho[:, None] * (v[1:] - v[:-1]) / g.dr
    radial = (flux[1:] - flux[:-1]) / g.dr
    k2 = g.wavenumbers.astype(float) ** 2
    angular = np.fft.irfft(-k2 * np.fft.rfft(v[1:-1], axis=-1), n=g.ntheta, axis=-1) / r
    r_lap = radial + angular  # r * Delta_c phi
    if operator_kind == WEIGHTED_K:
        return -r_lap
    return r_lap / r


# ---------------------------------------------------------------------------
# div-curl


def flux_tolerance(J0):
    return 1e-10 * (1.0 + abs(J0))


def check_flux(f0, f1):
    J0, J1 = f0.integral(), f1.integral()
    if abs(J0 - J1) > flux_tolerance(J0):
        raise FluxMismatch(J0 - J1)
    return J0


def div_curl_boundary_rows(p: DivCurlProblem):
    """Periodic Dirichlet rows for the auxiliary potential."""
    th = p.grid.theta
    a0 = p.f0.antiderivative()
    a1 = p.f1.antiderivative()
    phi0 = a0(th) - a0(0.0)
    phi1 = -p.j0 + a1(th) - a1(0.0)
    return phi0, phi1


def velocity_from_potential(phi, J0):
    """w_r = (d_theta phi + J0/2pi)/r, w_theta = -d_r phi."""
    g = phi.grid
    return PolarVectorField(
        g, (d_theta(phi.values) + J0 / TWO_PI) / g.rr, -d_r(phi.values, g.dr)
    )


def solve_div_curl_potential(p: DivCurlProblem):
    """Return ``(w, phi)``, the field and the periodic potential it came from."""
    J0 = check_flux(p.f0, p.f1)
    phi0, phi1 = div_curl_boundary_rows(p)
    omega = p.omega.values if isinstance(p.omega, ScalarField) else p.omega
    phi = solve_elliptic(
        EllipticProblem(p.grid, ScalarField(p.grid, -omega), phi0, phi1, LAPLACE_C)
    )
    return velocity_from_potential(phi, J0), phi


def solve_div_curl(p: DivCurlProblem) -> PolarVectorField:
    return solve_div_curl_potential(p)[0]


def segment_circulation(v, theta_index=0):
    """Trapezoid value of int_{r0}^{r1} v_theta(r, theta_j) dr."""
    col = v.vtheta[:, theta_index]
    return float(v.grid.dr * (np.sum(col) - 0.5 * (col[0] + col[-1])))
