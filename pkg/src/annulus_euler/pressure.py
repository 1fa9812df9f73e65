"""Pressure from a velocity field by line integration of the acceleration.

At a steady solution G = (u.grad)u equals -grad p, so p is recovered up to a
constant as g(z) = -int G.dl from (r0, 0). Writing G = grad(|u|^2/2) + L with
the Lamb vector L = omega (-u_theta, u_r) lets the gradient part be
integrated in closed form; only L goes through the quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import CurlDefect, Mismatch, SeamMismatch
from .fields import (
    TWO_PI,
    PolarVectorField,
    ScalarField,
    d_r,
    d_theta,
    polar_curl,
    theta_antiderivative,
)

RADIAL_THEN_ARC = "radial_then_arc"
ARC_THEN_RADIAL = "arc_then_radial"
DEFAULT_COMPAT_TOL = 1e-6


@dataclass(frozen=True)
class PressurePath:
    """Integration path from the base point (r0, 0) to each node."""

    kind: str = RADIAL_THEN_ARC

    def __post_init__(self):
        if self.kind not in (RADIAL_THEN_ARC, ARC_THEN_RADIAL):
            raise ValueError(f"unknown path kind {self.kind!r}")


def compute_G(u):
    """G_r = (u.grad)u_r - u_theta^2/r, G_theta = (u.grad)u_theta + u_r u_theta/r."""
    g = u.grid
    r = g.rr

    def advect(f):
        return u.vr * d_r(f, g.dr) + u.vtheta * d_theta(f) / r

    return PolarVectorField(
        g,
        advect(u.vr) - u.vtheta**2 / r,
        advect(u.vtheta) + u.vr * u.vtheta / r,
    )


def lamb_vector(u, omega=None):
    """omega * (-u_theta, u_r); omega defaults to the discrete curl of u."""
    w = polar_curl(u).values if omega is None else np.asarray(getattr(omega, "values", omega))
    return PolarVectorField(u.grid, -w * u.vtheta, w * u.vr)


def kinetic_energy(u):
    return ScalarField(u.grid, 0.5 * u.speed_squared())


def _radial_leg(Gr, dr):
    return -cumulative_trapezoid(Gr, dx=dr, axis=0, initial=0.0)


def _arc_leg(Gt, r):
    # -int_0^theta G_theta r ds, spectral, linear part included
    return -theta_antiderivative(r * Gt)


def gate_metrics(G, curl_tol=10.0, seam_tol=1e-8):
    """Curl defect and seam gap of G with the limits :func:`integrate_g` applies."""
    grid = G.grid
    scale = 1.0 + G.max_abs()
    return {
        "curl_defect": polar_curl(G).max_abs(),
        "curl_limit": curl_tol * grid.dr**2 * scale,
        "seam_gap": float(np.max(np.abs(TWO_PI * np.mean(grid.rr * G.vtheta, axis=-1)))),
        "seam_limit": seam_tol * scale,
    }


def integrate_g(G, path=None, *, potential=None, curl_tol=10.0, seam_tol=1e-8, check=True):
    """g = -int G.dl from (r0, 0), with g(r0, 0) = 0.

    When ``potential`` (a ScalarField K) is given, the integrated field is
    grad K + G, and K enters in closed form. ``curl_tol`` scales the curl gate
    as curl_tol * dr^2 * (1 + |G|); ``seam_tol`` bounds the mismatch between
    theta = 2pi and theta = 0 relative to 1 + |G|.
    """
    path = path or PressurePath()
    grid = G.grid
    if check:
        m = gate_metrics(G, curl_tol, seam_tol)
        if m["curl_defect"] > m["curl_limit"]:
            raise CurlDefect(m["curl_defect"], m["curl_limit"])
        if m["seam_gap"] > m["seam_limit"]:
            raise SeamMismatch(m["seam_gap"])
    r = grid.rr
    if path.kind == RADIAL_THEN_ARC:
        radial = _radial_leg(G.vr[:, :1], grid.dr)
        arc = _arc_leg(G.vtheta, r)
        g = radial + arc
    else:
        arc = _arc_leg(G.vtheta[:1], r[:1])
        # radial leg at each angle starts from the arc value on r0
        g = arc + _radial_leg(G.vr, grid.dr)
    if potential is not None:
        k = potential.values if isinstance(potential, ScalarField) else np.asarray(potential)
        g = g - (k - k[0, 0])
    return ScalarField(grid, g)


def pressure_from_velocity(u, omega=None, path=None, **gate):
    """g for a velocity field through the Lamb split."""
    return integrate_g(lamb_vector(u, omega), path, potential=kinetic_energy(u), **gate)


def pressure_normalize(g, kind, *, p0=None, b0=None, u=None, report=None):
    """Fix the constant in p = g + const from the inner-circle datum at theta = 0.

    ``kind`` is "pressure" (p(r0, .) = -1/(2 r0^2) + p0) or "bernoulli"
    (|u|^2/2 + p = b0 on r0).
    """
    grid = g.grid
    th = np.asarray(grid.theta)
    r0 = grid.r0
    if kind == "pressure":
        p = g.values - 0.5 / r0**2 + float(p0(0.0))
        inner = p[0] - (-0.5 / r0**2 + p0(th))
    elif kind == "bernoulli":
        k = 0.5 * u.speed_squared()
        p = g.values - k[0, 0] + float(b0(0.0))
        inner = k[0] + p[0] - b0(th)
    else:
        raise ValueError(f"unknown normalization kind {kind!r}")
    if report is not None:
        report.bc_residuals[f"inner_{kind}"] = float(np.max(np.abs(inner)))
    return ScalarField(grid, p)


@dataclass(frozen=True)
class CompatResult:
    ok: bool
    gap: float
    trace: float
    profile_gap: float
    tol: float

    @property
    def profile_ok(self):
        return self.profile_gap <= self.tol

    def require(self):
        if not self.ok:
            raise Mismatch(self.gap)
        return self


def trace_and_compat(p, p1, p1_at_0=None, compat_tol=DEFAULT_COMPAT_TOL):
    """Compare the outer pressure trace with the Dirichlet datum p1.

    gap = p1(0) - (p(r1, 0) + 1/(2 r1^2)); accepts iff |gap| <= compat_tol.
    The sup distance of the whole outer row from -1/(2 r1^2) + p1 is reported
    as ``profile_gap`` (``profile_ok`` compares it with the same tolerance).
    """
    grid = p.grid
    r1 = grid.r1
    th = np.asarray(grid.theta)
    p1_0 = float(p1(0.0)) if p1_at_0 is None else float(p1_at_0)
    shift = p1_0 - float(p1(0.0))
    trace = float(p.values[-1, 0])
    gap = p1_0 - (trace + 0.5 / r1**2)
    profile = float(np.max(np.abs(p.values[-1] - (-0.5 / r1**2 + p1(th) + shift))))
    return CompatResult(abs(gap) <= compat_tol, gap, trace, profile, compat_tol)
