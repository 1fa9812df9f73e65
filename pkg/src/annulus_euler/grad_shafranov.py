"""Stream-function route: Picard iteration for div(K grad phi) = z1 B'(phi).

With u_r = (1/r) d_theta phi and u_theta = -d_r phi the vorticity is
omega = -(1/z1) div(K grad phi), and steady Euler gives omega = -B'(phi).

BC1 and BC2 fix both Dirichlet rows up front. BC3 rebuilds the outer row each
pass from the tangential momentum balance at r1 (the outer through-flow f1 is
an unknown of the iteration).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bernoulli import BernoulliProfile, build_phi0, build_phi1
from .boundary import check_throughflow, flux_closure
from .elliptic import WEIGHTED_K, EllipticProblem, solve_elliptic
from .errors import NoConvergence
from .fields import (
    TWO_PI,
    BoundaryFunction,
    PolarVectorField,
    ScalarField,
    d_r,
    d_theta,
    radial_quadrature,
    theta_quadrature,
)
from .report import SolveReport


@dataclass(frozen=True)
class GSConfig:
    picard_tol: float = 1e-10
    max_iters: int = 200
    relaxation: float = 1.0
    smallness_cap: float = 0.25
    modes: int | None = None

    def __post_init__(self):
        if not self.picard_tol > 0.0:
            raise ValueError("picard_tol must be positive")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError("relaxation must lie in (0, 1]")


class StreamFunction(ScalarField):
    """Nodal values of phi together with the slope of its linear part in theta."""

    __slots__ = ("slope",)

    def __init__(self, grid, values, slope=0.0):
        super().__init__(grid, values)
        self.slope = float(slope)

    def periodic_values(self):
        return self.values - self.slope * self.grid.tt


def velocity_from_stream(phi, slope=None):
    """u_r = (1/r) d_theta phi, u_theta = -d_r phi."""
    g = phi.grid
    if slope is None:
        slope = getattr(phi, "slope", 0.0)
    periodic = phi.values - slope * g.tt
    return PolarVectorField(g, (d_theta(periodic) + slope) / g.rr, -d_r(phi.values, g.dr))


def pressure_from_stream(phi, profile, u, report=None):
    """p = B(phi) - |u|^2 / 2."""
    p = profile.B(phi.values) - 0.5 * u.speed_squared()
    if report is not None:
        inner = 0.5 * u.speed_squared()[0] + p[0] - profile.b0(phi.grid.theta)
        report.bc_residuals["bernoulli_inner"] = float(np.max(np.abs(inner)))
    return ScalarField(phi.grid, p)


def energy(phi, profile):
    """Discrete I[psi] = int 1/2 (K grad psi).grad psi + z1 B(phi) dz1 dz2.

    Its Euler-Lagrange equation is the stream-function equation above.
    """
    g = phi.grid
    psi = phi.values - phi.slope * g.tt
    pr = d_r(psi, g.dr)
    pt = d_theta(psi)
    dens = 0.5 * (g.rr * pr**2 + pt**2 / g.rr) + g.rr * profile.B(phi.values)
    return float(radial_quadrature(theta_quadrature(dens), g.dr))


def _smallness(report, size, cap):
    if size > cap:
        msg = f"data size {size:.3g} exceeds the smallness cap {cap:.3g}; uniqueness is not guaranteed"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        report.notes.append(msg)


class _Picard:
    """Shared frozen-source loop; ``step`` returns the next (phi, extra) pair."""

    def __init__(self, grid, cfg, report):
        self.grid = grid
        self.cfg = cfg
        self.report = report

    def run(self, phi, step, extra_norm=None):
        cfg, report = self.cfg, self.report
        relax = cfg.relaxation
        rising = 0
        for _ in range(cfg.max_iters):
            phi_new, extra = step(phi)
            upd = float(np.max(np.abs(phi_new.values - phi.values)))
            if extra_norm is not None:
                upd += extra_norm(extra)
            if relax < 1.0:
                phi_new = StreamFunction(
                    self.grid, phi.values + relax * (phi_new.values - phi.values), phi.slope
                )
                extra = self.relax_extra(extra, relax)
            report.record(relax * upd)
            phi = phi_new
            self.accept(extra)
            yield phi
            if report.update_trace[-1] <= cfg.picard_tol:
                report.converged = True
                return
            t = report.update_trace
            rising = rising + 1 if len(t) > 1 and t[-1] > t[-2] else 0
            if rising >= 3 and relax == 1.0:
                relax = 0.5
                report.notes.append(f"relaxation reduced to 0.5 at iteration {len(t)}")
                rising = 0
        raise NoConvergence(report.iterations, report.update_trace[-1], report)

    def relax_extra(self, extra, relax):
        return extra

    def accept(self, extra):
        pass


def _linear_solve(grid, source, inner, outer, slope):
    """Solve div(K grad phi) = source with periodic Dirichlet rows."""
    psi = solve_elliptic(EllipticProblem(grid, ScalarField(grid, -source), inner, outer, WEIGHTED_K))
    return StreamFunction(grid, psi.values + slope * grid.tt, slope)


def solve_bc12(f0, b0, grid, cfg=None, *, f1=None, j0=0.0, T=None):
    """BC1 (outer through-flow f1 and circulation j0) or BC2 (outer Bernoulli via T).

    Returns ``(phi, report)``.
    """
    cfg = cfg or GSConfig()
    report = SolveReport(energy_trace=[])
    samples = 4 * grid.ntheta
    phi0 = build_phi0(f0, samples=samples)
    phi1 = build_phi1(f0, f1=f1, j0=j0, T=T, samples=samples)
    profile = BernoulliProfile(phi0, b0)
    slope = phi0.slope
    th = grid.theta
    inner, outer = phi0.periodic_part(th), phi1.periodic_part(th)

    def step(phi):
        _, bp = profile.evaluate(phi.values)
        return _linear_solve(grid, grid.rr * bp, inner, outer, slope), None

    phi = _linear_solve(grid, np.zeros(grid.shape), inner, outer, slope)
    for phi in _Picard(grid, cfg, report).run(phi, step):
        report.energy_trace.append(energy(phi, profile))
    report.diagnostics["J0"] = phi0.J
    report.diagnostics["energy_monotone"] = bool(
        np.all(np.diff(report.energy_trace) <= 1e-12 * (1.0 + np.abs(report.energy_trace[:-1])))
    )
    return phi, report


class _BC3Picard(_Picard):
    def __init__(self, grid, cfg, report, f1):
        super().__init__(grid, cfg, report)
        self.f1 = f1

    def relax_extra(self, extra, relax):
        f1, rave, f10 = extra
        return self.f1 + relax * (f1 - self.f1), rave, f10

    def accept(self, extra):
        self.f1, rave, f10 = extra
        self.report.Rave_final = float(rave)
        self.report.diagnostics.setdefault("flux_trace", []).append(
            float(self.f1.integral())
        )


def solve_bc3_gs(f0, b0, p1prime, j0, grid, cfg=None):
    """BC3 by the stream function: inner (1+f0, b0), outer d_theta p = p1', circulation j0.

    Returns ``(phi, f1, report)``; f1 is the outer through-flow perturbation.
    """
    cfg = cfg or GSConfig()
    report = SolveReport()
    samples = 4 * grid.ntheta
    phi0 = build_phi0(f0, normalized=True, samples=samples)
    profile = BernoulliProfile(phi0, b0)
    _smallness(report, f0.norm_c1() + b0.norm_c1() + p1prime.sup() + abs(j0), cfg.smallness_cap)

    J0 = f0.integral()
    slope = (TWO_PI + J0) / TWO_PI
    th = grid.theta
    r1 = grid.r1
    inner = phi0.periodic_part(th)
    dp1 = p1prime(th)

    def outer_row(f1):
        a = f1.antiderivative()
        return -j0 + a(th) - a(0.0)

    picard = _BC3Picard(grid, cfg, report, BoundaryFunction(J0 / TWO_PI))

    def step(phi):
        f1_hat = picard.f1
        check_throughflow(f1_hat, samples, offset=1.0)
        one_f = 1.0 + f1_hat(th)
        _, bp = profile.evaluate(phi.values)
        ut_r1 = d_r(phi.values, grid.dr)[-1]
        F1 = r1**2 * bp[-1] - r1**2 / (2.0 * one_f) * d_theta(ut_r1**2) - r1**2 / one_f * dp1
        f1, fave, f10 = flux_closure(F1, J0, cfg.modes)
        phi_new = _linear_solve(grid, grid.rr * bp, inner, outer_row(f1), slope)
        return phi_new, (f1, fave, f10)

    def f1_change(extra):
        return float(np.max(np.abs(extra[0](th) - picard.f1(th))))

    phi = _linear_solve(grid, np.zeros(grid.shape), inner, outer_row(picard.f1), slope)
    for phi in picard.run(phi, step, f1_change):
        pass
    report.flux_defect = float(abs(picard.f1.integral() - J0))
    report.diagnostics["J0"] = J0
    return phi, picard.f1, report
