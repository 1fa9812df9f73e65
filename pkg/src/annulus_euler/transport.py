"""Vorticity transport by characteristics and the fixed-point drivers.

The total velocity is the base flow (1/r, 0) plus a perturbation v. Each pass
of a fixed-point driver transports the inner vorticity datum along the
current streamlines, closes the outer through-flow, and recovers the next v
from the div-curl problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bernoulli import BoundaryStream, InverseStream, build_phi0
from .boundary import check_throughflow, flux_closure
from .elliptic import DivCurlProblem, check_flux, solve_div_curl_potential
from .errors import NoConvergence, ThroughflowSignChange
from .fields import (
    TWO_PI,
    BoundaryFunction,
    PolarVectorField,
    ScalarField,
    d_theta,
    ring_flux,
    trig_coefficients,
    trig_interpolate,
)
from .report import SolveReport

KINDS = ("BC4", "BC5", "BC1star", "BC2star", "BC3vt")
PRESSURE_KINDS = ("BC4", "BC5")
UPDATE_KINDS = ("BC5", "BC3vt")
TRANSPORT_MODES = ("stream", "characteristics")


@dataclass(frozen=True)
class TransportProblem:
    vhat: PolarVectorField
    omega0: BoundaryFunction

    def check(self):
        g = self.vhat.grid
        total = 1.0 + g.rr * self.vhat.vr
        bad = np.argwhere(total <= 0.0)
        if bad.size:
            i, j = bad[0]
            raise ThroughflowSignChange(float(g.r[i]), float(g.theta[j]))


@dataclass(frozen=True)
class FixedPointConfig:
    fp_tol: float = 1e-10
    max_iters: int = 100
    ode_steps_per_cell: int = 4
    modes: int | None = None
    smallness_cap: float = 0.25
    transport: str = "stream"

    def __post_init__(self):
        if not (self.fp_tol > 0 and self.max_iters > 0 and self.ode_steps_per_cell > 0):
            raise ValueError("fixed-point settings must be positive")
        if self.transport not in TRANSPORT_MODES:
            raise ValueError(f"transport must be one of {TRANSPORT_MODES}")

    def mode_count(self, grid):
        return grid.ntheta // 3 if self.modes is None else int(self.modes)


class OuterFluxState(NamedTuple):
    f1: BoundaryFunction
    Rave: float


class FixedPointResult(NamedTuple):
    u: PolarVectorField
    omega: ScalarField
    f1: BoundaryFunction
    report: SolveReport


# ---------------------------------------------------------------------------
# characteristics


def _lagrange_weights(x):
    """Cubic Lagrange weights on nodes 0, 1, 2, 3 at offset x."""
    return np.array([
        -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
        x * (x - 2.0) * (x - 3.0) / 2.0,
        -x * (x - 1.0) * (x - 3.0) / 2.0,
        x * (x - 1.0) * (x - 2.0) / 6.0,
    ])


class _SlopeField:
    """dtheta/dr = v_theta / (1 + r v_r), trig in theta and cubic in r."""

    def __init__(self, vhat):
        g = vhat.grid
        self.grid = g
        # columns (v_r, v_theta) per ring
        self.coeffs = np.stack([trig_coefficients(vhat.vr), trig_coefficients(vhat.vtheta)], axis=-1)
        self.zero = not (np.any(vhat.vr) or np.any(vhat.vtheta))

    def stencil(self, cell):
        """First ring of the 4-ring stencil used inside cell [r_{cell}, r_{cell+1}]."""
        return int(np.clip(cell - 1, 0, self.grid.nr - 4))

    def __call__(self, r, theta, start):
        if self.zero:
            return np.zeros_like(theta)
        g = self.grid
        w = _lagrange_weights((r - g.r[start]) / g.dr)
        c = np.tensordot(w, self.coeffs[start : start + 4], axes=1)
        k = c.shape[0]
        phase = np.empty((theta.size, k), dtype=complex)
        phase[:, 0] = 1.0
        phase[:, 1:] = np.exp(1j * theta)[:, None]
        np.cumprod(phase, axis=1, out=phase)
        vr, vt = np.real(phase @ c).T
        denom = 1.0 + r * vr
        bad = np.flatnonzero(denom <= 0.0)
        if bad.size:
            raise ThroughflowSignChange(float(r), float(theta[bad[0]]))
        return vt / denom


def _rk4_cell(slope, theta, r_hi, r_lo, steps, start):
    """Integrate theta(r) from r_hi down to r_lo with fixed RK4 steps."""
    h = (r_lo - r_hi) / steps
    r = r_hi
    for _ in range(steps):
        k1 = slope(r, theta, start)
        k2 = slope(r + 0.5 * h, theta + 0.5 * h * k1, start)
        k3 = slope(r + 0.5 * h, theta + 0.5 * h * k2, start)
        k4 = slope(r + h, theta + h * k3, start)
        theta = theta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        r += h
    return theta


def backtrace_characteristic(vhat, r_target, theta_target, grid=None, cfg=None, _slope=None):
    """Angle at r0 of the streamline through (r_target, theta_target).

    ``theta_target`` may be an array of angles sharing one radius. The result
    is not reduced mod 2pi.
    """
    grid = grid or vhat.grid
    cfg = cfg or FixedPointConfig()
    slope = _slope or _SlopeField(vhat)
    scalar = np.ndim(theta_target) == 0
    theta = np.atleast_1d(np.asarray(theta_target, dtype=float)).copy()
    r_target = float(r_target)
    if not grid.r0 <= r_target <= grid.r1:
        raise ValueError(f"r_target {r_target} outside [{grid.r0}, {grid.r1}]")
    cell = min(int(np.floor((r_target - grid.r0) / grid.dr)), grid.nr - 2)
    r_hi = r_target
    while cell >= 0:
        r_lo = grid.r[cell]
        frac = (r_hi - r_lo) / grid.dr
        if frac > 0.0:
            steps = max(1, int(np.ceil(cfg.ode_steps_per_cell * frac - 1e-12)))
            theta = _rk4_cell(slope, theta, r_hi, r_lo, steps, slope.stencil(cell))
        r_hi = r_lo
        cell -= 1
    return float(theta[0]) if scalar else theta


def solve_transport(p, grid=None, cfg=None):
    """omega(r, theta) = omega0(theta0(r, theta)) on every node.

    Marches outward one cell at a time: the backtrace from ring i stops at
    ring i-1, where the accumulated shift theta0 - theta is known at the nodes
    and trigonometrically interpolated.
    """
    grid = grid or p.vhat.grid
    cfg = cfg or FixedPointConfig()
    p.check()
    th = np.asarray(grid.theta)
    out = np.empty(grid.shape)
    out[0] = p.omega0(th)
    is_const = not (np.any(p.omega0.cos_coeffs) or np.any(p.omega0.sin_coeffs))
    slope = _SlopeField(p.vhat)
    if is_const or slope.zero:
        out[1:] = out[0]
        return ScalarField(grid, out)
    shift = np.zeros(grid.ntheta)
    for i in range(1, grid.nr):
        foot = _rk4_cell(slope, th, grid.r[i], grid.r[i - 1], cfg.ode_steps_per_cell, slope.stencil(i - 1))
        theta0 = foot + trig_interpolate(shift, foot)
        shift = theta0 - th
        out[i] = p.omega0(np.mod(theta0, TWO_PI))
    return ScalarField(grid, out)


def streamline_foot(stream, slope):
    """theta0 at every node from the labels of a discrete stream function.

    ``stream`` holds the periodic part of the total stream function and
    ``slope`` its linear rate in theta. The node (r, theta) lies on the
    streamline leaving r0 at the angle where the inner row takes the same
    value, so theta0 = Z(Phi(r, theta)) with Z the inverse of the inner row.
    """
    stream = np.asarray(stream, dtype=float)
    n = stream.shape[-1]
    row = stream[0]
    q0 = BoundaryFunction.from_samples(d_theta(row) + slope)
    inner = InverseStream(BoundaryStream(q0, offset=row[0]))
    th = TWO_PI * np.arange(n) / n
    return inner(stream + slope * th)


def transport_by_stream(stream, slope, omega0, grid):
    """omega = omega0(theta0) with theta0 from :func:`streamline_foot`."""
    out = np.empty(grid.shape)
    th = np.asarray(grid.theta)
    out[0] = omega0(th)
    out[1:] = omega0(np.mod(streamline_foot(stream, slope)[1:], TWO_PI))
    return ScalarField(grid, out)


# ---------------------------------------------------------------------------
# boundary formulas


def _project(samples, modes):
    return BoundaryFunction.from_samples(samples, modes)


def omega0_pressure_form(f0, p0, vtheta_inner, r0=1.0, modes=None):
    """-(1/r0^2) f0' - p0'/(1+f0) - (v_theta(r0)^2)'/(2(1+f0)), projected to ``modes``."""
    row = np.asarray(vtheta_inner, dtype=float)
    th = TWO_PI * np.arange(row.size) / row.size
    check_throughflow(f0, row.size, offset=1.0)
    one_f = 1.0 + f0(th)
    vals = -f0.derivative()(th) / r0**2 - p0.derivative()(th) / one_f - d_theta(row**2) / (2.0 * one_f)
    return _project(vals, modes)


def omega0_bernoulli_form(f0, b0, samples=256, modes=None):
    """-b0'/(1+f0), projected to ``modes``."""
    th = TWO_PI * np.arange(samples) / samples
    check_throughflow(f0, samples, offset=1.0)
    return _project(-b0.derivative()(th) / (1.0 + f0(th)), modes)


def outer_integrand(omega_outer, vtheta_outer, f1_hat, p1prime, r1):
    """R = -r1^2 omega(r1) - r1^2 p1'/(1+f1) - r1^2 (v_theta(r1)^2)'/(2(1+f1))."""
    w = np.asarray(omega_outer, dtype=float)
    th = TWO_PI * np.arange(w.size) / w.size
    check_throughflow(f1_hat, w.size, offset=1.0)
    one_f = 1.0 + f1_hat(th)
    vt = np.asarray(vtheta_outer, dtype=float)
    return -r1**2 * w - r1**2 * p1prime(th) / one_f - r1**2 * d_theta(vt**2) / (2.0 * one_f)


def f1_update(omega_outer, vtheta_outer, f1_hat, p1prime, J0, r1, modes=None):
    """Next outer through-flow with int f1 = J0; returns an OuterFluxState."""
    R = outer_integrand(omega_outer, vtheta_outer, f1_hat, p1prime, r1)
    f1, rave, _ = flux_closure(R, J0, modes)
    return OuterFluxState(f1, float(rave))


def f1_from_diffeo(T, f0, samples=512, modes=None):
    """f1 = -1 + T' + f0(T) T' so that the outer stream is the inner one composed with T."""
    T.check(samples)
    th = TWO_PI * np.arange(samples) / samples
    dT = T.derivative(th)
    return _project(-1.0 + dT + f0(T(th)) * dT, modes)


# ---------------------------------------------------------------------------
# fixed point


def _base_flow(grid):
    return PolarVectorField(grid, 1.0 / grid.rr, np.zeros(grid.shape))


def j0_from_diffeo(f0, T):
    """Segment circulation implied by phi1 = phi0 o T for the normalized stream."""
    phi0 = build_phi0(f0, normalized=True)
    return -float(phi0(T(0.0)))


def fixed_point(kind, data, grid, cfg=None):
    """Iterate v -> transport -> outer closure -> div-curl for one boundary kind.

    ``data`` is a BoundaryData holding perturbations of the unit through-flow.
    Returns a FixedPointResult (u, omega, f1, report) with u = (1/r, 0) + v.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown fixed-point kind {kind!r}; expected one of {KINDS}")
    cfg = cfg or FixedPointConfig()
    report = SolveReport()
    modes = cfg.mode_count(grid)
    th = np.asarray(grid.theta)
    samples = 4 * grid.ntheta
    f0 = data.f0
    check_throughflow(f0, samples, offset=1.0)
    J0 = f0.integral()
    j0 = data.j0
    size = data.size()
    report.diagnostics["data_size"] = size
    if size > cfg.smallness_cap:
        report.notes.append(f"data size {size:.3g} exceeds the smallness cap {cfg.smallness_cap:.3g}")

    if kind in ("BC4", "BC1star"):
        f1 = data.f1
        check_throughflow(f1, samples, offset=1.0)
        check_flux(f0, f1)
    elif kind == "BC2star":
        f1 = f1_from_diffeo(data.T, f0, samples, modes)
        j0 = j0_from_diffeo(f0, data.T)
        report.diagnostics["j0_from_T"] = j0
    else:
        f1 = BoundaryFunction(J0 / TWO_PI)
    p1prime = data.p1.derivative()

    omega0_fixed = None
    if kind not in PRESSURE_KINDS:
        omega0_fixed = omega0_bernoulli_form(f0, data.b0, grid.ntheta, modes)

    v = PolarVectorField(grid, np.zeros(grid.shape), np.zeros(grid.shape))
    # periodic part and slope of the total stream function of the current iterate
    stream, slope = np.zeros(grid.shape), 1.0
    omega = None
    flux_trace = []
    for _ in range(cfg.max_iters):
        if omega0_fixed is None:
            omega0 = omega0_pressure_form(f0, data.p0, v.vtheta[0], grid.r0, modes)
        else:
            omega0 = omega0_fixed
        if cfg.transport == "stream":
            omega = transport_by_stream(stream, slope, omega0, grid)
        else:
            omega = solve_transport(TransportProblem(v, omega0), grid, cfg)
        f1_change = 0.0
        if kind in UPDATE_KINDS:
            state = f1_update(omega.values[-1], v.vtheta[-1], f1, p1prime, J0, grid.r1, modes)
            f1_change = float(np.max(np.abs(state.f1(th) - f1(th))))
            f1 = state.f1
            report.Rave_final = state.Rave
            flux_trace.append(f1.integral() - J0)
        v_new, phi = solve_div_curl_potential(DivCurlProblem(grid, omega, f0, f1, j0))
        stream, slope = phi.values, 1.0 + J0 / TWO_PI
        report.record((v_new - v).max_abs() + f1_change)
        v = v_new
        if report.update_trace[-1] <= cfg.fp_tol:
            report.converged = True
            break
    else:
        raise NoConvergence(report.iterations, report.update_trace[-1], report)

    u = _base_flow(grid) + v
    flux = ring_flux(u)
    report.flux_defect = float(np.max(np.abs(flux - (TWO_PI + J0))))
    report.diagnostics["J0"] = J0
    report.diagnostics["j0"] = j0
    report.diagnostics["omega0"] = omega0.to_dict()
    if flux_trace:
        report.diagnostics["flux_closure_defects"] = flux_trace
    return FixedPointResult(u, omega, f1, report)
