"""Residuals, exact oracles, solver dispatch and convergence studies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .bernoulli import BernoulliProfile, build_phi0
from .config import GS_KINDS, RunConfig
from .fields import PolarVectorField, ScalarField, d_r, d_theta, polar_curl, polar_div
from .grad_shafranov import (
    pressure_from_stream,
    solve_bc3_gs,
    solve_bc12,
    velocity_from_stream,
)
from .pressure import (
    gate_metrics,
    lamb_vector,
    pressure_from_velocity,
    pressure_normalize,
    trace_and_compat,
)
from .report import SolveReport
from .transport import fixed_point

VT_KIND = {
    "BC1star": "BC1star",
    "BC2star": "BC2star",
    "BC3": "BC3vt",
    "BC3prime": "BC3vt",
    "BC4": "BC4",
    "BC5": "BC5",
    "BC5prime": "BC5",
}
PRIMED = ("BC3prime", "BC5prime")


# ---------------------------------------------------------------------------
# residuals


def euler_residual(u, p):
    """Polar Euler system in advective form: (res_r, res_theta, res_div).

    res_r = (u.grad)u_r - u_theta^2/r + p_r and
    res_theta = (u.grad)u_theta + u_r u_theta/r + p_theta/r.
    """
    g = u.grid
    r = g.rr
    pv = p.values

    def advect(f):
        return u.vr * d_r(f, g.dr) + u.vtheta * d_theta(f) / r

    res_r = advect(u.vr) - u.vtheta**2 / r + d_r(pv, g.dr)
    res_t = advect(u.vtheta) + u.vr * u.vtheta / r + d_theta(pv) / r
    return ScalarField(g, res_r), ScalarField(g, res_t), polar_div(u)


def rotational_residual(u, p):
    """Rotational form: omega (-u_theta, u_r) + grad(|u|^2/2 + p), plus div u.

    Uses the discrete curl of ``u``. The base flow and the irrotational swirl
    satisfy it exactly at the nodes.
    """
    g = u.grid
    w = polar_curl(u).values
    head = 0.5 * u.speed_squared() + p.values
    res_r = -w * u.vtheta + d_r(head, g.dr)
    res_t = w * u.vr + d_theta(head) / g.rr
    return ScalarField(g, res_r), ScalarField(g, res_t), polar_div(u)


def residual_norm(residuals):
    """Sup norm with momentum rows taken at interior radii and div everywhere."""
    res_r, res_t, res_div = residuals
    inner = max(np.max(np.abs(res_r.values[1:-1])), np.max(np.abs(res_t.values[1:-1])))
    return float(max(inner, res_div.max_abs()))


# ---------------------------------------------------------------------------
# exact solutions


def base_flow(grid):
    """u = (1/r, 0), p = -1/(2 r^2)."""
    u = PolarVectorField(grid, 1.0 / grid.rr, np.zeros(grid.shape))
    return u, ScalarField(grid, -0.5 / grid.rr**2)


def swirl_flow(grid, a, c, p_shift=0.0):
    """u = (a/r, c/r), p = -(a^2 + c^2)/(2 r^2) + p_shift."""
    u = PolarVectorField(grid, a / grid.rr, c / grid.rr)
    return u, ScalarField(grid, -(a * a + c * c) / (2.0 * grid.rr**2) + p_shift)


def _is_constant(f):
    return not (np.any(f.cos_coeffs) or np.any(f.sin_coeffs))


def exact_solution_for(config):
    """Oracle ``grid -> (u, p)`` when the configured data admit one, else None.

    Recognizes BC4 data with constant equal through-flows and constant p0,
    whose solution is the irrotational swirl a/r, c/r.
    """
    d = config.data
    if config.bc_kind != "BC4":
        return None
    if not (_is_constant(d.f0) and _is_constant(d.f1) and _is_constant(d.p0)):
        return None
    if d.f0.mean != d.f1.mean:
        return None
    a = 1.0 + d.f0.mean

    def oracle(grid):
        c = d.j0 / np.log(grid.r1 / grid.r0)
        # p(r0) = -1/(2 r0^2) + p0 fixes the constant
        shift = -0.5 / grid.r0**2 + d.p0.mean + (a * a + c * c) / (2.0 * grid.r0**2)
        return swirl_flow(grid, a, c, shift)

    return oracle


# ---------------------------------------------------------------------------
# solves


@dataclass
class Solution:
    """Fields of one solve together with its report."""

    method: str
    u: PolarVectorField
    p: ScalarField
    report: SolveReport
    extra: dict = field(default_factory=dict)


def _gs_data(config):
    d = config.data
    if config.bc_kind in ("BC1star", "BC2star"):
        return d.shifted_throughflow(1.0)
    return d


def _vt_data(config):
    d = config.data
    if config.bc_kind in ("BC1", "BC2"):
        return d.shifted_throughflow(-1.0)
    return d


def _gs_kind(bc_kind):
    return {"BC1star": "BC1", "BC2star": "BC2"}.get(bc_kind, bc_kind)


def _vt_kind(bc_kind):
    return VT_KIND[{"BC1": "BC1star", "BC2": "BC2star"}.get(bc_kind, bc_kind)]


def solve_gs(config):
    kind = _gs_kind(config.bc_kind)
    d = _gs_data(config)
    grid, cfg = config.grid, config.gs
    if kind in ("BC1", "BC2"):
        if kind == "BC1":
            phi, report = solve_bc12(d.f0, d.b0, grid, cfg, f1=d.f1, j0=d.j0)
        else:
            phi, report = solve_bc12(d.f0, d.b0, grid, cfg, T=d.T)
        phi0 = build_phi0(d.f0, samples=4 * grid.ntheta)
        f1 = d.f1
    else:
        phi, f1, report = solve_bc3_gs(d.f0, d.b0, d.p1.derivative(), d.j0, grid, cfg)
        phi0 = build_phi0(d.f0, normalized=True, samples=4 * grid.ntheta)
    u = velocity_from_stream(phi)
    p = pressure_from_stream(phi, BernoulliProfile(phi0, d.b0), u, report)
    return Solution("grad_shafranov", u, p, report, {"phi": phi, "f1": f1})


def solve_vt(config):
    kind = _vt_kind(config.bc_kind)
    d = _vt_data(config)
    u, omega, f1, report = fixed_point(kind, d, config.grid, config.fp)
    # gates are recorded, not enforced: intermediate diagnostics stay usable
    gates = gate_metrics(lamb_vector(u, omega))
    report.diagnostics["pressure_gates"] = gates
    if gates["curl_defect"] > gates["curl_limit"] or gates["seam_gap"] > gates["seam_limit"]:
        report.notes.append("pressure gate exceeded; see diagnostics.pressure_gates")
    g = pressure_from_velocity(u, omega, check=False)
    if kind in ("BC4", "BC5"):
        p = pressure_normalize(g, "pressure", p0=d.p0, report=report)
    else:
        p = pressure_normalize(g, "bernoulli", b0=d.b0, u=u, report=report)
    return Solution("vortex_transport", u, p, report, {"omega": omega, "f1": f1})


def _finish(sol, config):
    rep = sol.report
    rep.euler_residual_inf = residual_norm(rotational_residual(sol.u, sol.p))
    rep.diagnostics["euler_residual_advective"] = residual_norm(euler_residual(sol.u, sol.p))
    if config.bc_kind in PRIMED:
        d = config.data
        res = trace_and_compat(sol.p, d.p1, d.p1_at_0, config.compat_tol)
        rep.compat_gap = res.gap
        rep.diagnostics["compat_ok"] = res.ok
        rep.diagnostics["compat_profile_gap"] = res.profile_gap
    return sol


def _offset_sup(diff):
    """sup |diff - c| minimized over constants c."""
    return float(0.5 * (np.max(diff) - np.min(diff)))


def run(config: RunConfig):
    """Solve with the configured method(s). Returns a dict method -> Solution.

    With method ``both`` the two solutions are compared and the gaps are
    recorded in each report under ``cross_method_gap_u`` / ``_p``.
    """
    methods = config.methods()
    solvers = {"grad_shafranov": solve_gs, "vortex_transport": solve_vt}
    sols = {m: _finish(solvers[m](config), config) for m in methods}
    if len(sols) == 2:
        a, b = sols["grad_shafranov"], sols["vortex_transport"]
        gu = max(np.max(np.abs(a.u.vr - b.u.vr)), np.max(np.abs(a.u.vtheta - b.u.vtheta)))
        gp = _offset_sup(a.p.values - b.p.values)
        for s in sols.values():
            s.report.diagnostics["cross_method_gap_u"] = float(gu)
            s.report.diagnostics["cross_method_gap_p"] = gp
    return sols


# ---------------------------------------------------------------------------
# convergence studies


def _restrict(values, fine, coarse):
    si = (fine.nr - 1) // (coarse.nr - 1)
    sj = fine.ntheta // coarse.ntheta
    return values[::si, ::sj]


def _orders(drs, errs):
    """Least-squares slope of log(err) vs log(dr); None when errors are at round-off."""
    errs = np.asarray(errs, dtype=float)
    if np.any(errs < 1e-12):
        return None
    return float(np.polyfit(np.log(drs), np.log(errs), 1)[0])


def convergence_study(config, levels, oracle=None, method=None):
    """Error table over nested grids.

    ``levels`` lists radial cell counts (each grid has 2 * cells angular
    nodes). Errors are measured against ``oracle`` (default: the config's
    exact solution when one exists), otherwise against a reference solve one
    level finer than the last. Returns ``{"rows": [...], "order": {...}}``.
    """
    levels = sorted(int(n) for n in levels)
    if len(levels) < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    for a, b in zip(levels, levels[1:]):
        if b % a:
            raise ValueError("levels must be nested (each divides the next)")
    method = method or config.methods()[0]
    solver = {"grad_shafranov": solve_gs, "vortex_transport": solve_vt}[method]
    oracle = oracle or exact_solution_for(config)
    grids = [config.with_grid(n + 1, 2 * n).grid for n in levels]

    def one(grid):
        return _finish(solver(config.with_grid(grid.nr, grid.ntheta)), config)

    ref = None
    if oracle is None:
        n = 2 * levels[-1]
        ref = one(config.with_grid(n + 1, 2 * n).grid)
    sols = ordered_map(one, grids, width=1)
    rows = []
    for grid, sol in zip(grids, sols):
        if oracle is not None:
            u_ex, p_ex = oracle(grid)
            ur, ut, pv = u_ex.vr, u_ex.vtheta, p_ex.values
        else:
            ur = _restrict(ref.u.vr, ref.u.grid, grid)
            ut = _restrict(ref.u.vtheta, ref.u.grid, grid)
            pv = _restrict(ref.p.values, ref.u.grid, grid)
        u_err = float(max(np.max(np.abs(sol.u.vr - ur)), np.max(np.abs(sol.u.vtheta - ut))))
        p_err = _offset_sup(sol.p.values - pv)
        rows.append({
            "nr": grid.nr,
            "ntheta": grid.ntheta,
            "dr": grid.dr,
            "u_error": u_err,
            "p_error": p_err,
            "euler_residual": sol.report.diagnostics["euler_residual_advective"],
            "iterations": sol.report.iterations,
        })
    drs = [r["dr"] for r in rows]
    order = {k: _orders(drs, [r[k] for r in rows]) for k in ("u_error", "p_error", "euler_residual")}
    return {"method": method, "reference": "oracle" if oracle else "fine grid", "rows": rows, "order": order}

