import warnings

import numpy as np
import pytest

from annulus_euler.bernoulli import build_profile
from annulus_euler.boundary import Diffeo
from annulus_euler.elliptic import segment_circulation
from annulus_euler.errors import AnnulusEulerError, FluxMismatch, NoConvergence, NonPositiveThroughflow
from annulus_euler.fields import TWO_PI, AnnulusGrid, BoundaryFunction, polar_div
from annulus_euler.grad_shafranov import (
    GSConfig,
    StreamFunction,
    energy,
    pressure_from_stream,
    solve_bc12,
    solve_bc3_gs,
    velocity_from_stream,
)
from annulus_euler.verify import residual_norm, rotational_residual

from conftest import unit_data

ONE = BoundaryFunction(1.0)
ZERO = BoundaryFunction(0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        GSConfig(picard_tol=0.0)
    with pytest.raises(ValueError):
        GSConfig(relaxation=1.5)
    with pytest.raises(ValueError):
        GSConfig(relaxation=0.0)


def test_constant_data_gives_base_stream(grid):
    phi, rep = solve_bc12(ONE, BoundaryFunction(0.3), grid, f1=ONE)
    np.testing.assert_allclose(phi.values, grid.tt, atol=1e-13)
    u = velocity_from_stream(phi)
    np.testing.assert_allclose(u.vr, 1.0 / grid.rr, atol=1e-13)
    assert np.max(np.abs(u.vtheta)) <= 1e-13
    assert rep.converged and rep.iterations == 1


def test_identity_diffeo_matches_bc1(grid):
    f0 = BoundaryFunction(1.0, [0.05], [0.02])
    b0 = BoundaryFunction(0.0, [0.01], [0.03])
    phi2, _ = solve_bc12(f0, b0, grid, T=Diffeo())
    u2 = velocity_from_stream(phi2)
    j0 = segment_circulation(u2)
    phi1, _ = solve_bc12(f0, b0, grid, f1=f0, j0=j0)
    # the realized circulation matches phi0(0) - phi1(0) = 0 up to quadrature error
    assert abs(j0) <= 10 * grid.dr**2
    phi1_exact, _ = solve_bc12(f0, b0, grid, f1=f0, j0=0.0)
    assert np.max(np.abs(phi1_exact.values - phi2.values)) <= 1e-13
    assert np.max(np.abs(phi1.values - phi2.values)) <= abs(j0) + 1e-13


def test_self_convergence():
    b0 = BoundaryFunction(0.0, [], [0.05])
    sols = {}
    for n in (65, 129, 257):
        sols[n], rep = solve_bc12(ONE, b0, AnnulusGrid(1.0, 2.0, n, 2 * (n - 1)), f1=ONE)
        assert rep.converged
    ref = sols[257].values
    e64 = np.max(np.abs(sols[65].values - ref[::4, ::4]))
    e128 = np.max(np.abs(sols[129].values - ref[::2, ::2]))
    dr = 1.0 / 64
    assert e64 <= 1.0 * dr**2
    # the reference error inflates the fine-level gap, so this bounds the order from below
    assert np.log2(e64 / e128) >= 1.9


def test_solution_solves_discrete_equation(grid):
    f0 = BoundaryFunction(1.0, [0.05])
    b0 = BoundaryFunction(0.0, [0.02], [0.04])
    phi, rep = solve_bc12(f0, b0, grid, f1=BoundaryFunction(1.0, [], [0.03]), j0=0.02)
    assert rep.converged and rep.update_trace[-1] <= 1e-10
    np.testing.assert_allclose(phi.values[0], f0.antiderivative()(grid.theta) - f0.antiderivative()(0.0) + grid.theta, atol=1e-13)
    assert phi.values[-1, 0] == pytest.approx(-0.02, abs=1e-13)
    # the shifted stream function is periodic: compare the seam with a spectral extension
    assert np.allclose(phi.periodic_values(), phi.values - grid.tt)


def test_energy_trace(grid, grid64):
    b0 = BoundaryFunction(0.0, [], [0.05])
    _, rep = solve_bc12(ONE, b0, grid64, f1=ONE)
    assert len(rep.energy_trace) == rep.iterations
    assert rep.diagnostics["energy_monotone"]
    _, coarse = solve_bc12(ONE, b0, grid, f1=ONE)
    assert coarse.energy_trace[-1] <= coarse.energy_trace[0]


def test_energy_is_stationary_at_solution(grid):
    b0 = BoundaryFunction(0.0, [], [0.05])
    phi, _ = solve_bc12(ONE, b0, grid, f1=ONE)
    prof = build_profile(ONE, b0)
    bump = np.sin(np.pi * (grid.rr - 1.0)) * np.cos(grid.tt)
    e = [energy(StreamFunction(grid, phi.values + s * bump, 1.0), prof) for s in (-1e-3, 0.0, 1e-3)]
    # first variation vanishes up to discretization error
    assert abs(e[2] - e[0]) / 2e-3 <= 1e-3 * abs(e[2] + e[0] - 2 * e[1]) / 1e-6


def test_flux_gate_propagates(grid):
    with pytest.raises(FluxMismatch):
        solve_bc12(ONE, ZERO, grid, f1=BoundaryFunction(1.2))
    with pytest.raises(NonPositiveThroughflow):
        solve_bc12(BoundaryFunction(0.1, [0.5]), ZERO, grid, f1=BoundaryFunction(0.1, [0.5]))


def test_no_convergence_is_reported(grid):
    cfg = GSConfig(max_iters=2)
    with pytest.raises(NoConvergence) as exc:
        solve_bc12(ONE, BoundaryFunction(0.0, [], [0.2]), grid, cfg, f1=ONE)
    assert exc.value.iterations == 2 and exc.value.report is not None


def test_velocity_examples():
    errs_log, errs_pert = [], []
    eps = 0.2
    for n in (33, 65, 129):
        g = AnnulusGrid(1.0, 2.0, n, 32)
        u = velocity_from_stream(StreamFunction(g, np.log(g.rr)))
        errs_log.append(max(np.max(np.abs(u.vr)), np.max(np.abs(u.vtheta + 1.0 / g.rr))))
        u = velocity_from_stream(StreamFunction(g, g.tt + eps * g.rr * np.sin(g.tt), 1.0))
        err = max(
            np.max(np.abs(u.vr - (1.0 + eps * g.rr * np.cos(g.tt)) / g.rr)),
            np.max(np.abs(u.vtheta + eps * np.sin(g.tt))),
        )
        errs_pert.append(err)
        assert polar_div(u).max_abs() <= 1e-10
    # the linear-in-r perturbation is differenced exactly
    assert max(errs_pert) <= 1e-12
    assert np.log2(errs_log[0] / errs_log[1]) >= 1.9 and np.log2(errs_log[1] / errs_log[2]) >= 1.9


def test_base_pressure(grid):
    phi = StreamFunction(grid, grid.tt.copy(), 1.0)
    u = velocity_from_stream(phi)
    prof = build_profile(ONE, BoundaryFunction(0.7))
    p = pressure_from_stream(phi, prof, u)
    np.testing.assert_allclose(p.values, 0.7 - 0.5 / grid.rr**2, atol=1e-13)


def test_pressure_bernoulli_rows(grid64):
    f0 = BoundaryFunction(1.0, [0.05])
    b0 = BoundaryFunction(0.0, [0.02], [0.04])
    T = Diffeo(BoundaryFunction(0.0, [0.03], [0.05]))
    phi, rep = solve_bc12(f0, b0, grid64, T=T)
    u = velocity_from_stream(phi)
    p = pressure_from_stream(phi, build_profile(f0, b0), u, rep)
    assert rep.bc_residuals["bernoulli_inner"] <= 1e-10
    th = grid64.theta
    outer = 0.5 * u.speed_squared()[-1] + p.values[-1] - b0(T(th))
    assert np.max(np.abs(outer)) <= 1e-10
    # boundary through-flow rows
    np.testing.assert_allclose(grid64.r0 * u.vr[0], f0(th), atol=1e-12)


def test_bc12_euler_residual_is_second_order():
    f0 = BoundaryFunction(1.0, [0.05])
    b0 = BoundaryFunction(0.0, [0.02], [0.04])
    res = []
    for n in (65, 129, 257):
        g = AnnulusGrid(1.0, 2.0, n, 64)
        phi, _ = solve_bc12(f0, b0, g, f1=BoundaryFunction(1.0, [], [0.03]))
        u = velocity_from_stream(phi)
        p = pressure_from_stream(phi, build_profile(f0, b0), u)
        res.append(residual_norm(rotational_residual(u, p)))
    assert np.log2(res[0] / res[1]) >= 1.8 and np.log2(res[1] / res[2]) >= 1.8
    assert res[-1] <= 1.0 * (1.0 / 256) ** 2


def test_bc3_zero_data(grid):
    phi, f1, rep = solve_bc3_gs(ZERO, ZERO, ZERO, 0.0, grid)
    np.testing.assert_allclose(phi.values, grid.tt, atol=1e-13)
    assert f1.sup() <= 1e-14
    u = velocity_from_stream(phi)
    np.testing.assert_allclose(u.vr, 1.0 / grid.rr, atol=1e-13)
    assert rep.converged


def test_bc3_constant_bernoulli_gives_zero_outer_flux(grid):
    _, f1, rep = solve_bc3_gs(ZERO, BoundaryFunction(0.1), ZERO, 0.0, grid)
    assert f1.sup() <= 1e-14
    assert abs(rep.Rave_final) <= 1e-15


def test_bc3_example(grid64):
    b0 = BoundaryFunction(0.0, [], [0.02])
    p1prime = BoundaryFunction(0.0, [0.02])
    phi, f1, rep = solve_bc3_gs(ZERO, b0, p1prime, 0.01, grid64)
    assert rep.converged
    assert max(rep.contraction_ratios()[1:]) <= 0.5
    assert abs(f1.integral()) <= 1e-10
    for flux in rep.diagnostics["flux_trace"]:
        assert abs(flux) <= 1e-10
    # the outer row carries the reconstructed through-flow
    u = velocity_from_stream(phi)
    np.testing.assert_allclose(grid64.r1 * u.vr[-1], 1.0 + f1(grid64.theta), atol=1e-12)


def test_bc3_smallness_warning(grid):
    big = BoundaryFunction(0.0, [], [0.3])
    with pytest.warns(RuntimeWarning, match="smallness cap"):
        try:
            solve_bc3_gs(ZERO, big, ZERO, 0.0, grid)
        except AnnulusEulerError:
            pass


def test_bc3_contraction_grows_with_data(grid):
    d = unit_data()
    ratios = []
    for eps in (0.01, 0.02, 0.04):
        s = d.scaled(eps)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            _, _, rep = solve_bc3_gs(s.f0, s.b0, s.p1.derivative(), s.j0, grid)
        ratios.append(max(rep.contraction_ratios()[1:]))
    assert ratios[0] < 1.0
    assert ratios[0] < ratios[1] < ratios[2]
