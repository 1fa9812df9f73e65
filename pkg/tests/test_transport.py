import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from annulus_euler.boundary import BoundaryData, Diffeo
from annulus_euler.errors import (
    FluxMismatch,
    NoConvergence,
    NonMonotoneDiffeo,
    NonPositiveThroughflow,
    ThroughflowSignChange,
)
from annulus_euler.fields import (
    TWO_PI,
    AnnulusGrid,
    BoundaryFunction,
    PolarVectorField,
    ring_flux,
)
from annulus_euler.transport import (
    KINDS,
    FixedPointConfig,
    TransportProblem,
    backtrace_characteristic,
    f1_from_diffeo,
    f1_update,
    fixed_point,
    omega0_bernoulli_form,
    omega0_pressure_form,
    outer_integrand,
    solve_transport,
    streamline_foot,
    transport_by_stream,
)

from conftest import unit_data

ZERO = BoundaryFunction(0.0)


def _field(g, vr, vt):
    return PolarVectorField(g, np.broadcast_to(vr, g.shape).copy(), np.broadcast_to(vt, g.shape).copy())


def _smooth_vhat(g):
    rho = np.sin(np.pi * (g.rr - g.r0) / (g.r1 - g.r0)) + 0.5
    return _field(g, 0.05 * np.cos(g.tt) / g.rr, 0.1 * np.sin(g.tt) * rho)


def test_config_validation():
    with pytest.raises(ValueError):
        FixedPointConfig(fp_tol=0.0)
    with pytest.raises(ValueError):
        FixedPointConfig(transport="euler")
    assert FixedPointConfig().mode_count(AnnulusGrid(1, 2, 9, 96)) == 32


def test_backtrace_radial_lines(grid):
    v = _field(grid, 0.0, 0.0)
    th = np.linspace(0.0, 6.0, 7)
    np.testing.assert_array_equal(backtrace_characteristic(v, 1.7, th), th)


def test_backtrace_swirl():
    # d theta / dr = (c / r) / (r * (1 / r)) = c / r, so theta0 = theta - c ln(r / r0)
    c = 0.3
    errs = []
    for n in (33, 65):
        g = AnnulusGrid(1.0, 2.0, n, 32)
        v = _field(g, 0.0, c / g.rr)
        errs.append(max(abs(backtrace_characteristic(v, r, 0.4) - (0.4 - c * np.log(r))) for r in (2.0, 1.37)))
        assert backtrace_characteristic(v, 1.0, 0.4) == 0.4
    # cubic interpolation in r dominates: better than third order
    assert errs[1] <= 1e-8 and np.log2(errs[0] / errs[1]) >= 3.0


def test_backtrace_step_refinement(grid64):
    v = _smooth_vhat(grid64)
    th = np.linspace(0.0, TWO_PI, 9)
    coarse = backtrace_characteristic(v, 2.0, th, cfg=FixedPointConfig(ode_steps_per_cell=4))
    fine = backtrace_characteristic(v, 2.0, th, cfg=FixedPointConfig(ode_steps_per_cell=40))
    assert np.max(np.abs(coarse - fine)) <= 1e-8


def test_backtrace_sign_change(grid):
    v = _field(grid, -2.0 / grid.rr, 0.1)
    with pytest.raises(ThroughflowSignChange):
        backtrace_characteristic(v, 1.5, 0.0)
    with pytest.raises(ValueError):
        backtrace_characteristic(_field(grid, 0.0, 0.0), 2.5, 0.0)


def test_transport_radial(grid):
    w0 = BoundaryFunction(0.2, [0.3], [0.1])
    w = solve_transport(TransportProblem(_field(grid, 0.0, 0.0), w0))
    np.testing.assert_allclose(w.values, np.broadcast_to(w0(grid.theta), grid.shape), atol=1e-15)


def test_transport_swirl():
    g = AnnulusGrid(1.0, 2.0, 33, 32)
    c = 0.3
    w = solve_transport(TransportProblem(_field(g, 0.0, c / g.rr), BoundaryFunction(0.0, [], [1.0])))
    np.testing.assert_allclose(w.values, np.sin(g.tt - c * np.log(g.rr)), atol=1e-7)
    np.testing.assert_array_equal(w.values[0], np.sin(g.theta))


def test_transport_constant_datum(grid):
    w = solve_transport(TransportProblem(_smooth_vhat(grid), BoundaryFunction(0.7)))
    np.testing.assert_array_equal(w.values, 0.7)


def test_transport_rejects_reversed_flow(grid):
    with pytest.raises(ThroughflowSignChange):
        solve_transport(TransportProblem(_field(grid, -1.5 / grid.rr, 0.0), BoundaryFunction(0.0, [1.0])))


def test_stream_labels_match_characteristics():
    # for a divergence-free field with stream function Phi the two feet agree to O(dr^2)
    errs = []
    eps = 0.05
    for n in (33, 65):
        g = AnnulusGrid(1.0, 2.0, n, 64)
        psi = eps * (g.rr - 1.0) * (2.0 - g.rr) * np.sin(g.tt) + 0.1 * np.log(g.rr)
        # u_r = (1/r)(1 + d_theta psi), u_theta = -d_r psi
        v = _field(
            g,
            eps * (g.rr - 1.0) * (2.0 - g.rr) * np.cos(g.tt) / g.rr,
            -(eps * (3.0 - 2.0 * g.rr) * np.sin(g.tt) + 0.1 / g.rr),
        )
        foot_s = streamline_foot(psi, 1.0)
        th = np.asarray(g.theta)
        foot_c = np.array([backtrace_characteristic(v, r, th) for r in g.r])
        errs.append(np.max(np.abs(foot_s - foot_c)))
    assert errs[1] <= 1e-6 and errs[0] / errs[1] >= 3.5


def test_transport_by_stream_zero_stream(grid):
    w0 = BoundaryFunction(0.0, [0.3], [0.2])
    w = transport_by_stream(np.zeros(grid.shape), 1.0, w0, grid)
    np.testing.assert_allclose(w.values, np.broadcast_to(w0(grid.theta), grid.shape), atol=1e-14)


def test_omega0_pressure_examples():
    row = np.zeros(64)
    th = TWO_PI * np.arange(64) / 64
    assert omega0_pressure_form(ZERO, ZERO, row).sup() == 0.0
    eps = 0.03
    w = omega0_pressure_form(ZERO, BoundaryFunction(0.0, [eps]), row)
    np.testing.assert_allclose(w(th), eps * np.sin(th), atol=1e-15)
    w = omega0_pressure_form(BoundaryFunction(0.0, [0.1]), ZERO, row, r0=1.5)
    np.testing.assert_allclose(w(th), 0.1 / 1.5**2 * np.sin(th), atol=1e-15)


def test_omega0_pressure_quadratic_row():
    th = TWO_PI * np.arange(64) / 64
    row = 0.2 * np.cos(th)
    w = omega0_pressure_form(ZERO, ZERO, row)
    # -(0.04 cos^2)'/2 = 0.02 sin 2 theta
    np.testing.assert_allclose(w(th), 0.02 * np.sin(2 * th), atol=1e-15)


def test_omega0_pressure_gate():
    with pytest.raises(NonPositiveThroughflow):
        omega0_pressure_form(BoundaryFunction(-1.0), ZERO, np.zeros(16))


def test_omega0_bernoulli_examples():
    th = TWO_PI * np.arange(64) / 64
    assert omega0_bernoulli_form(ZERO, BoundaryFunction(0.3)).sup() == 0.0
    eps = 0.02
    w = omega0_bernoulli_form(ZERO, BoundaryFunction(0.0, [], [eps]))
    np.testing.assert_allclose(w(th), -eps * np.cos(th), atol=1e-15)
    w = omega0_bernoulli_form(BoundaryFunction(0.1), BoundaryFunction(0.0, [], [eps]))
    np.testing.assert_allclose(w(th), -eps / 1.1 * np.cos(th), atol=1e-15)
    with pytest.raises(NonPositiveThroughflow):
        omega0_bernoulli_form(BoundaryFunction(0.0, [1.5]), ZERO)


def test_f1_update_trivial():
    z = np.zeros(64)
    s = f1_update(z, z, ZERO, ZERO, 0.0, 2.0)
    assert s.f1.sup() == 0.0 and s.Rave == 0.0
    s = f1_update(z, z, ZERO, ZERO, 0.6, 2.0)
    np.testing.assert_allclose(s.f1(np.linspace(0, 6, 5)), 0.6 / TWO_PI, atol=1e-15)


def test_f1_update_sine_vorticity():
    n, r1 = 64, 2.0
    th = TWO_PI * np.arange(n) / n
    s = f1_update(np.sin(th), np.zeros(n), ZERO, ZERO, 0.0, r1)
    assert abs(s.Rave) <= 1e-15
    # independent quadrature of int_0^{2pi} (R - Rave)(z) (2pi - z) dz with R = -r1^2 sin z
    weighted, _ = quad(lambda z: -(r1**2) * np.sin(z) * (TWO_PI - z), 0.0, TWO_PI)
    f1_at_0 = (0.0 - weighted) / TWO_PI
    assert s.f1(0.0) == pytest.approx(f1_at_0, abs=1e-12)
    np.testing.assert_allclose(s.f1(th), f1_at_0 + r1**2 * (np.cos(th) - 1.0), atol=1e-12)
    assert abs(s.f1.integral()) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4),
    st.floats(-0.5, 0.5),
    st.floats(1.2, 3.0),
)
def test_f1_update_enforces_flux(coefs, J0, r1):
    n = 64
    th = TWO_PI * np.arange(n) / n
    w = coefs[0] + coefs[1] * np.sin(th) + coefs[2] * np.cos(2 * th)
    vt = 0.1 * coefs[3] * np.cos(th)
    s = f1_update(w, vt, BoundaryFunction(0.0, [0.1]), BoundaryFunction(0.0, [], [0.05]), J0, r1)
    assert abs(s.f1.integral() - J0) <= 1e-10
    R = outer_integrand(w, vt, BoundaryFunction(0.0, [0.1]), BoundaryFunction(0.0, [], [0.05]), r1)
    assert s.Rave == pytest.approx(np.mean(R), abs=1e-12)
    # f1' = R - Rave
    np.testing.assert_allclose(s.f1.derivative()(th), R - np.mean(R), atol=1e-10)


def test_f1_update_gate():
    z = np.zeros(16)
    with pytest.raises(NonPositiveThroughflow):
        f1_update(z, z, BoundaryFunction(-2.0), ZERO, 0.0, 2.0)


def test_f1_from_diffeo_examples():
    th = np.linspace(0.0, TWO_PI, 37)
    f0 = BoundaryFunction(0.0, [0.1], [0.05])
    np.testing.assert_allclose(f1_from_diffeo(Diffeo(), f0)(th), f0(th), atol=1e-14)
    eps = 0.2
    T = Diffeo(BoundaryFunction(0.0, [], [eps]))
    np.testing.assert_allclose(f1_from_diffeo(T, ZERO)(th), eps * np.cos(th), atol=1e-14)
    np.testing.assert_allclose(f1_from_diffeo(T, BoundaryFunction(0.1))(th), 1.1 * (1 + eps * np.cos(th)) - 1, atol=1e-14)
    with pytest.raises(NonMonotoneDiffeo):
        f1_from_diffeo(Diffeo(BoundaryFunction(0.0, [], [1.2])), ZERO)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-0.3, 0.3), min_size=2, max_size=2),
    st.lists(st.floats(-0.15, 0.15), min_size=2, max_size=2),
)
def test_f1_from_diffeo_preserves_flux(fa, ta):
    f0 = BoundaryFunction(0.05, fa)
    T = Diffeo(BoundaryFunction(0.3, [], ta))
    assert f1_from_diffeo(T, f0).integral() == pytest.approx(f0.integral(), abs=1e-10)


@pytest.mark.parametrize("kind", KINDS)
def test_zero_data_gives_base_flow(kind, grid):
    res = fixed_point(kind, BoundaryData(), grid)
    assert res.report.converged and res.report.iterations == 1
    np.testing.assert_allclose(res.u.vr, 1.0 / grid.rr, atol=1e-14)
    assert np.max(np.abs(res.u.vtheta)) <= 1e-14
    assert res.omega.max_abs() == 0.0


def test_bc4_swirl_flow(grid64):
    a, c = 1.1, 0.1
    r0, r1 = grid64.r0, grid64.r1
    data = BoundaryData(
        f0=BoundaryFunction(a - 1.0), f1=BoundaryFunction(a - 1.0),
        p0=BoundaryFunction((1.0 - a**2 - c**2) / (2 * r0**2)), j0=c * np.log(r1 / r0),
    )
    res = fixed_point("BC4", data, grid64)
    np.testing.assert_allclose(res.u.vr, a / grid64.rr, atol=1e-13)
    np.testing.assert_allclose(res.u.vtheta, c / grid64.rr, atol=1e-5)
    assert res.omega.max_abs() <= 1e-12


def _scaled(eps):
    return unit_data().scaled(eps)


@pytest.mark.parametrize("kind", KINDS)
def test_contraction_for_small_data(kind, grid):
    res = fixed_point(kind, _scaled(0.01), grid)
    ratios = res.report.contraction_ratios()
    assert res.report.converged
    assert max(ratios[1:]) <= 0.5


@pytest.mark.parametrize("kind", KINDS)
def test_ring_flux_is_constant(kind, grid):
    d = _scaled(0.01)
    res = fixed_point(kind, d, grid)
    flux = ring_flux(res.u)
    total = TWO_PI + d.f0.integral()
    assert np.max(np.abs(flux - total)) <= 1e-10 * abs(total)
    assert res.report.flux_defect <= 1e-10 * abs(total)


@pytest.mark.parametrize("kind", ["BC5", "BC3vt"])
def test_outer_flux_closure(kind, grid):
    d = _scaled(0.01)
    res = fixed_point(kind, d, grid)
    J0 = d.f0.integral()
    assert all(abs(x) <= 1e-10 for x in res.report.diagnostics["flux_closure_defects"])
    assert abs(res.f1.integral() - J0) <= 1e-10
    assert abs(res.report.Rave_final) <= 1e-8 * (1.0 + d.size())


def test_vorticity_constant_along_characteristics(grid64):
    res = fixed_point("BC3vt", _scaled(0.01), grid64)
    g = grid64
    u = res.u
    vhat = PolarVectorField(g, u.vr - 1.0 / g.rr, u.vtheta)
    omega0 = BoundaryFunction.from_samples(res.omega.values[0])
    rng = np.random.default_rng(5)
    cols = rng.integers(0, g.ntheta, 100)
    variation = 0.0
    for i, j in zip(rng.integers(1, g.nr, 100), cols):
        foot = backtrace_characteristic(vhat, g.r[i], g.theta[j])
        variation = max(variation, abs(res.omega.values[i, j] - omega0(np.mod(foot, TWO_PI))))
    bound = 10 * g.dr**2 * omega0.derivative().sup()
    assert variation <= bound


def test_characteristics_mode_agrees_with_stream_mode(grid):
    d = _scaled(0.01)
    a = fixed_point("BC1star", d, grid)
    b = fixed_point("BC1star", d, grid, FixedPointConfig(transport="characteristics"))
    assert (a.u - b.u).max_abs() <= 10 * grid.dr**2 * d.size()


def test_bc2star_uses_diffeo_flux(grid):
    d = _scaled(0.01)
    res = fixed_point("BC2star", d, grid)
    th = grid.theta
    expect = f1_from_diffeo(d.T, d.f0)(th)
    np.testing.assert_allclose(grid.r1 * res.u.vr[-1], 1.0 + expect, atol=1e-12)


def test_gates(grid):
    d = BoundaryData(f0=BoundaryFunction(0.0, [0.01]), f1=BoundaryFunction(0.01))
    with pytest.raises(FluxMismatch):
        fixed_point("BC4", d, grid)
    with pytest.raises(NonPositiveThroughflow):
        fixed_point("BC5", BoundaryData(f0=BoundaryFunction(0.0, [1.2])), grid)
    with pytest.raises(ValueError):
        fixed_point("BC9", BoundaryData(), grid)


def test_no_convergence(grid):
    with pytest.raises(NoConvergence) as exc:
        fixed_point("BC5", _scaled(0.01), grid, FixedPointConfig(max_iters=2))
    assert exc.value.report.iterations == 2


def test_large_data_note(grid):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            res = fixed_point("BC1star", _scaled(0.1), grid)
        except NoConvergence as exc:
            res = None
            notes = exc.report.notes
    notes = res.report.notes if res is not None else notes
    assert any("smallness cap" in n for n in notes)
