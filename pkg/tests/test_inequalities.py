import math

import numpy as np
import pytest

from warpflow.ambient import make_custom, make_space_form
from warpflow.flows import FlowSpec, evolve
from warpflow.grid import circle_grid, sphere_grid
from warpflow.inequalities import (
    ball_chi,
    ball_chi_inverse,
    ball_xi,
    curve_kwww_deficit,
    deficit_boundary_momentum,
    deficit_hyperbolic_ref,
    deficit_phi_quermass_euclidean,
    deficit_sphere_ref,
    deficit_weinstock_iso,
    kwong_miao_deficit,
    minkowski_residual,
    monotone_series,
    q_imcf,
    q_k_euclidean,
)
from warpflow.quantities import surface_integral
from warpflow.surface import RadialGraph, geometry, make_seed_surface

EU = make_space_form(0)
HY = make_space_form(-1)
SP = make_space_form(1)


@pytest.fixture(scope="module")
def fine_grid():
    return sphere_grid(128, 256)


def test_q_imcf_equality_value_and_scale_invariance(fine_grid):
    ball = make_seed_surface(EU, fine_grid, "round", r0=1.0)
    q = q_imcf(EU, ball, 1.0)
    assert q == pytest.approx(2 / 3 * (4 * math.pi) ** -0.5, rel=1e-12)
    assert q == pytest.approx(0.18806, abs=1e-5)
    scaled = make_seed_surface(EU, fine_grid, "round", r0=3.7)
    assert q_imcf(EU, scaled, 1.0) == pytest.approx(q, rel=1e-10)
    pert = make_seed_surface(EU, fine_grid, "legendre", r0=1, eps=0.2, l=2)
    assert q_imcf(EU, pert, 1.0) > q * (1 + 1e-4)


def test_boundary_momentum_equality_cases(fine_grid):
    ball = make_seed_surface(EU, fine_grid, "round", r0=1.0)
    for k in (1.0, 1.5, 2.0, 3.0):
        rep = deficit_boundary_momentum(EU, ball, k)
        assert abs(rep.relative_deficit) <= 1e-10
        assert rep.equality_expected
    rep = deficit_boundary_momentum(EU, ball, 2.0)
    assert rep.lhs == pytest.approx(4 * math.pi, rel=1e-10)
    rep = deficit_boundary_momentum(EU, ball, 1.0)
    assert rep.rhs == pytest.approx(8 * math.pi / 3 + 4 * math.pi / 3, rel=1e-10)


def test_boundary_momentum_custom_ambient(fine_grid):
    cu = make_custom("cosh", a=0.1)
    pert = make_seed_surface(cu, fine_grid, "legendre", r0=1, eps=0.1, l=2)
    rep = deficit_boundary_momentum(cu, pert, 1.0)
    assert rep.deficit > 1e-3
    assert not rep.equality_expected
    ball = make_seed_surface(cu, fine_grid, "round", r0=1.0)
    rep = deficit_boundary_momentum(cu, ball, 1.0)
    assert abs(rep.relative_deficit) <= 1e-10


def test_weinstock_chain(fine_grid):
    ball = make_seed_surface(EU, fine_grid, "round", r0=1.0)
    rep = deficit_weinstock_iso(EU, ball)
    assert abs(rep.relative_deficit) <= 1e-12
    assert rep.lhs == pytest.approx(4 * math.pi, rel=1e-10)
    assert abs(rep.aux["hoelder"]) < 1e-8 and abs(rep.aux["young"]) < 1e-10

    # scale covariance: both sides scale like r0^{n+2}
    for r0 in (0.5, 2.0, 3.3):
        scaled = make_seed_surface(EU, fine_grid, "round", r0=r0)
        assert abs(deficit_weinstock_iso(EU, scaled).relative_deficit) <= 1e-12

    pert = make_seed_surface(EU, fine_grid, "legendre", r0=1, eps=0.2, l=2)
    rep = deficit_weinstock_iso(EU, pert)
    assert rep.deficit > 1e-2
    assert rep.aux["hoelder"] >= -1e-8
    assert rep.aux["young"] >= -1e-8
    girao = deficit_boundary_momentum(EU, pert, 1.0)
    assert girao.deficit >= -1e-8

    with pytest.raises(ValueError, match="euclidean"):
        deficit_weinstock_iso(HY, make_seed_surface(HY, fine_grid, "round", r0=1.0))


def test_phi_quermass_exact_values(fine_grid):
    ball = make_seed_surface(EU, fine_grid, "round", r0=1.0)
    rep1 = deficit_phi_quermass_euclidean(EU, ball, 1)
    assert rep1.lhs == pytest.approx(10 * math.pi / 3, rel=1e-9)
    assert abs(rep1.relative_deficit) <= 1e-9
    rep2 = deficit_phi_quermass_euclidean(EU, ball, 2)
    assert rep2.lhs == pytest.approx(6 * math.pi, rel=1e-9)
    assert abs(rep2.relative_deficit) <= 1e-9
    pert = make_seed_surface(EU, fine_grid, "legendre", r0=1, eps=0.15, l=2)
    assert deficit_phi_quermass_euclidean(EU, pert, 1).deficit > 1e-3


def test_q_k_scale_invariance(fine_grid):
    for r0 in (1.0, 2.7):
        ball = make_seed_surface(EU, fine_grid, "round", r0=r0)
        val = q_k_euclidean(EU, ball, 1)
        ref = (5 / 6) * 4 * math.pi * (2 / (4 * math.pi)) ** 1.5
        assert val == pytest.approx(ref, rel=1e-10)


def test_kwong_miao(fine_grid):
    ball = make_seed_surface(EU, fine_grid, "round", r0=1.0)
    for k, lhs in ((1, 2 * math.pi), (2, 2 * math.pi)):
        rep = kwong_miao_deficit(EU, ball, k)
        assert rep.lhs == pytest.approx(lhs, rel=1e-10)
        assert abs(rep.relative_deficit) <= 1e-10
    pert = make_seed_surface(EU, fine_grid, "legendre", r0=1, eps=0.2, l=2)
    assert kwong_miao_deficit(EU, pert, 1).deficit > 1e-3


def test_minkowski_residuals(fine_grid):
    ball = make_seed_surface(EU, fine_grid, "round", r0=1.0)
    assert minkowski_residual(EU, geometry(EU, ball), 1) < 1e-14
    hball = make_seed_surface(HY, fine_grid, "round", r0=1.0)
    assert minkowski_residual(HY, geometry(HY, hball), 2) < 1e-12
    pert = make_seed_surface(EU, fine_grid, "bandlimited",
                             seed=7, r0=1, amp=0.05, lmax=4)
    assert minkowski_residual(EU, geometry(EU, pert), 2) < 1e-6


def test_ball_reference_functions():
    xi1 = ball_xi(HY, 1, 1.0)
    exact = 4 * math.pi * (math.cosh(1) - 1) * math.sinh(1) * math.cosh(1)
    assert xi1 == pytest.approx(exact, rel=1e-14)
    assert xi1 == pytest.approx(12.374, abs=2e-3)
    chi0 = ball_chi(HY, 0, 1.0)
    assert chi0 == pytest.approx(math.pi * (math.sinh(2) - 2), rel=1e-12)
    assert chi0 == pytest.approx(5.1109, abs=1e-4)
    # independent discrete oracle: quadrature of Phi E_1 over a round graph
    g = sphere_grid(128, 256)
    ball = make_seed_surface(HY, g, "round", r0=1.0)
    f = geometry(HY, ball)
    disc = surface_integral(f, HY.phi(ball.u) * f.E[1])
    assert abs(xi1 - disc) <= 1e-8
    disc0 = ball_chi(HY, 0, 1.0)
    from warpflow.quantities import volume
    assert abs(disc0 - volume(HY, ball)) <= 1e-8


def test_chi_inverse_roundtrip():
    for r in np.linspace(0.1, 3.0, 9):
        for ell in (0, 1, 2):
            w = ball_chi(HY, ell, r)
            assert abs(ball_chi_inverse(HY, ell, w) - r) <= 1e-10
    for r in np.linspace(0.1, 2.5, 9):
        for ell in (0, 2):
            w = ball_chi(SP, ell, r)
            assert abs(ball_chi_inverse(SP, ell, w) - r) <= 1e-10
    # the boundary-area functional chi_1 peaks at the equator; its inverse
    # lives on the monotone branch below pi/2
    for r in np.linspace(0.1, 1.5, 5):
        w = ball_chi(SP, 1, r)
        assert abs(ball_chi_inverse(SP, 1, w) - r) <= 1e-10


def test_chi_inverse_range_errors():
    top = ball_chi(SP, 1, math.pi / 2)
    with pytest.raises(ValueError, match="range"):
        ball_chi_inverse(SP, 1, top * 1.01)
    with pytest.raises(ValueError, match="below"):
        ball_chi_inverse(HY, 0, -1.0)
    with pytest.raises(ValueError, match="sphere|pi"):
        ball_chi(SP, 0, 3.5)
    with pytest.raises(ValueError):
        ball_xi(EU, 1, 1.0)


def test_hyperbolic_ref_deficits(fine_grid):
    ball = make_seed_surface(HY, fine_grid, "round", r0=1.0)
    for ell in (0, 1):
        rep = deficit_hyperbolic_ref(HY, ball, 1, ell)
        assert abs(rep.relative_deficit) <= 1e-8
        assert rep.aux["ball_radius"] == pytest.approx(1.0, abs=1e-9)
    pert = make_seed_surface(HY, fine_grid, "legendre", r0=1, eps=0.1, l=2)
    rep = deficit_hyperbolic_ref(HY, pert, 1, 0)
    assert rep.deficit > 1e-3
    assert rep.flags["static_convex"] is True
    with pytest.raises(ValueError, match="ell"):
        deficit_hyperbolic_ref(HY, ball, 1, 2)


def test_sphere_ref_deficits(fine_grid):
    ball = make_seed_surface(SP, fine_grid, "round", r0=0.7)
    for ell in (0, 1, 2):
        rep = deficit_sphere_ref(SP, ball, ell)
        assert abs(rep.relative_deficit) <= 1e-8
    pert = make_seed_surface(SP, fine_grid, "bandlimited",
                             seed=7, r0=0.7, amp=0.03, lmax=4)
    rep = deficit_sphere_ref(SP, pert, 1)
    assert rep.deficit > 0
    assert rep.flags["convex"] is True


def test_curve_deficits():
    c = circle_grid(512)
    circle = make_seed_surface(EU, c, "round", r0=1.0)
    rep = curve_kwww_deficit(EU, circle)
    assert rep.lhs == pytest.approx(math.pi, rel=1e-12)
    assert rep.rhs == pytest.approx(math.pi, rel=1e-10)
    circle2 = make_seed_surface(EU, c, "round", r0=2.0)
    rep2 = curve_kwww_deficit(EU, circle2)
    assert rep2.lhs == pytest.approx(4 * math.pi, rel=1e-12)
    assert abs(rep2.relative_deficit) <= 1e-10

    u = 1 + 0.2 * np.cos(2 * c.theta)
    ellipse = RadialGraph(grid=c, u=u, space_kind="euclidean")
    assert curve_kwww_deficit(EU, ellipse).deficit > 1e-3

    u_bad = 1 + 0.45 * np.cos(2 * c.theta)
    nonconvex = RadialGraph(grid=c, u=u_bad, space_kind="euclidean")
    with pytest.raises(ValueError, match="convex"):
        curve_kwww_deficit(EU, nonconvex)


def test_curve_deficit_hyperbolic_circle():
    c = circle_grid(512)
    circle = make_seed_surface(HY, c, "round", r0=0.8)
    rep = curve_kwww_deficit(HY, circle)
    assert abs(rep.relative_deficit) <= 1e-10


def test_curve_deficit_sphere_circle():
    # hemisphere circles are the sphere-ambient equality case
    c = circle_grid(512)
    circle = make_seed_surface(SP, c, "round", r0=0.7)
    rep = curve_kwww_deficit(SP, circle)
    assert abs(rep.relative_deficit) <= 1e-10


def test_equality_detection_margins(fine_grid):
    # every deficit on the perturbed seed clears 10x the grid-error scale
    pert = make_seed_surface(EU, fine_grid, "legendre", r0=1, eps=0.2, l=2)
    grid_error = 1e-6
    assert deficit_boundary_momentum(EU, pert, 1.0).deficit > 10 * grid_error
    assert deficit_weinstock_iso(EU, pert).deficit > 10 * grid_error
    assert deficit_phi_quermass_euclidean(EU, pert, 1).deficit > 10 * grid_error
    assert kwong_miao_deficit(EU, pert, 1).deficit > 10 * grid_error


def test_monotone_series_mismatch_guard():
    g = sphere_grid(32, 64)
    graph = make_seed_surface(EU, g, "round", r0=1.0)
    spec = FlowSpec(kind="imcf", k=1, t_final=0.1, report_dt=0.05)
    trace = evolve(EU, graph, spec)
    with pytest.raises(ValueError, match="produced by"):
        monotone_series(EU, trace, FlowSpec(kind="euclidean_inverse", k=1))
    series = monotone_series(EU, trace, spec, ks=(1.0,))
    assert "Q_imcf_1" in series
    assert series["newton_maclaurin_margin"].min() >= -1e-10
