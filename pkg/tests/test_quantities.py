import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from warpflow.ambient import make_custom, make_space_form, sphere_area
from warpflow.grid import circle_grid, sphere_grid
from warpflow.quantities import (
    UnsupportedAmbientError,
    full_report,
    quermassintegrals,
    surface_integral,
    volume,
    weighted_volume,
)
from warpflow.surface import geometry, make_seed_surface

EU = make_space_form(0)
HY = make_space_form(-1)
SP = make_space_form(1)


def test_surface_integral_unit_sphere():
    g = sphere_grid(64, 128)
    graph = make_seed_surface(EU, g, "round", r0=1.0)
    f = geometry(EU, graph)
    assert surface_integral(f, np.ones(g.shape)) == pytest.approx(4 * math.pi, rel=1e-10)
    assert surface_integral(f, f.E[1]) == pytest.approx(4 * math.pi, rel=1e-10)


def test_surface_integral_rejects_nonfinite():
    g = sphere_grid(16, 32)
    f = geometry(EU, make_seed_surface(EU, g, "round", r0=1.0))
    bad = np.ones(g.shape)
    bad[3, 5] = math.nan
    with pytest.raises(ValueError, match="node"):
        surface_integral(f, bad)


def test_potential_integral_self_convergence():
    # int Phi dmu on a perturbed surface approaches the fine-grid value at
    # 4th order under refinement
    vals = {}
    for M in (64, 128, 256):
        g = sphere_grid(M, 2 * M)
        graph = make_seed_surface(EU, g, "legendre", r0=1, eps=0.2, l=2)
        f = geometry(EU, graph)
        vals[M] = surface_integral(f, EU.phi(graph.u))
    ratio = abs(vals[64] - vals[256]) / max(abs(vals[128] - vals[256]), 1e-16)
    assert ratio > 8.0


def test_weighted_volume_closed_forms():
    g = sphere_grid(64, 128)
    ball = make_seed_surface(EU, g, "round", r0=1.0)
    assert weighted_volume(EU, ball, 2.0) == pytest.approx(math.pi, rel=1e-12)
    assert weighted_volume(EU, ball, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    hball = make_seed_surface(HY, g, "round", r0=1.0)
    expected = 4 * math.pi / 3 * math.sinh(1) ** 3
    assert weighted_volume(HY, hball, 1.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(6.7987, abs=1e-4)
    # radial-quadrature cross-check of the antiderivative shortcut
    direct = 4 * math.pi * quad(lambda s: math.cosh(s) * math.sinh(s) ** 2, 0, 1)[0]
    assert weighted_volume(HY, hball, 1.0) == pytest.approx(direct, rel=1e-10)


def test_weighted_volume_validates_exponent():
    g = sphere_grid(16, 32)
    ball = make_seed_surface(EU, g, "round", r0=1.0)
    with pytest.raises(ValueError, match="k >= 1"):
        weighted_volume(EU, ball, 0.5)


def test_volume_closed_forms():
    g = sphere_grid(64, 128)
    assert volume(EU, make_seed_surface(EU, g, "round", r0=2.0)) == pytest.approx(
        32 * math.pi / 3, rel=1e-10)
    half_sphere = make_seed_surface(SP, g, "round", r0=math.pi / 2)
    assert volume(SP, half_sphere) == pytest.approx(math.pi**2, rel=1e-10)
    hball = make_seed_surface(HY, g, "round", r0=1.0)
    assert volume(HY, hball) == pytest.approx(math.pi * (math.sinh(2) - 2), rel=1e-10)
    assert math.pi * (math.sinh(2) - 2) == pytest.approx(5.1109, abs=1e-4)


def test_weighted_volume_k1_equals_volume_euclidean():
    g = sphere_grid(64, 128)
    graph = make_seed_surface(EU, g, "legendre", r0=1, eps=0.2, l=2)
    assert weighted_volume(EU, graph, 1.0) == pytest.approx(
        volume(EU, graph), rel=1e-8)


def test_quermass_unit_sphere():
    g = sphere_grid(64, 128)
    W, res = quermassintegrals(EU, make_seed_surface(EU, g, "round", r0=1.0))
    assert W[0] == pytest.approx(4 * math.pi / 3, rel=1e-10)
    assert W[1] == pytest.approx(2 * math.pi, rel=1e-12)
    assert W[2] == pytest.approx(4 * math.pi, rel=1e-10)
    assert W[3] == 4 * math.pi / 3
    assert abs(res) < 1e-8


def test_quermass_hyperbolic_geodesic_sphere():
    g = sphere_grid(64, 128)
    graph = make_seed_surface(HY, g, "round", r0=1.0)
    W, res = quermassintegrals(HY, graph)
    W2_exact = 4 * math.pi * math.sinh(1) * math.cosh(1) - math.pi * (math.sinh(2) - 2)
    assert W[2] == pytest.approx(W2_exact, rel=1e-10)
    assert abs(res) <= 1e-8


@pytest.mark.parametrize("space,r0", [(EU, 1.0), (HY, 1.0), (SP, 0.7)])
def test_gauss_bonnet_residual_legendre(space, r0):
    g = sphere_grid(128, 256)
    graph = make_seed_surface(space, g, "legendre", r0=r0, eps=0.2, l=2)
    _, res = quermassintegrals(space, graph)
    assert abs(res) <= 1e-6


def test_gauss_bonnet_residual_fourth_order():
    res = {}
    for M in (64, 128):
        g = sphere_grid(M, 2 * M)
        graph = make_seed_surface(EU, g, "legendre", r0=1, eps=0.2, l=2)
        _, res[M] = quermassintegrals(EU, graph)
    assert np.log2(abs(res[64]) / abs(res[128])) > 3.5


def test_quermass_refuses_custom_space():
    cu = make_custom("cosh", a=0.1)
    g = sphere_grid(32, 64)
    graph = make_seed_surface(cu, g, "round", r0=1.0)
    with pytest.raises(UnsupportedAmbientError):
        quermassintegrals(cu, graph)


def test_full_report_euclidean_round():
    g = sphere_grid(64, 128)
    graph = make_seed_surface(EU, g, "round", r0=1.0)
    rep = full_report(EU, graph, ks=(1.0, 2.0))
    assert rep.momentum(1) == pytest.approx(4 * math.pi, rel=1e-12)
    assert rep.momentum(2) == pytest.approx(4 * math.pi, rel=1e-12)
    assert rep.gamma_area == 0.0
    assert rep.gamma_term(2.0) == 0.0
    assert rep.W(1) * 2 == pytest.approx(rep.area, rel=1e-14)
    assert rep.W(3) == sphere_area(2) / 3


def test_full_report_cosh_gamma():
    cu = make_custom("cosh", a=0.1)
    g = sphere_grid(32, 64)
    graph = make_seed_surface(cu, g, "round", r0=1.0)
    rep = full_report(cu, graph, ks=(1.0,))
    assert rep.gamma_area == pytest.approx(math.cosh(0.1) ** 2 * 4 * math.pi, rel=1e-14)
    assert rep.gamma_area == pytest.approx(4 * math.pi * 1.01003, rel=1e-5)
    assert rep.gamma_term(1.0) == pytest.approx(rep.gamma_area * math.cosh(0.1), rel=1e-14)
    assert rep.quermass is None and rep.gauss_bonnet_residual is None


def test_full_report_sphere_momentum():
    g = sphere_grid(64, 128)
    graph = make_seed_surface(SP, g, "round", r0=1.0)
    rep = full_report(SP, graph, ks=(1.0,))
    assert rep.momentum(1) == pytest.approx(4 * math.pi * math.sin(1) ** 3, rel=1e-12)
    assert rep.momentum(1) == pytest.approx(7.4874, abs=1e-4)


def test_report_json_schema():
    g = sphere_grid(32, 64)
    rep = full_report(EU, make_seed_surface(EU, g, "round", r0=1.0), ks=(1.0, 1.5))
    data = json.loads(rep.to_json())
    assert set(data) == {"n", "area", "volume", "momenta", "weighted_volumes",
                         "gamma_area", "gamma_terms", "curvature_integrals",
                         "phi_curvature_integrals", "W", "gauss_bonnet_residual"}
    assert set(data["momenta"]) == {"1", "1.5"}
    assert len(data["W"]) == 4
    assert data["area"] == pytest.approx(4 * math.pi, rel=1e-12)


@pytest.mark.parametrize("space,name,r0", [
    (EU, "euclidean", 1.0),
    (HY, "hyperbolic", 1.0),
    (SP, "sphere", 0.7),
    (make_custom("cosh", a=0.1), "cosh", 1.0),
])
def test_divergence_identity_gap(space, name, r0):
    # int lambda^k dmu - (n+k) wv_k - lambda^k(a)|Gamma| is zero on slices
    # and strictly positive off them
    g = sphere_grid(64, 128)
    k = 1.5
    round_rep = full_report(space, make_seed_surface(space, g, "round", r0=r0),
                            ks=(k,))
    gap = round_rep.momentum(k) - (2 + k) * round_rep.weighted_vol(k) \
        - round_rep.gamma_term(k)
    assert abs(gap) <= 1e-8 * round_rep.momentum(k)
    pert = full_report(space, make_seed_surface(space, g, "legendre",
                                                r0=r0, eps=0.2, l=2), ks=(k,))
    gap_pert = pert.momentum(k) - (2 + k) * pert.weighted_vol(k) \
        - pert.gamma_term(k)
    assert gap_pert > 1e-2


@pytest.mark.parametrize("space,r0", [(EU, 1.3), (HY, 0.9), (SP, 0.7)])
def test_round_report_closed_forms(space, r0):
    # every reported quantity of a round graph matches lambda-power closed forms
    g = sphere_grid(64, 128)
    rep = full_report(space, make_seed_surface(space, g, "round", r0=r0),
                      ks=(1.0, 2.5))
    lam = float(space.lam(r0))
    dlam = float(space.dlam(r0))
    phi = float(space.phi(r0))
    omega = sphere_area(2)
    assert rep.area == pytest.approx(lam**2 * omega, rel=1e-10)
    for k in (1.0, 2.5):
        assert rep.momentum(k) == pytest.approx(lam ** (2 + k) * omega, rel=1e-10)
        assert rep.weighted_vol(k) == pytest.approx(
            lam ** (2 + k) * omega / (2 + k), rel=1e-10)
    for k in (1, 2):
        assert rep.curvature_integrals[k] == pytest.approx(
            omega * lam ** (2 - k) * dlam**k, rel=1e-10)
        assert rep.phi_curvature(k) == pytest.approx(
            omega * phi * lam ** (2 - k) * dlam**k, rel=1e-10)


def test_circle_quermass():
    c = circle_grid(256)
    graph = make_seed_surface(EU, c, "round", r0=1.0)
    W, res = quermassintegrals(EU, graph)
    assert W[0] == pytest.approx(math.pi, rel=1e-12)       # area enclosed
    assert W[1] == pytest.approx(2 * math.pi, rel=1e-12)   # length
    assert W[2] == pytest.approx(math.pi, rel=1e-15)       # omega_1 / 2
    assert abs(res) < 1e-10                                 # total curvature 2 pi


def test_full_report_validation():
    g = sphere_grid(16, 32)
    graph = make_seed_surface(EU, g, "round", r0=1.0)
    with pytest.raises(ValueError, match="k >= 1"):
        full_report(EU, graph, ks=(0.5,))
    with pytest.raises(ValueError, match="0.. 2|0..2"):
        full_report(EU, graph, ks=(1.0,), kcurv=(3,))
