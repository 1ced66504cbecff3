import numpy as np
import pytest

from weylkit import catalog, compute_geometry
from weylkit.errors import DegenerateMetricError, SignatureError
from weylkit.geometry import (MetricSpec, bianchi_residual, christoffel, commutator_residual, cov_deriv,
                              field_jet, metricity_residual, ricci_scalar, riemann,
                              riemann_symmetry_residual, sample_points, scalar_count, weyl,
                              weyl_divergence_residual, weyl_trace_residual)
from weylkit.oracles import christoffel_agreement, riemann_agreement, riemann_fd
from weylkit.tensor import fro

SCHW = (0.0, 4.0, np.pi / 2, 0.0)


def test_schwarzschild_gamma_r_tt():
    gam = christoffel(catalog("schwarzschild"), SCHW)
    # M (1 - 2M/r) / r^2 with M = 1, r = 4
    assert gam[1, 0, 0] == pytest.approx(0.03125, rel=1e-12)
    assert gam[0, 0, 1] == pytest.approx(1.0 / (4.0 * 2.0), rel=1e-12)


def test_sphere_gamma():
    th = 0.9
    gam = christoffel(catalog("sphere_metric(2)"), [th, 0.4])
    assert gam[0, 1, 1] == pytest.approx(-np.sin(th) * np.cos(th))
    assert gam[1, 0, 1] == pytest.approx(np.cos(th) / np.sin(th))
    assert gam[1, 1, 0] == gam[1, 0, 1]


def test_minkowski_is_flat():
    G = compute_geometry(catalog("minkowski"), [0.1, 0.2, 0.3, 0.4])
    assert fro(G.gamma_at) == 0.0 and fro(G.riemann_mixed) == 0.0


@pytest.mark.parametrize("r", [1.0, 2.5])
def test_sphere_constant_curvature(r):
    spec = catalog("sphere_metric(3)", r=r)
    G = compute_geometry(spec, [0.8, 1.1, 0.3])
    g, K = G.g_at, 1.0 / r ** 2
    d = np.eye(3)
    expect = K * (np.einsum("bm,ac->abcm", d, g) - np.einsum("am,bc->abcm", d, g))
    assert np.allclose(G.riemann_mixed, expect, atol=1e-12)
    assert G.scalar_at == pytest.approx(6.0 / r ** 2)


def test_two_sphere_scalar():
    _, R = ricci_scalar(catalog("sphere_metric(2)", r=1.7), [1.0, 0.2])
    assert R == pytest.approx(2.0 / 1.7 ** 2)


def test_schwarzschild_is_vacuum_with_weyl():
    G = compute_geometry(catalog("schwarzschild"), SCHW)
    assert fro(G.ricci_at) < 1e-14
    assert np.allclose(G.weyl_mixed, G.riemann_mixed, atol=1e-14)
    # Kretschmann scalar 48 M^2 / r^6
    R = G.riemann_lowered
    up = np.einsum("ai,bj,ck,dl,ijkl->abcd", *(G.ginv_at,) * 4, R)
    assert np.einsum("abcd,abcd->", R, up) == pytest.approx(48.0 / 4.0 ** 6)


def test_de_sitter_einstein_space_and_conformally_flat():
    L = 3.0
    G = compute_geometry(catalog("de_sitter_static"), [0.0, 1.5, 1.0, 0.5])
    assert np.allclose(G.ricci_at, 3.0 / L ** 2 * G.g_at, atol=1e-13)
    assert fro(G.weyl_mixed) < 1e-13


def test_frw_conformally_flat_but_curved():
    G = compute_geometry(catalog("frw_flat"), [1.2, 0.1, 0.2, 0.3])
    assert fro(G.weyl_mixed) < 1e-12 * fro(G.riemann_mixed)
    assert fro(G.ricci_at) > 0.1


def test_godel_has_weyl_curvature():
    w_mixed, w_low = weyl(catalog("godel"), [0.0, 0.3, 0.0, 0.1])
    assert fro(w_mixed) > 0.1


@pytest.mark.parametrize("name", ["schwarzschild", "godel", "pp_wave", "frw_flat", "de_sitter_static"])
def test_curvature_identities(name):
    spec = catalog(name)
    for p in sample_points(spec, 3, seed=4):
        G = compute_geometry(spec, p)
        assert bianchi_residual(G) < 1e-12
        assert riemann_symmetry_residual(G) < 1e-12
        assert weyl_trace_residual(G) < 1e-12
        assert metricity_residual(G) < 1e-12
        assert weyl_divergence_residual(G) < 1e-10


def test_christoffel_and_riemann_match_finite_differences():
    spec = catalog("godel")
    p = [0.1, 0.2, -0.3, 0.4]
    assert christoffel_agreement(spec, p) < 1e-6
    assert riemann_agreement(spec, p) < 1e-5
    assert np.allclose(riemann(spec, p)[0], riemann_fd(spec, p), atol=1e-5)


def test_leibniz_rule_for_covariant_derivative():
    spec = catalog("schwarzschild")
    G = compute_geometry(spec, SCHW, order=3)
    u = ["r", "sin(theta)", "0", "r*t"]
    w = ["1", "r^2", "cos(theta)", "0"]
    prod = [[f"({a})*({b})" for b in w] for a in u]
    nu, nw = cov_deriv(u, G, variance="d"), cov_deriv(w, G, variance="d")
    uv, wv = field_jet(u, G).value, field_jet(w, G).value
    lhs = cov_deriv(prod, G, variance="dd")
    rhs = np.einsum("ia,b->iab", nu, wv) + np.einsum("a,ib->iab", uv, nw)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_commutator_matches_riemann():
    G = compute_geometry(catalog("godel"), [0.0, 0.2, 0.1, 0.0])
    assert commutator_residual(G, ["x*y", "exp(x)", "t", "z^2"]) < 1e-12


def test_scalar_count():
    assert [scalar_count(n) for n in (3, 4, 5)] == [3, 14, 40]
    with pytest.raises(ValueError):
        scalar_count(2)


def test_degenerate_and_signature_errors():
    spec = MetricSpec.from_matrix("bad", ["x", "y"], [["x", 0], [0, 1]])
    with pytest.raises(DegenerateMetricError):
        compute_geometry(spec, [0.0, 1.0])
    flipped = MetricSpec.from_matrix("flipped", ["x", "y"], [["x", 0], [0, 1]], signature=(2, 0))
    with pytest.raises(SignatureError):
        compute_geometry(flipped, [-1.0, 1.0])


def test_sample_points_reproducible_and_in_range():
    spec = catalog("schwarzschild")
    a, b = sample_points(spec, 10, seed=3), sample_points(spec, 10, seed=3)
    assert np.array_equal(a, b)
    assert np.all((a[:, 1] >= 2.5) & (a[:, 1] <= 12.0))
    assert not np.array_equal(a, sample_points(spec, 10, seed=4))


def test_sampler_gives_up_on_hopeless_ranges():
    spec = MetricSpec.from_matrix("flipped", ["x", "y"], [["x", 0], [0, 1]], signature=(2, 0),
                                  sample_ranges={"x": (-2.0, -1.0), "y": (0.0, 1.0)})
    with pytest.raises(DegenerateMetricError):
        sample_points(spec, 1, max_rejections=20)
