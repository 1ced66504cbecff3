import numpy as np
import pytest

from weylkit import catalog, compute_geometry
from weylkit.catalog import ellipsoid_embedding, sphere_embedding, sphere_metric
from weylkit.compat import SymmetricField, compat_residual_with
from weylkit.constructs import (EmbeddingSpec, GeodesicMapSpec, commutator, geodesic_map_deform,
                                geodesic_map_weyl_transfer, hypersurface_compat_suite, hypersurface_geometry,
                                kn_compat_residuals, kn_trace_residual, kn_weyl_condition_residual,
                                kulkarni_nomizu, kulkarni_nomizu_riemann, omega_codazzi_from_gauss,
                                solve_kn_potential)
from weylkit.errors import EvalError, GeometryError, NoPotentialError, PreconditionError
from weylkit.tensor import MetricAt, fro

ETA = MetricAt.from_matrix(np.diag([-1.0, 1.0, 1.0, 1.0]))


def _sym(rng, n=4):
    a = rng.normal(size=(n, n))
    return a + a.T


def test_kn_of_metric_is_constant_curvature():
    G = compute_geometry(sphere_metric(3, r=1.5), [0.8, 1.0, 0.2])
    K = kulkarni_nomizu(G.g_at, G.g_at)
    assert np.allclose(G.riemann_lowered, K / (2 * 1.5 ** 2), atol=1e-13)


def test_kn_has_curvature_symmetries(rng):
    a, b = _sym(rng), _sym(rng)
    K = kulkarni_nomizu(a, b)
    assert np.allclose(K, kulkarni_nomizu(b, a))
    assert np.allclose(K, -np.swapaxes(K, 0, 1))
    assert np.allclose(K, -np.swapaxes(K, 2, 3))
    assert np.allclose(K, np.transpose(K, (2, 3, 0, 1)))
    assert np.allclose(K + np.einsum("kljm->jklm", K) + np.einsum("ljkm->jklm", K), 0.0)


def test_commuting_factors_are_compatible_with_their_product(rng):
    # simultaneously diagonal in an orthonormal frame, hence commuting
    a, b = np.diag(rng.normal(size=4)), np.diag(rng.normal(size=4))
    assert fro(commutator(a, b, ETA)) == 0.0
    ra, rb = kn_compat_residuals(a, b, ETA)
    assert ra < 1e-14 and rb < 1e-14
    K, Km = kulkarni_nomizu_riemann(a, b, ETA)
    assert compat_residual_with(_sym(rng), Km) > 1e-3


def test_weyl_condition_needs_commuting_pair(rng):
    with pytest.raises(PreconditionError):
        kn_weyl_condition_residual(_sym(rng), _sym(rng), ETA)


def test_potential_for_split_signature_example():
    b = np.diag([1.0, -1.0, 1.0, -1.0])
    pot = solve_kn_potential(b, ETA)
    assert pot.residual < 1e-12
    assert kn_trace_residual(pot.a, b, ETA) < 1e-12
    assert fro(kulkarni_nomizu(pot.a, b)) > 0.1


def test_potential_matches_hand_solution():
    # b^i_j has eigenvalues (-1, -1, 0, 0); the linear system forces a = c diag(1, 1, 0, 0)
    pot = solve_kn_potential(np.diag([1.0, -1.0, 0.0, 0.0]), ETA)
    assert pot.solution_dim == 1
    assert np.allclose(pot.a, np.diag([1.0, 1.0, 0.0, 0.0]) / np.sqrt(2.0), atol=1e-12)


def test_one_parameter_family(rng):
    s, x = 0.7, 1.3
    pot = solve_kn_potential(np.diag([-s, s, x, -x]), ETA)
    assert pot.solution_dim >= 1 and pot.residual < 1e-12


def test_potential_errors():
    with pytest.raises(NoPotentialError):
        solve_kn_potential(np.zeros((4, 4)), ETA)
    with pytest.raises(NoPotentialError):
        solve_kn_potential(ETA.g.components, ETA)
    boost = np.zeros((4, 4))
    boost[0, 1] = boost[1, 0] = 1.0  # b^i_j has eigenvalues +-i
    with pytest.raises(PreconditionError):
        solve_kn_potential(boost, ETA)


@pytest.mark.parametrize("r", [1.0, 2.0])
def test_sphere_hypersurface(r):
    hs = hypersurface_geometry(sphere_embedding(3, r=r), [0.7, 0.9, 0.3])
    assert np.allclose(hs.omega, -hs.g / r, atol=1e-13)
    assert hs.geometry.scalar_at == pytest.approx(6.0 / r ** 2)
    assert hs.gauss_residual < 1e-13 and hs.codazzi_residual < 1e-13
    assert hs.epsilon == 1


def test_degenerate_embedding_is_rejected():
    emb = EmbeddingSpec("null", ("t", "x", "y", "z"), ("t", "x", "y", "z", "t"), (-1, 1, 1, 1, 1), {}, {})
    with pytest.raises(GeometryError):
        hypersurface_geometry(emb, [0.0, 0.0, 0.0, 0.0])


def test_ellipsoid_compat_suite():
    rep = hypersurface_compat_suite(ellipsoid_embedding(), [0.1, 0.2, -0.1, 0.05])
    assert rep.gauss_residual < 1e-13 and rep.codazzi_residual < 1e-13
    assert rep.ricci_form_residual < 1e-13
    assert rep.max_compat() < 1e-13
    assert len(rep.eigenvector_weyl) == 4 and rep.skipped_complex == 0
    assert set(rep.to_dict()) >= {"omega_weyl", "ricci_weyl", "eigenvector_riemann"}


def test_lorentzian_hypersurface_ricci_is_weyl_compatible():
    hs = hypersurface_geometry(catalog("lorentz_graph_embedding"), [0.0, 0.0, 0.0, 0.0])
    rep = hypersurface_compat_suite(hs)
    assert rep.ricci_weyl < 1e-13
    assert fro(hs.geometry.weyl_mixed) > 1e-3


def test_omega_codazzi_from_gauss():
    assert omega_codazzi_from_gauss(sphere_embedding(4), [0.7, 0.8, 0.9, 0.3]) < 1e-13
    spec = sphere_metric(4, r=1.5)
    om = SymmetricField([[f"({e})/r" for e in row] for row in _matrix_strings(spec)])
    assert omega_codazzi_from_gauss(spec, [0.7, 0.8, 0.9, 0.3], omega=om) < 1e-13


def _matrix_strings(spec):
    n = spec.dim
    from weylkit.expr import to_string
    rows = [["0"] * n for _ in range(n)]
    for (i, j), e in spec.components.items():
        rows[i][j] = rows[j][i] = to_string(e)
    return rows


def test_omega_codazzi_preconditions():
    with pytest.raises(PreconditionError):
        omega_codazzi_from_gauss(sphere_embedding(3), [0.7, 0.8, 0.3])
    spec = sphere_metric(4, r=1.5)
    twice = SymmetricField([[f"2*({e})" for e in row] for row in _matrix_strings(spec)])
    with pytest.raises(PreconditionError):
        omega_codazzi_from_gauss(spec, [0.7, 0.8, 0.9, 0.3], omega=twice)
    with pytest.raises(ValueError):
        omega_codazzi_from_gauss(spec, [0.7, 0.8, 0.9, 0.3])


def test_geodesic_map_on_sphere_has_p_proportional_to_g():
    gm = GeodesicMapSpec(sphere_metric(3), "-log(cos(chi1))")
    r = geodesic_map_deform(gm, [0.5, 1.0, 0.3])
    assert np.allclose(r.P, r.geometry.g_at, atol=1e-13)
    for res in (r.closedness_residual, r.symmetry_residual, r.ricci_residual, r.connection_residual,
                r.cyclic_invariance_residual):
        assert res < 1e-13
    # a flat image: the deformed curvature vanishes
    assert fro(r.riemann_tilde) < 1e-13


def test_geodesic_map_general_potential():
    r = geodesic_map_deform(GeodesicMapSpec(catalog("godel"), "x*y + t^2/3"), [0.1, 0.2, 0.3, 0.0])
    assert r.connection_residual < 1e-12 and r.cyclic_invariance_residual < 1e-12
    assert r.ricci_residual < 1e-12


def test_geodesic_map_weyl_transfer():
    gm = GeodesicMapSpec(catalog("schwarzschild"), "log(r)")
    t = geodesic_map_weyl_transfer(gm, np.diag([1.0, 2.0, 3.0, 4.0]), [0.0, 4.0, 1.0, 0.3])
    assert t.commutator_ric < 1e-12 and t.commutator_P < 1e-12
    assert t.weyl_transfer_residual < 1e-12


def test_geodesic_map_rejects_unknown_names():
    with pytest.raises(EvalError):
        GeodesicMapSpec(catalog("schwarzschild"), "log(q)")
