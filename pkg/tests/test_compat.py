import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weylkit import catalog, compute_geometry
from weylkit.catalog import frw_flat
from weylkit.classify import orthonormal_frame
from weylkit.compat import (ANNIHILATING, NONE, SKEW, SymmetricField, VectorField, bridge_identity_residual,
                            causal_character, codazzi_deviation, codazzi_deviation_residual, compat_report,
                            concircular_residual, d_tensor, derdzinski_shen_check, derdzinski_shen_vector,
                            dpi_residual, hall_conditions, lovelock_residual, parallel_solution_check,
                            permutability_class, pureness_check, ricci_commutator_norm,
                            riemann_compat_residual, vector_bridge_residual, vector_compat_residual,
                            weyl_compat_residual)
from weylkit.errors import PreconditionError
from weylkit.tensor import fro

SCHW = (0.0, 4.0, 1.1, 0.3)
GODEL = (0.0, 0.2, 0.1, 0.0)
TOL = 1e-9


def _sym(rng, n=4):
    a = rng.normal(size=(n, n))
    return a + a.T


def test_metric_is_riemann_compatible(geom):
    for name, p in [("schwarzschild", SCHW), ("godel", GODEL), ("pp_wave", (0.1, 0.2, 0.3, 0.4))]:
        G = geom(name, p)
        assert riemann_compat_residual(G.g_at, G) < 1e-13
        assert weyl_compat_residual(G.g_at, G) < 1e-13


def test_random_tensor_is_not_compatible(geom, rng):
    G = geom("schwarzschild", SCHW)
    assert riemann_compat_residual(_sym(rng), G) > 1e-3


def test_bridge_identity(geom, rng):
    for name, p in [("godel", GODEL), ("frw_flat", (1.2, 0.1, 0.2, 0.3))]:
        G = geom(name, p)
        for b in [_sym(rng) for _ in range(5)] + [np.diag([1.0, 2.0, 3.0, 4.0])]:
            assert bridge_identity_residual(b, G) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=10, max_size=10),
       st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_bridge_identity_property(entries, x, y):
    b = np.zeros((4, 4))
    b[np.triu_indices(4)] = entries
    b = b + np.triu(b, 1).T
    G = compute_geometry(catalog("godel"), [0.0, x, y, 0.0], order=2)
    assert bridge_identity_residual(b, G) < 1e-11


def test_codazzi_deviation_of_metric_vanishes(geom):
    G = geom("godel", GODEL)
    assert fro(codazzi_deviation(G.g, G)) < 1e-13


def test_ricci_codazzi_deviation_is_minus_riemann_divergence(geom):
    G = geom("godel", GODEL)
    dev = codazzi_deviation(G.ricci, G)
    assert np.allclose(dev, -G.riemann_div.value, atol=1e-13)
    assert fro(dev) > 1e-3


def test_codazzi_needs_a_differentiable_field(geom):
    G = geom("schwarzschild", SCHW)
    with pytest.raises(PreconditionError):
        codazzi_deviation(SymmetricField.from_values(np.eye(4)), G)


def test_codazzi_residual_for_expression_field(geom):
    G = geom("schwarzschild", SCHW)
    rows = [["0"] * 4 for _ in range(4)]
    rows[1][1] = "r"
    assert codazzi_deviation_residual(SymmetricField(rows), G) > 1e-3


@pytest.mark.parametrize("name,p", [("godel", GODEL), ("frw_flat", (1.2, 0.1, 0.2, 0.3)),
                                    ("schwarzschild", SCHW)])
def test_second_derivative_identities(geom, name, p):
    G = geom(name, p)
    assert lovelock_residual(G) < 1e-10
    assert dpi_residual(G) < 1e-10


def test_permutability_classes(geom, rng):
    G = geom("schwarzschild", SCHW)
    assert permutability_class(G.g_at, G) == SKEW
    assert permutability_class(np.zeros((4, 4)), G) == ANNIHILATING
    assert permutability_class(_sym(rng), G) == NONE


def test_vector_compatibility_in_type_d_blades(geom):
    G = geom("schwarzschild", SCHW)
    for v in ([1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [1, 1, 0, 0], [0, 0, 1, 1]):
        assert vector_compat_residual(v, G, "weyl") < 1e-14
    for v in ([1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 1, 0]):
        assert vector_compat_residual(v, G, "weyl") > 1e-3


def test_vector_bridge(geom, rng):
    G = geom("godel", GODEL)
    for _ in range(10):
        assert vector_bridge_residual(rng.normal(size=4), G) < 1e-12


def test_d_tensor_for_static_observer(geom):
    G = geom("schwarzschild", SCHW)
    u = np.array([1.0 / np.sqrt(1.0 - 2.0 / SCHW[1]), 0.0, 0.0, 0.0])
    d = d_tensor(u, G)
    assert d.reconstruction_residual < 1e-14
    assert d.eigen_residual < 1e-14 and d.eigenvalue == pytest.approx(0.0, abs=1e-14)


def test_d_tensor_rejects_null_and_fails_off_blade(geom):
    G = geom("schwarzschild", SCHW)
    f = 1.0 - 2.0 / SCHW[1]
    with pytest.raises(PreconditionError):
        d_tensor([1.0 / f, 1.0, 0.0, 0.0], G)
    with pytest.raises(PreconditionError):
        d_tensor([0.0, 0.0, 0.0, 0.0], G)
    assert d_tensor([1.0, 0.0, 1.0, 0.0], G).reconstruction_residual > 1e-3


def test_d_tensor_vanishes_on_flat_space(geom):
    G = geom("minkowski", (0.0, 0.0, 0.0, 0.0))
    d = d_tensor([1.0, 0.0, 0.0, 0.0], G)
    assert fro(d.D) == 0.0 and d.reconstruction_residual == 0.0


def test_causal_character(geom):
    G = geom("minkowski", (0.0, 0.0, 0.0, 0.0))
    assert causal_character([1, 0, 0, 0], G) == "timelike"
    assert causal_character([1, 1, 0, 0], G) == "null"
    assert causal_character([0, 0, 2, 0], G) == "spacelike"
    assert VectorField((1.0, 0.0, 0.0, 0.0), lower=True).causal_character(G) == "timelike"


def test_derdzinski_shen_for_compatible_tensor(geom):
    G = geom("schwarzschild", SCHW)
    u = np.array([1.0, 0.0, 0.0, 0.0])
    ul = G.g_at @ u
    res = derdzinski_shen_check(np.outer(ul, ul), G)
    assert not res.vacuous and res.max_contraction < 1e-14
    assert derdzinski_shen_vector(u, [0, 0, 1, 0], [0, 0, 0, 1], G) < 1e-14
    assert derdzinski_shen_check(G.g_at, G).vacuous


def test_hall_conditions(geom):
    G = geom("frw_flat", (1.2, 0.1, 0.0, 0.0))
    ok = hall_conditions([1, 0, 0, 0], G)
    assert max(ok) < TOL
    tilted = hall_conditions([1, 0.3, 0, 0], G)
    assert tilted.res_A > 1e-3 and tilted.res_C > 1e-3
    # Goedel: the Weyl condition alone is not enough
    g = hall_conditions([1, 0, 0.4, 0], geom("godel", GODEL))
    assert g.res_B < TOL and g.res_C > 1e-3 and g.res_A > 1e-3


def test_pureness_of_schwarzschild_static_frame(geom):
    G = geom("schwarzschild", SCHW)
    pairs = pureness_check(G, orthonormal_frame(G).vectors)
    assert len(pairs) == 6 and max(p.residual for p in pairs) < 1e-12
    with pytest.raises(PreconditionError):
        pureness_check(G, np.eye(4))


def test_pureness_constant_curvature(geom):
    G = compute_geometry(catalog("sphere_metric(3)"), [0.9, 1.0, 0.3])
    frame = np.diag(1.0 / np.sqrt(np.diag(G.g_at)))
    lam = {round(p.lam, 12) for p in pureness_check(G, frame)}
    # lambda = 2R / (n (n - 1)) with R = 6 on the unit 3-sphere
    assert lam == {2.0}


def test_concircular_de_sitter_slicing():
    G = compute_geometry(frw_flat(scale_factor="exp(t)"), [0.3, 0.1, 0.2, 0.3])
    u = VectorField(("-1", "0", "0", "0"), lower=True)
    assert concircular_residual(u, 1.0, 1.0, G) == (pytest.approx(0.0, abs=1e-14),) * 2
    bad = concircular_residual(u, 1.0, 0.5, G)
    assert min(bad) > 1e-2


def test_parallel_solutions(geom, rng):
    G = geom("schwarzschild", SCHW)
    assert parallel_solution_check(G.g_at, G) < 1e-14
    assert parallel_solution_check(_sym(rng), G) > 1e-3


def test_compat_report(geom):
    G = geom("schwarzschild", SCHW)
    rep = compat_report(G.g_at, G)
    assert rep.verdicts == {"riemann_compatible": True, "weyl_compatible": True, "commutes_with_ricci": True}
    assert rep.permutability_class == SKEW
    assert set(rep.to_dict()) >= {"residual_riemann", "residual_weyl", "verdicts"}
    assert ricci_commutator_norm(G.g_at, G) == 0.0
