import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from weylkit.classify import (bel_debever, classify_q, default_observer, duality_residual, eh_commutator_residual,
                              eh_reconstruction_residual, electric_magnetic, generalized_eh, h_equals_weyl_compat,
                              orthonormal_frame, petrov_type, principal_null_directions, q_matrix,
                              special_via_compat, type_iii_permutable_pair, weyl_permutable_flat_check)
from weylkit.errors import PreconditionError, SignatureError

R0 = 4.0
SCHW = (0.0, R0, np.pi / 2, 0.0)
F = 1.0 - 2.0 / R0
STATIC = np.array([1.0 / np.sqrt(F), 0.0, 0.0, 0.0])
PP = (0.2, 0.1, 0.4, -0.3)
N_BLOCK = np.array([[1, 1j, 0], [1j, -1, 0], [0, 0, 0]])


def test_frame_is_orthonormal(geom):
    G = geom("godel", (0.0, 0.3, 0.1, 0.2))
    frame = orthonormal_frame(G)
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    assert np.allclose(frame.vectors @ G.g_at @ frame.vectors.T, eta, atol=1e-12)
    assert frame.gram_residual < 1e-12


def test_frame_errors(geom):
    G = geom("schwarzschild", SCHW)
    with pytest.raises(PreconditionError):
        orthonormal_frame(G, [0.0, 1.0, 0.0, 0.0])
    with pytest.raises(SignatureError):
        orthonormal_frame(geom("sphere_metric(3)", (0.9, 1.0, 0.3)))


def test_default_observer_is_unit_timelike(geom):
    G = geom("pp_wave", PP)
    u = default_observer(G)
    assert float(u @ G.g_at @ u) == pytest.approx(-1.0)


def test_schwarzschild_electric_part(geom):
    G = geom("schwarzschild", SCHW)
    pair = electric_magnetic(G, STATIC)
    # radial entry +2M/r^3 under the commutator convention used here
    assert np.allclose(pair.E_frame, np.diag([2.0, -1.0, -1.0]) / R0 ** 3, atol=1e-14)
    assert np.allclose(pair.H_frame, 0.0, atol=1e-14)
    assert max(pair.invariant_residuals(G).values()) < 1e-13


def test_observer_must_be_unit(geom):
    G = geom("schwarzschild", SCHW)
    with pytest.raises(PreconditionError):
        electric_magnetic(G, [1.0, 0.0, 0.0, 0.0])


def test_boosted_observer_sees_magnetic_part(geom):
    G = geom("schwarzschild", SCHW)
    v = np.array([1.0, 0.0, 0.0, 0.1])
    u = v / np.sqrt(-(v @ G.g_at @ v))
    h, compat = h_equals_weyl_compat(G, u)
    assert h > 1e-3 and compat > 1e-3
    h, compat = h_equals_weyl_compat(G, STATIC)
    assert h < 1e-14 and compat < 1e-14


def test_generalized_eh(geom):
    G = geom("schwarzschild", SCHW)
    zero = generalized_eh(G, G.g_at)
    assert np.allclose(zero.E, 0.0, atol=1e-14) and np.allclose(zero.H, 0.0, atol=1e-14)
    ul = G.g_at @ STATIC
    pair = generalized_eh(G, np.outer(ul, ul))
    assert np.allclose(pair.E, electric_magnetic(G, STATIC).E, atol=1e-14)
    # u u is Weyl-compatible here, so E commutes with it
    assert eh_commutator_residual(pair, G) < 1e-14
    with pytest.raises(ValueError):
        eh_commutator_residual(electric_magnetic(G, STATIC), G)


@pytest.mark.parametrize("name,p", [("schwarzschild", SCHW), ("godel", (0.0, 0.3, 0.1, 0.2)),
                                    ("pp_wave", PP)])
def test_weyl_rebuilt_from_e_and_h(geom, name, p):
    G = geom(name, p)
    assert eh_reconstruction_residual(G) < 1e-12
    assert duality_residual(G) < 1e-12


@pytest.mark.parametrize("name,p,kind", [
    ("schwarzschild", SCHW, "D"),
    ("godel", (0.0, 0.3, 0.1, 0.2), "D"),
    ("pp_wave", PP, "N"),
    ("de_sitter_static", (0.0, 1.5, 1.0, 0.5), "O"),
    ("frw_flat", (1.2, 0.1, 0.2, 0.3), "O"),
    ("minkowski", (0.0, 0.0, 0.0, 0.0), "O"),
])
def test_petrov_types(geom, name, p, kind):
    assert petrov_type(geom(name, p)).petrov_type == kind


def test_petrov_eigenvalues_schwarzschild(geom):
    rep = petrov_type(geom("schwarzschild", SCHW))
    vals = sorted(z.real for z in rep.eigenvalues)
    assert vals == pytest.approx([-1 / R0 ** 3, -1 / R0 ** 3, 2 / R0 ** 3])
    assert rep.minimal_poly_degree == 2


@pytest.mark.parametrize("Q,kind", [
    (np.zeros((3, 3)), "O"),
    (N_BLOCK, "N"),
    (np.array([[0, 1, 0], [1, 0, 1j], [0, 1j, 0]]), "III"),
    (np.diag([1.0, 1.0, -2.0]), "D"),
    (np.diag([1.0, 1.0, -2.0]) + N_BLOCK, "II"),
    (np.diag([1.0, 2.0, -3.0]), "I"),
])
def test_classify_synthetic_q(Q, kind):
    rep = classify_q(Q)
    assert rep.petrov_type == kind
    assert rep.to_dict()["petrov_type"] == kind


def test_classify_q_scale_invariant():
    Q = np.diag([1.0, 1.0, -2.0]) + N_BLOCK
    for s in (1e-8, 1.0, 1e6):
        assert classify_q(s * Q).petrov_type == "II"


def test_eigenvalues_invariant_under_frame_rotation(geom):
    G = geom("godel", (0.0, 0.3, 0.1, 0.2))
    base = orthonormal_frame(G)
    ref = np.sort_complex(np.linalg.eigvals(q_matrix(G, base)[0]))
    for R in Rotation.random(5, random_state=3).as_matrix():
        ev = np.sort_complex(np.linalg.eigvals(q_matrix(G, base.rotated(R))[0]))
        assert np.allclose(ev, ref, atol=1e-12)
        assert petrov_type(G, base.rotated(R)).petrov_type == "D"


def test_bel_debever_levels(geom):
    assert bel_debever(geom("pp_wave", PP), [0, 1, 0, 0]).level == "N"
    G = geom("schwarzschild", SCHW)
    out = bel_debever(G, [1.0 / F, 1.0, 0.0, 0.0])
    assert out.level == "II/D" and out.res_III > 1e-3
    assert set(out.to_dict()) == {"res_I", "res_IID", "res_III", "res_N", "res_O", "level"}
    assert bel_debever(G, [1.0 / np.sqrt(F), 0.0, 1.0 / R0, 0.0]).level == "none"
    assert bel_debever(geom("minkowski", (0, 0, 0, 0)), [1, 1, 0, 0]).level == "O"


def test_bel_debever_needs_null_vector(geom):
    with pytest.raises(PreconditionError):
        bel_debever(geom("schwarzschild", SCHW), STATIC)


def test_special_via_compat(geom):
    G = geom("schwarzschild", SCHW)
    compat, iid = special_via_compat(G, [1.0 / F, -1.0, 0.0, 0.0])
    assert compat < 1e-13 and iid < 1e-13


def test_type_iii_permutable_pair_for_pp_wave(geom):
    res_iii, perm = type_iii_permutable_pair(geom("pp_wave", PP), [0, 1, 0, 0])
    assert res_iii < 1e-13 and perm < 1e-13


def test_weyl_permutable_flat_check(geom):
    perm, weyl = weyl_permutable_flat_check(geom("frw_flat", (1.2, 0.1, 0.2, 0.3)), [1, 0, 0, 0])
    assert perm < 1e-12 and weyl < 1e-12
    perm, weyl = weyl_permutable_flat_check(geom("schwarzschild", SCHW), STATIC)
    assert perm > 1e-3 and weyl > 1e-3


def test_principal_null_directions(geom):
    G = geom("schwarzschild", SCHW)
    pnds = principal_null_directions(G, orthonormal_frame(G, STATIC))
    dirs = sorted(round(d.direction[0], 6) for d in pnds)
    assert dirs == [-1.0, 1.0]
    for d in pnds:
        assert abs(d.k @ G.g_at @ d.k) < 1e-10
    assert len(principal_null_directions(geom("pp_wave", PP))) == 1
    assert principal_null_directions(geom("minkowski", (0, 0, 0, 0))) == []
