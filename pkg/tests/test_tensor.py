import numpy as np
import pytest

from weylkit import catalog, compute_geometry
from weylkit.errors import DegenerateMetricError, TensorError
from weylkit.tensor import (DenseTensor, MetricAt, antisymmetrize_pair, contract, fro, levi_civita,
                            levi_civita_symbol, outer, raise_lower, relative)

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


def test_contract_matches_trace():
    a = np.arange(16.0).reshape(4, 4)
    t = DenseTensor(a, ("u", "d"))
    assert contract(t, 0, 1).components == pytest.approx(np.trace(a))


def test_contract_keeps_remaining_slot_order(rng):
    a = rng.normal(size=(3, 3, 3, 3))
    t = DenseTensor(a, ("d", "u", "d", "d"))
    out = contract(t, 1, 3)
    assert out.variance == ("d", "d")
    assert np.allclose(out.components, np.einsum("abcb->ac", a))


def test_contract_rejects_same_variance():
    with pytest.raises(TensorError):
        contract(DenseTensor(np.eye(3), ("d", "d")), 0, 1)


def test_outer_product_shape_and_variance():
    u = DenseTensor([1.0, 2.0, 3.0], ("u",))
    w = DenseTensor([0.0, 1.0, -1.0], ("d",))
    t = outer(u, w)
    assert t.variance == ("u", "d")
    assert contract(t, 0, 1).components == pytest.approx(-1.0)


def test_raise_then_lower_round_trips(rng):
    for _ in range(100):
        a = rng.normal(size=(4, 4))
        m = MetricAt.from_matrix(a @ ETA @ a.T)
        t = DenseTensor(rng.normal(size=(4, 4, 4)), ("d", "u", "d"))
        for slot in range(3):
            back = raise_lower(raise_lower(t, slot, m), slot, m)
            assert back.variance == t.variance
            assert relative(back.components - t.components, fro(t.components)) < 1e-9


def test_raise_lower_minkowski_flips_time_sign():
    m = MetricAt.from_matrix(ETA)
    u = DenseTensor([2.0, 1.0, 0.0, 0.0], ("u",))
    assert np.allclose(raise_lower(u, 0, m).components, [-2.0, 1.0, 0.0, 0.0])


def test_antisymmetrize_has_no_half():
    t = DenseTensor(np.array([[1.0, 2.0], [5.0, 7.0]]), ("d", "d"))
    assert np.allclose(antisymmetrize_pair(t, 0, 1).components, [[0.0, -3.0], [3.0, 0.0]])


def test_antisymmetrize_needs_shared_variance():
    with pytest.raises(TensorError):
        antisymmetrize_pair(DenseTensor(np.eye(3), ("u", "d")), 0, 1)


def test_levi_civita_symbol_basics():
    eps = levi_civita_symbol(4)
    assert eps[0, 1, 2, 3] == 1.0 and eps[1, 0, 2, 3] == -1.0
    assert np.count_nonzero(eps) == 24


def test_levi_civita_minkowski_contraction():
    m = MetricAt.from_matrix(ETA)
    eps = levi_civita(m).components
    up = np.einsum("ai,bj,ck,dl,ijkl->abcd", *(m.g_inv.components,) * 4, eps)
    assert np.einsum("abcd,abcd->", eps, up) == pytest.approx(-24.0)
    assert up[0, 1, 2, 3] == pytest.approx(-1.0)


def test_levi_civita_schwarzschild_scales_with_volume():
    G = compute_geometry(catalog("schwarzschild"), [0.0, 3.0, np.pi / 2, 0.0])
    eps = levi_civita(G.metric).components
    # sqrt|det g| = r^2 sin(theta) on the equator
    assert eps[0, 1, 2, 3] == pytest.approx(9.0)
    assert eps[0, 1, 2, 3] ** 2 == pytest.approx(81.0)


def test_levi_civita_riemannian_contraction():
    m = MetricAt.from_matrix(np.diag([1.0, 2.0, 3.0, 4.0]))
    eps = levi_civita(m).components
    up = np.einsum("ai,bj,ck,dl,ijkl->abcd", *(m.g_inv.components,) * 4, eps)
    assert np.einsum("abcd,abcd->", eps, up) == pytest.approx(24.0)


@pytest.mark.parametrize("comps,var", [
    (np.zeros((3, 4)), ("d", "d")),
    (np.eye(3), ("d", "x")),
    (np.eye(3), ("d",)),
    (np.zeros((7, 7)), ("d", "d")),
])
def test_dense_tensor_validation(comps, var):
    with pytest.raises(TensorError):
        DenseTensor(comps, var)


def test_dense_tensor_is_read_only():
    t = DenseTensor(np.eye(3), ("d", "d"))
    with pytest.raises(ValueError):
        t.components[0, 0] = 2.0


def test_metric_validation():
    with pytest.raises(DegenerateMetricError):
        MetricAt.from_matrix(np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(TensorError):
        MetricAt.from_matrix([[1.0, 2.0], [0.0, 1.0]])
    assert MetricAt.from_matrix(ETA).signature_counts == (3, 1)


def test_mismatched_arithmetic():
    with pytest.raises(TensorError):
        DenseTensor(np.eye(3), ("d", "d")) + DenseTensor(np.eye(3), ("u", "d"))
