"""Curvature constructions: Kulkarni-Nomizu products, hypersurfaces, geodesic maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import taylor
from .compat import (SymmetricField, VectorField, _deriv_scale, _real_eigenpairs, _sym, cyclic_sum,
                     riemann_compat_residual, vector_compat_residual, weyl_compat_residual)
from .errors import DegenerateMetricError, EvalError, GeometryError, NoPotentialError, PreconditionError
from .expr import CONSTANTS, FUNCTIONS, Expression, as_expression, eval_taylor, evaluate, identifiers
from .geometry import (GeometryAt, MetricSpec, compute_geometry, field_jet, geometry_from_metric_jet,
                       riemann_from_connection)
from .taylor import Jet, jeinsum
from .tensor import MetricAt, fro, relative


# --- Kulkarni-Nomizu ----------------------------------------------------------------------

def kulkarni_nomizu(a, b) -> np.ndarray:
    """``b_l[j a_k]m + b_m[k a_j]l`` (unhalved brackets), indexed ``[j, k, l, m]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (np.einsum("lj,km->jklm", b, a) - np.einsum("lk,jm->jklm", b, a)
            + np.einsum("mk,jl->jklm", b, a) - np.einsum("mj,kl->jklm", b, a))


def kulkarni_nomizu_riemann(a, b, m: MetricAt) -> Tuple[np.ndarray, np.ndarray]:
    """The product as ``(K_jklm, K_jkl^m)``."""
    K = kulkarni_nomizu(a, b)
    return K, np.einsum("jklp,pm->jklm", K, m.g_inv.components)


def commutator(a, b, m: MetricAt) -> np.ndarray:
    """``a_i^m b_mj - a_j^m b_mi``."""
    ab = np.asarray(a) @ m.g_inv.components @ np.asarray(b)
    return ab - ab.T


def kn_compat_residuals(a, b, m: MetricAt) -> Tuple[float, float]:
    """Compatibility residuals of ``a`` and ``b`` against their own product."""
    _, Km = kulkarni_nomizu_riemann(a, b, m)
    from .compat import compat_residual_with
    return compat_residual_with(np.asarray(a, float), Km), compat_residual_with(np.asarray(b, float), Km)


def kn_weyl_condition_residual(a, b, m: MetricAt, tol: float = 1e-9) -> float:
    """Relative residual of the tracelessness condition on commuting ``a, b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    gi = m.g_inv.components
    if relative(commutator(a, b, m), 2 * fro(a) * fro(b) * fro(gi)) > tol:
        raise PreconditionError("a and b must commute")
    ta, tb = float(np.sum(gi * a)), float(np.sum(gi * b))
    res = tb * a + ta * b - 2 * b @ gi @ a
    return relative(res, abs(tb) * fro(a) + abs(ta) * fro(b) + 2 * fro(b) * fro(gi) * fro(a))


def kn_trace_residual(a, b, m: MetricAt) -> float:
    """Largest single trace of the product, relative."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    K, _ = kulkarni_nomizu_riemann(a, b, m)
    gi = m.g_inv.components
    traces = [np.einsum("pq,pqkl->kl", gi, K), np.einsum("pq,pjql->jl", gi, K),
              np.einsum("pq,pjkq->jk", gi, K), np.einsum("pq,jpql->jl", gi, K),
              np.einsum("pq,jpkq->jk", gi, K), np.einsum("pq,jkpq->jk", gi, K)]
    # K is bilinear in (a, b) and may vanish identically, so scale by the factors
    scale = fro(gi) * 4 * fro(a) * fro(b)
    return max(relative(t, scale) for t in traces)


@dataclass(frozen=True)
class KNPotential:
    a: np.ndarray
    eigenvalues: np.ndarray
    alphas: np.ndarray
    solution_dim: int
    residual: float


def solve_kn_potential(b, m: MetricAt) -> KNPotential:
    """A unit-norm potential ``a`` with the Weyl tracelessness condition for ``b``.

    ``b`` is diagonalized as ``b^i_j`` in a frame of non-null eigenvectors; the
    condition becomes a linear system for the eigenvalues ``alpha_i`` of ``a``.
    """
    b = np.asarray(b, dtype=float)
    n = m.dim
    if fro(b) == 0.0:
        raise NoPotentialError("b = 0 has only the trivial potential")
    g, gi = m.g.components, m.g_inv.components
    pairs, skipped = _real_eigenpairs(gi @ b)
    if skipped or len(pairs) != n:
        raise PreconditionError("b^i_j has complex eigenvalues")
    beta = np.array([p[0] for p in pairs])
    V = np.array([p[1] for p in pairs])  # rows: eigenvectors
    gram = V @ g @ V.T
    if np.linalg.matrix_rank(V, tol=1e-9) < n or np.min(np.abs(np.diag(gram))) < 1e-10:
        raise PreconditionError("b is not diagonalizable in a frame of non-null eigenvectors")
    # Orthonormalize within degenerate eigenspaces; distinct eigenspaces are already orthogonal.
    V, eps = _orthonormal_eigenframe(V, beta, g)
    M = (beta.sum() * np.eye(n) - 2 * np.diag(beta)) + np.outer(beta, np.ones(n))
    U, s, Wt = np.linalg.svd(M)
    null = Wt[s <= 1e-10 * max(1.0, s.max())]
    if len(null) == 0:
        raise NoPotentialError("only the zero potential satisfies the condition")
    alpha = null[0]
    flat = V @ g  # rows: lowered eigenvectors
    a = np.einsum("i,i,ik,il->kl", alpha, eps, flat, flat)
    a = a / fro(a)
    alpha = alpha / fro(np.einsum("i,i,ik,il->kl", null[0], eps, flat, flat))
    k = int(np.argmax(np.abs(a)))
    if a.flat[k] < 0:
        a, alpha = -a, -alpha
    return KNPotential(a, beta, alpha, len(null), kn_weyl_condition_residual(a, b, m))


def _orthonormal_eigenframe(V, beta, g):
    """Signature-aware Gram-Schmidt; only vectors sharing an eigenvalue actually mix."""
    out, eps = [], []
    for v in V:
        v = v.copy()
        for w, e in zip(out, eps):
            v = v - e * (w @ g @ v) * w
        nn = float(v @ g @ v)
        if abs(nn) < 1e-12:
            raise PreconditionError("null eigenvector; b is not diagonalizable in an orthonormal frame")
        out.append(v / np.sqrt(abs(nn)))
        eps.append(np.sign(nn))
    return np.array(out), np.array(eps)


# --- hypersurfaces ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EmbeddingSpec:
    """A hypersurface ``X^mu(u^1..u^n)`` of a flat space with metric ``diag(ambient_diag)``."""

    name: str
    coords: Tuple[str, ...]
    maps: Tuple[Expression, ...]
    ambient_diag: Tuple[int, ...]
    params: Dict[str, float] = field(default_factory=dict)
    sample_ranges: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        coords = tuple(self.coords)
        maps = tuple(as_expression(e) for e in self.maps)
        diag = tuple(int(x) for x in self.ambient_diag)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "ambient_diag", diag)
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})
        if len(maps) != len(coords) + 1 or len(diag) != len(maps):
            raise ValueError("an embedding of n coordinates needs n + 1 maps and ambient signs")
        if any(x not in (1, -1) for x in diag):
            raise ValueError("ambient metric entries must be +1 or -1")
        if len(set(coords)) != len(coords) or set(coords) & set(self.params):
            raise ValueError("coordinate names must be distinct and differ from parameters")
        reserved = set(FUNCTIONS) | set(CONSTANTS)
        if reserved & (set(coords) | set(self.params)):
            raise ValueError("coordinate or parameter name is a reserved word")
        for mu, e in enumerate(maps):
            unknown = identifiers(e) - set(coords) - set(self.params)
            if unknown:
                raise EvalError(f"X {mu}: unresolved identifiers {sorted(unknown)}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def ambient_dim(self) -> int:
        return len(self.maps)

    @property
    def ambient_signature(self) -> Tuple[int, int]:
        return (sum(1 for x in self.ambient_diag if x > 0), sum(1 for x in self.ambient_diag if x < 0))

    def point_map(self, point) -> Dict[str, float]:
        if isinstance(point, dict):
            return {c: float(point[c]) for c in self.coords}
        pt = [float(x) for x in point]
        if len(pt) != self.dim:
            raise ValueError(f"point has {len(pt)} coordinates, surface has {self.dim}")
        return dict(zip(self.coords, pt))

    def position_jet(self, point, order: int) -> Jet:
        pm = self.point_map(point)
        tbl = taylor.table(self.dim, order)
        data = np.array([eval_taylor(e, pm, self.params, self.coords, order).coefficients for e in self.maps])
        return Jet(data, order, tbl)

    def induced_metric_value(self, point) -> np.ndarray:
        return self.position_jet(point, 1).grad().value @ np.diag(self.ambient_diag) @ \
            self.position_jet(point, 1).grad().value.T

    def metric_spec_sampler(self):
        """A stand-in object exposing what :func:`sample_points` needs."""
        return _EmbeddingSampler(self)


class _EmbeddingSampler:
    def __init__(self, emb: EmbeddingSpec):
        self.coords = emb.coords
        self.dim = emb.dim
        self.sample_ranges = emb.sample_ranges
        self.expected_signature = None
        self._emb = emb

    def metric_value(self, point):
        return self._emb.induced_metric_value(point)


@dataclass(frozen=True, eq=False)
class HypersurfaceAt:
    emb: EmbeddingSpec
    geometry: GeometryAt
    normal_covector: np.ndarray
    normal_vector: np.ndarray
    epsilon: int
    omega_jet: Jet
    gauss_residual: float
    codazzi_residual: float

    @property
    def g(self) -> np.ndarray:
        return self.geometry.g_at

    @property
    def omega(self) -> np.ndarray:
        return self.omega_jet.value

    @cached_property
    def omega_mixed(self) -> np.ndarray:
        """``Omega^i_j``."""
        return self.geometry.ginv_at @ self.omega

    @cached_property
    def omega_squared(self) -> np.ndarray:
        return self.omega @ self.geometry.ginv_at @ self.omega


def _cofactor_normal(B: Jet) -> Jet:
    """Covector annihilating the rows of ``B`` (shape ``(n, n+1)``), from signed minors."""
    n, N1 = B.shape
    comps = []
    for mu in range(N1):
        cols = [c for c in range(N1) if c != mu]
        minor = Jet(B.data[:, cols], B.order, B.table)
        d = taylor.determinant(minor)
        comps.append(d * (-1.0 if mu % 2 else 1.0))
    return Jet.stack(comps)


def hypersurface_geometry(emb: EmbeddingSpec, point, order: int = 4) -> HypersurfaceAt:
    """Induced metric, unit normal, second fundamental form and Gauss/Codazzi residuals.

    The unit normal is oriented so that its last nonzero ambient component is
    positive; ``epsilon = N.N`` is the sign used in the Gauss equation
    ``R_jklm = epsilon (Omega_jl Omega_km - Omega_jm Omega_kl)``.
    """
    X = emb.position_jet(point, order + 1)
    eta = np.array(emb.ambient_diag, dtype=float)
    B = X.grad()  # B[j, mu] = d_j X^mu
    Beta = Jet(B.data * eta[None, :, None], B.order, B.table)
    gjet = jeinsum("im,jm->ij", Beta, B)
    pm = emb.point_map(point)
    pt = np.array([pm[c] for c in emb.coords])
    G = geometry_from_metric_jet(gjet, emb.coords, pt, emb.params)

    N = _cofactor_normal(B)
    NN = jeinsum("m,m->", Jet(N.data * eta[:, None], N.order, N.table), N)
    nn0 = float(NN.value)
    scale = float(np.sum(N.value ** 2))
    if abs(nn0) <= 1e-10 * scale:
        raise GeometryError("the normal is null; the second fundamental form is undefined")
    eps = 1 if nn0 > 0 else -1
    unit = jeinsum(",m->m", taylor.reciprocal(taylor.sqrt(NN * float(eps))), N)
    vec = eta * unit.value
    nz = np.nonzero(np.abs(vec) > 1e-12 * fro(vec))[0]
    if vec[nz[-1]] < 0:
        unit = unit * -1.0
        vec = -vec
    H = B.grad()  # H[i, j, mu] = d_i d_j X^mu
    omega = jeinsum("ijm,m->ij", H, unit)
    omega = (omega + omega.transpose(1, 0)) * 0.5

    Om = omega.value
    gauss = eps * (np.einsum("jl,km->jklm", Om, Om) - np.einsum("jm,kl->jklm", Om, Om))
    gauss_res = relative(G.riemann_lowered - gauss, G.scale("riemann", lowered=True) + 2 * fro(Om) ** 2)
    dev = G.cov_deriv(omega, "dd").value
    cod = dev - np.swapaxes(dev, 0, 1)
    cod_res = relative(cod, 2 * _deriv_scale(G, omega))
    return HypersurfaceAt(emb, G, unit.value, vec, eps, omega, gauss_res, cod_res)


@dataclass(frozen=True)
class HypersurfaceCompatReport:
    gauss_residual: float
    codazzi_residual: float
    ricci_form_residual: float
    omega_weyl: float
    omega_riemann: float
    omega_squared_riemann: float
    ricci_weyl: float
    ricci_riemann: float
    eigenvector_weyl: Tuple[float, ...]
    eigenvector_riemann: Tuple[float, ...]
    skipped_complex: int

    def max_compat(self) -> float:
        vals = [self.omega_weyl, self.omega_riemann, self.omega_squared_riemann, self.ricci_weyl,
                self.ricci_riemann, *self.eigenvector_weyl, *self.eigenvector_riemann]
        return max(vals)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def hypersurface_compat_suite(emb, point=None, order: int = 4) -> HypersurfaceCompatReport:
    """Compatibility of Omega, its eigenvectors, Omega^2 and the Ricci tensor on a hypersurface."""
    hs = emb if isinstance(emb, HypersurfaceAt) else hypersurface_geometry(emb, point, order)
    G = hs.geometry
    Om = hs.omega
    ricci_form = hs.epsilon * (np.trace(hs.omega_mixed) * Om - hs.omega_squared)
    rf = relative(G.ricci_at - ricci_form, G.ricci_scale + 2 * fro(hs.omega_squared) + fro(G.ginv_at) * fro(Om) ** 2)
    pairs, skipped = _real_eigenpairs(hs.omega_mixed)
    has_weyl = G.n >= 3
    ev_w = tuple(vector_compat_residual(v, G, "weyl") for _, v in pairs) if has_weyl else ()
    ev_r = tuple(vector_compat_residual(v, G, "riemann") for _, v in pairs)
    return HypersurfaceCompatReport(
        hs.gauss_residual, hs.codazzi_residual, rf,
        weyl_compat_residual(Om, G) if has_weyl else 0.0,
        riemann_compat_residual(Om, G),
        riemann_compat_residual(hs.omega_squared, G),
        weyl_compat_residual(G.ricci_at, G) if has_weyl else 0.0,
        riemann_compat_residual(G.ricci_at, G),
        ev_w, ev_r, skipped)


def omega_codazzi_from_gauss(source, point, omega: Optional[SymmetricField] = None, epsilon: int = 1,
                             k: float = 0.0, gauss_tol: float = 1e-8) -> float:
    """Codazzi deviation of an invertible Omega whose Gauss form reproduces the Riemann tensor.

    ``source`` is an :class:`EmbeddingSpec` (flat ambient) or a
    :class:`MetricSpec` together with an ``omega`` field; ``k`` is the
    ambient constant-curvature term of the Gauss form.
    """
    if isinstance(source, EmbeddingSpec):
        hs = hypersurface_geometry(source, point)
        G, om_jet, eps = hs.geometry, hs.omega_jet, hs.epsilon
    else:
        if omega is None:
            raise ValueError("a metric source needs an omega field")
        G = compute_geometry(source, point)
        om_jet, eps = omega.jet(G), epsilon
    n = G.n
    if n <= 3:
        raise PreconditionError("the Codazzi conclusion needs n > 3")
    Om = om_jet.value
    if abs(np.linalg.det(Om)) <= 1e-10 * fro(Om) ** n:
        raise PreconditionError("Omega is not invertible")
    g = G.g_at
    form = k * (np.einsum("jl,km->jklm", g, g) - np.einsum("jm,kl->jklm", g, g)) \
        + eps * (np.einsum("jl,km->jklm", Om, Om) - np.einsum("jm,kl->jklm", Om, Om))
    mismatch = relative(G.riemann_lowered - form, G.scale("riemann", lowered=True) + fro(form))
    if mismatch > gauss_tol:
        raise PreconditionError(f"the Riemann tensor does not have the Gauss form (residual {mismatch:.2e})")
    from .compat import codazzi_deviation_residual
    return codazzi_deviation_residual(om_jet, G)


def induced_metric_spec_point(hs: HypersurfaceAt) -> GeometryAt:
    return hs.geometry


# --- geodesic maps ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GeodesicMapSpec:
    """A geodesic map generated by the closed form ``X = d psi``."""

    base: MetricSpec
    psi: Expression

    def __post_init__(self):
        object.__setattr__(self, "psi", as_expression(self.psi))
        unknown = identifiers(self.psi) - set(self.base.coords) - set(self.base.params)
        if unknown:
            raise EvalError(f"potential: unresolved identifiers {sorted(unknown)}")


@dataclass(frozen=True, eq=False)
class GeodesicMapAt:
    geometry: GeometryAt
    X: np.ndarray
    P: np.ndarray
    riemann_tilde: np.ndarray
    ricci_tilde: np.ndarray
    closedness_residual: float
    symmetry_residual: float
    ricci_residual: float
    connection_residual: float
    cyclic_invariance_residual: float


def _psi_jets(gm: GeodesicMapSpec, G: GeometryAt):
    tbl = G.g.table
    psi = Jet(eval_taylor(gm.psi, G.point_map, G.params, G.coords, G.order).coefficients, G.order, tbl)
    Xj = psi.grad()  # X_l = d_l psi
    P = G.cov_deriv(Xj, "d") - jeinsum("k,l->kl", Xj, Xj)
    return Xj, P


def geodesic_map_deform(gm: GeodesicMapSpec, point, panel: int = 20, seed: int = 0) -> GeodesicMapAt:
    """Deformation tensor, transformed curvature and the invariance of b-cyclic Riemann sums.

    ``connection_residual`` compares the transformed Riemann tensor against the
    one computed directly from the shifted connection.
    """
    G = compute_geometry(gm.base, point)
    n = G.n
    Xj, Pj = _psi_jets(gm, G)
    X, P = Xj.value, Pj.value
    delta = np.eye(n)
    Rt = G.riemann_mixed + np.einsum("jm,kl->jklm", delta, P) - np.einsum("km,jl->jklm", delta, P)
    ric_t = np.einsum("kmlm->kl", Rt)
    ricci_res = relative(ric_t - (G.ricci_at - (n - 1) * P), G.ricci_scale + (n - 1) * fro(P))
    dX = G.cov_deriv(Xj, "d").value
    closed = relative(dX - dX.T, 2 * _deriv_scale(G, Xj))
    sym = relative(P - P.T, 2 * fro(P))

    gamma_t = G.gamma + jeinsum("ki,j->kij", delta, Xj) + jeinsum("kj,i->kij", delta, Xj)
    Rt_direct = riemann_from_connection(gamma_t).value
    conn = relative(Rt_direct - Rt, G.scale("riemann") + fro(Rt))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(panel):
        b = rng.standard_normal((n, n))
        b = b + b.T
        diff = cyclic_sum(b, Rt) - cyclic_sum(b, G.riemann_mixed)
        worst = max(worst, relative(diff, 3 * fro(b) * (fro(Rt) + G.scale("riemann"))))
    return GeodesicMapAt(G, X, P, Rt, ric_t, closed, sym, ricci_res, conn, worst)


@dataclass(frozen=True)
class WeylTransfer:
    commutator_ric: float
    commutator_P: float
    weyl_transfer_residual: float


def geodesic_map_weyl_transfer(gm: GeodesicMapSpec, b, point) -> WeylTransfer:
    """Compare b-cyclic Weyl sums before and after the map.

    The transformed side is assembled from the transformed Riemann and Ricci
    tensors through the Weyl/Riemann cyclic-sum identity, with indices moved by
    the original metric (the transformed metric is not available).
    """
    res = geodesic_map_deform(gm, point, panel=0)
    G = res.geometry
    b = _sym(b, G) if not isinstance(b, np.ndarray) else b
    n, g, gi = G.n, G.g_at, G.ginv_at

    def bracket(ric):
        A = np.einsum("im,jm->ij", b, ric @ gi)
        W = A - A.T
        return (np.einsum("kl,ij->ijkl", g, W) + np.einsum("il,jk->ijkl", g, W)
                + np.einsum("jl,ki->ijkl", g, W)) / (n - 2)

    def comm(t):
        A = b @ gi @ t
        return A - A.T

    c_side = cyclic_sum(b, G.weyl_mixed)
    t_side = cyclic_sum(b, res.riemann_tilde) + bracket(res.ricci_tilde)
    scale = 3 * fro(b) * (G.scale("weyl") + fro(res.riemann_tilde)) + 6 * fro(g) * fro(b) * fro(gi) * fro(res.ricci_tilde)
    return WeylTransfer(relative(comm(G.ricci_at), 2 * fro(b) * fro(gi) * G.ricci_scale),
                        relative(comm(res.P), 2 * fro(b) * fro(gi) * fro(res.P)),
                        relative(t_side - c_side, scale))
