"""Petrov type, Bel-Debever alignment and electric/magnetic parts of the Weyl tensor.

Frame conventions: a :class:`FrameAt` holds contravariant vectors ``e_a`` as
rows, ``e_0`` timelike, ``e_a . e_b = diag(-1, 1, 1, 1)``.  With the
volume form ``eps_0123 = +sqrt|det g|`` of the chart,

    E_ab = u^j u^m C_jabm
    H_ab = 1/2 u^j u^m eps_jars C^rs_bm

and the self-dual operator is ``Q = E + i H`` restricted to ``e_1..e_3``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

from .compat import SymmetricField, _sym, _vec, vector_compat_residual
from .errors import PreconditionError, SignatureError
from .geometry import GeometryAt
from .tensor import fro, levi_civita_symbol, relative

UNIT_TOL = 1e-9
NULL_TOL = 1e-10
TOL_CLASSIFY = 1e-7

PETROV_TYPES = ("I", "II", "D", "III", "N", "O")
_MIN_POLY = {"I": 3, "II": 3, "D": 2, "III": 3, "N": 2, "O": 1}


# --- frames ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrameAt:
    """Orthonormal frame; ``vectors[a]`` are the contravariant components of ``e_a``."""

    vectors: np.ndarray
    gram_residual: float

    @property
    def n(self) -> int:
        return len(self.vectors)

    def orientation(self) -> int:
        """+1 when the frame has the chart orientation."""
        return 1 if np.linalg.det(self.vectors) > 0 else -1

    def components(self, T: np.ndarray) -> np.ndarray:
        """Frame components of a fully covariant tensor."""
        out = T
        for _ in range(T.ndim):
            # contract the leading slot and rotate it to the back
            out = np.tensordot(out, self.vectors, axes=([0], [1]))
        return out

    def rotated(self, R: np.ndarray) -> "FrameAt":
        """Apply a rotation ``R`` (``(n-1) x (n-1)``) to ``e_1..e_{n-1}``."""
        V = self.vectors.copy()
        V[1:] = np.asarray(R, float) @ V[1:]
        return FrameAt(V, self.gram_residual)


def _lorentzian(G: GeometryAt) -> None:
    ev = np.linalg.eigvalsh(G.g_at)
    if int(np.sum(ev < 0)) != 1:
        raise SignatureError("a Lorentzian metric (one negative eigenvalue) is required")


def default_observer(G: GeometryAt) -> np.ndarray:
    """Unit timelike vector along the negative eigendirection of ``g_ab``, future-oriented in the
    sense that its largest component is positive."""
    _lorentzian(G)
    w, V = np.linalg.eigh(G.g_at)
    v = G.ginv_at @ V[:, 0]  # raise so that v is g-orthogonal to the other eigen-covectors
    v = v / np.sqrt(-float(v @ G.g_at @ v))
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def orthonormal_frame(G: GeometryAt, seed_timelike=None) -> FrameAt:
    """Gram-Schmidt starting from ``seed_timelike`` and then the coordinate vectors."""
    _lorentzian(G)
    g = G.g_at
    seed = default_observer(G) if seed_timelike is None else _vec(seed_timelike, G)[0]
    s2 = float(seed @ g @ seed)
    if not np.any(seed) or s2 >= -NULL_TOL * float(seed @ seed) * fro(g):
        raise PreconditionError("the seed vector is not timelike")
    vecs = [seed / np.sqrt(-s2)]
    signs = [-1.0]
    for i in range(G.n):
        v = np.eye(G.n)[i]
        for e, s in zip(vecs, signs):
            v = v - s * float(e @ g @ v) * e
        nv = float(v @ g @ v)
        if nv <= 1e-10 * float(v @ v + 1.0):
            if nv < -1e-10:
                raise PreconditionError("Gram-Schmidt met a non-spacelike remainder; reseed")
            continue
        vecs.append(v / np.sqrt(nv))
        signs.append(1.0)
        if len(vecs) == G.n:
            break
    if len(vecs) != G.n:
        raise PreconditionError("Gram-Schmidt broke down; choose another seed")
    V = np.array(vecs)
    eta = np.diag(signs)
    return FrameAt(V, fro(V @ g @ V.T - eta))


# --- electric and magnetic parts --------------------------------------------------------

def dual_weyl(G: GeometryAt) -> np.ndarray:
    """``C~_abcd = 1/2 eps_abrs C^rs_cd``."""
    if G.n != 4:
        raise PreconditionError("the dual Weyl tensor needs n = 4")
    eps = np.sqrt(abs(np.linalg.det(G.g_at))) * levi_civita_symbol(4)
    gi = G.ginv_at
    Cup = np.einsum("rp,sq,pqcd->rscd", gi, gi, G.weyl_lowered)
    return 0.5 * np.einsum("abrs,rscd->abcd", eps, Cup)


def _dual(eps, gi, X):
    Xup = np.einsum("rp,sq,pqcd->rscd", gi, gi, X)
    return 0.5 * np.einsum("abrs,rscd->abcd", eps, Xup)


def duality_residual(G: GeometryAt) -> float:
    """``|C~~ + C|`` relative to ``|C|``: the double dual is ``-C`` in Lorentzian signature."""
    eps = np.sqrt(abs(np.linalg.det(G.g_at))) * levi_civita_symbol(4)
    C = G.weyl_lowered
    dd = _dual(eps, G.ginv_at, _dual(eps, G.ginv_at, C))
    return relative(dd + C, 2 * G.scale("weyl", lowered=True))


@dataclass(frozen=True, eq=False)
class EHPair:
    """Electric and magnetic parts (covariant coordinate components).

    ``observer`` is the unit timelike ``u^a`` or ``None`` for the generalized
    form built from a symmetric ``T``.
    """

    E: np.ndarray
    H: np.ndarray
    observer: Optional[np.ndarray]
    T: Optional[np.ndarray]
    frame: Optional[FrameAt]
    scale: float

    @property
    def E_frame(self) -> np.ndarray:
        return self.frame.components(self.E)[1:, 1:]

    @property
    def H_frame(self) -> np.ndarray:
        return self.frame.components(self.H)[1:, 1:]

    def norms(self) -> Tuple[float, float]:
        """Relative sizes of ``E`` and ``H`` in the observer frame."""
        F = self.frame.components
        return fro(F(self.E)) / (self.scale + 1e-300), fro(F(self.H)) / (self.scale + 1e-300)

    def invariant_residuals(self, G: GeometryAt) -> Dict[str, float]:
        gi = G.ginv_at
        out = {}
        for name, X in (("E", self.E), ("H", self.H)):
            size = fro(X) + self.scale
            out[f"{name}_symmetry"] = relative(X - X.T, 2 * size)
            out[f"{name}_trace"] = abs(float(np.sum(gi * X))) / (fro(gi) * size + 1e-300)
            if self.observer is not None:
                out[f"{name}_orthogonality"] = relative(X @ self.observer, size * fro(self.observer))
        return out


def _observer_scale(G: GeometryAt, frame: FrameAt) -> float:
    return fro(frame.components(G.weyl_lowered)) + fro(frame.components(G.riemann_lowered))


def _check_n4(G: GeometryAt):
    if G.n != 4:
        raise PreconditionError("electric and magnetic parts need n = 4")


def _unit_timelike(u, G: GeometryAt) -> Tuple[np.ndarray, np.ndarray]:
    up, dn = _vec(u, G)
    u2 = float(up @ dn)
    if abs(u2 + 1.0) >= UNIT_TOL * max(1.0, float(up @ up)):
        raise PreconditionError(f"the observer must satisfy u.u = -1 (got {u2:.12g})")
    return up, dn


def electric_magnetic(G: GeometryAt, u=None) -> EHPair:
    """``E`` and ``H`` seen by the unit timelike observer ``u`` (default: the frame seed)."""
    _check_n4(G)
    if u is None:
        u = default_observer(G)
    up, _ = _unit_timelike(u, G)
    C = G.weyl_lowered
    E = np.einsum("j,m,jabm->ab", up, up, C)
    H = np.einsum("j,m,jabm->ab", up, up, dual_weyl(G))
    frame = orthonormal_frame(G, up)
    return EHPair(E, H, up, None, frame, _observer_scale(G, frame))


def generalized_eh(G: GeometryAt, T) -> EHPair:
    """``E_ab = T^jm C_jabm``, ``H_ab = T^jm C~_jabm`` for a covariant symmetric ``T``."""
    _check_n4(G)
    T = _sym(T, G)
    gi = G.ginv_at
    Tup = gi @ T @ gi
    E = np.einsum("jm,jabm->ab", Tup, G.weyl_lowered)
    H = np.einsum("jm,jabm->ab", Tup, dual_weyl(G))
    frame = orthonormal_frame(G)
    scale = (fro(G.weyl_lowered) + fro(G.riemann_lowered)) * fro(Tup)
    return EHPair(E, H, None, T, frame, scale)


def eh_commutator_residual(pair: EHPair, G: GeometryAt) -> float:
    """``E_a^m T_mb - T_a^m E_mb`` relative; ``T`` is the generalized-pair tensor."""
    if pair.T is None:
        raise ValueError("the pair was not built from a tensor T")
    gi = G.ginv_at
    A = pair.E @ gi @ pair.T
    B = pair.T @ gi @ pair.E
    return relative(A - B, 2 * fro(pair.E) * fro(gi) * fro(pair.T) + pair.scale * fro(gi) * fro(pair.T))


def h_equals_weyl_compat(G: GeometryAt, u=None) -> Tuple[float, float]:
    """``(relative |H|, Weyl vector-compatibility residual)``; they vanish together."""
    pair = electric_magnetic(G, u)
    return pair.norms()[1], vector_compat_residual(pair.observer, G, "weyl")


def weyl_from_eh(E3: np.ndarray, H3: np.ndarray, orientation: int = 1) -> np.ndarray:
    """Frame components ``C_abcd`` rebuilt from spatial ``E_ij``, ``H_ij``."""
    E3, H3 = np.asarray(E3, float), np.asarray(H3, float)
    C = np.zeros((4, 4, 4, 4))
    d = np.eye(3)
    eps3 = levi_civita_symbol(3)
    sp = (np.einsum("ik,jl->ijkl", E3, d) - np.einsum("il,jk->ijkl", E3, d)
          + np.einsum("jl,ik->ijkl", E3, d) - np.einsum("jk,il->ijkl", E3, d))
    C[1:, 1:, 1:, 1:] = -sp
    C[0, 1:, 0, 1:] = -E3
    C[1:, 0, 1:, 0] = -E3
    C[0, 1:, 1:, 0] = E3
    C[1:, 0, 0, 1:] = E3
    M = orientation * np.einsum("klm,mj->klj", eps3, H3)  # C_klj0
    C[1:, 1:, 1:, 0] = M
    C[1:, 1:, 0, 1:] = -M
    C[1:, 0, 1:, 1:] = np.transpose(M, (2, 0, 1))  # C_j0kl = C_klj0
    C[0, 1:, 1:, 1:] = -np.transpose(M, (2, 0, 1))
    return C


def eh_reconstruction_residual(G: GeometryAt, u=None) -> float:
    """Mismatch between ``C`` and the tensor rebuilt from ``(E, H)`` in the ``u``-frame."""
    pair = electric_magnetic(G, u)
    Cf = pair.frame.components(G.weyl_lowered)
    rebuilt = weyl_from_eh(pair.E_frame, pair.H_frame, pair.frame.orientation())
    return relative(Cf - rebuilt, pair.scale)


# --- Petrov type ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PetrovReport:
    eigenvalues: Tuple[complex, complex, complex]
    petrov_type: str
    degeneracy_tol: float
    minimal_poly_degree: int
    invariants: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
                "petrov_type": self.petrov_type,
                "degeneracy_tol": self.degeneracy_tol,
                "minimal_poly_degree": self.minimal_poly_degree,
                "invariants": dict(self.invariants)}


def _cubic_roots(p: complex, q: complex) -> List[complex]:
    """Roots of ``x^3 + p x + q`` by Cardano, refined by two Newton steps."""
    disc = np.sqrt(complex(q * q / 4 + p ** 3 / 27))
    a, b = -q / 2 + disc, -q / 2 - disc
    c = (a if abs(a) >= abs(b) else b) ** (1.0 / 3.0) if max(abs(a), abs(b)) > 0 else 0.0
    w = np.exp(2j * np.pi / 3)
    if c == 0:
        roots = [0j, 0j, 0j]
    else:
        roots = [w ** k * c - p / (3 * w ** k * c) for k in range(3)]
    out = []
    for x in roots:
        for _ in range(2):
            d = 3 * x * x + p
            if abs(d) < 1e-12:
                break
            x = x - (x ** 3 + p * x + q) / d
        out.append(complex(x))
    return out


def _sorted(vals) -> Tuple[complex, ...]:
    return tuple(sorted((complex(v) for v in vals), key=lambda z: (round(z.real, 12), round(z.imag, 12))))


def classify_q(Q: np.ndarray, scale: Optional[float] = None, tol: float = TOL_CLASSIFY) -> PetrovReport:
    """Petrov type of a complex symmetric traceless 3x3 ``Q``.

    Degeneracy is judged on the normalized invariants ``p = -tr(Q^2)/2``,
    ``q = -det Q`` of ``Q / |Q|``: nilpotent when both vanish, a repeated root
    when the discriminant ``4 p^3 + 27 q^2`` vanishes.  Diagonalizability
    is then decided from the minimal polynomial candidates.
    """
    Q = np.asarray(Q, dtype=complex)
    s = fro(Q)
    ref = s if scale is None else scale
    if s <= tol * ref or s == 0.0:
        return PetrovReport((0j, 0j, 0j), "O", tol, 1, {"norm": s / (ref + 1e-300)})
    Qh = Q / s
    I3 = np.eye(3)
    p = -np.trace(Qh @ Qh) / 2
    q = -np.linalg.det(Qh)
    disc = 4 * p ** 3 + 27 * q ** 2
    inv = {"norm": s / (ref + 1e-300), "abs_p": abs(p), "abs_q": abs(q), "abs_discriminant": abs(disc)}
    if abs(p) < tol and abs(q) < tol:
        sq = fro(Qh @ Qh)
        inv["q_squared"] = sq
        kind = "N" if sq < tol else "III"
        eig = (0j, 0j, 0j)
    elif abs(disc) < tol:
        ld, ls = -3 * q / (2 * p), 3 * q / p
        prod = fro((Qh - ld * I3) @ (Qh - ls * I3))
        inv["min_poly_residual"] = prod
        kind = "D" if prod < tol else "II"
        eig = _sorted([ld * s, ld * s, ls * s])
    else:
        kind = "I"
        eig = _sorted([z * s for z in _cubic_roots(p, q)])
    return PetrovReport(eig, kind, tol, _MIN_POLY[kind], inv)


def q_matrix(G: GeometryAt, frame: Optional[FrameAt] = None) -> Tuple[np.ndarray, float]:
    """``(E + i H)`` on ``e_1..e_3`` of ``frame`` and the frame curvature scale."""
    _check_n4(G)
    frame = orthonormal_frame(G) if frame is None else frame
    pair = electric_magnetic(G, frame.vectors[0])
    F = frame.components
    Q = F(pair.E)[1:, 1:] + 1j * F(pair.H)[1:, 1:]
    return Q, fro(F(G.weyl_lowered)) + fro(F(G.riemann_lowered))


def petrov_type(G: GeometryAt, frame: Optional[FrameAt] = None, tol: float = TOL_CLASSIFY) -> PetrovReport:
    _lorentzian(G)
    Q, scale = q_matrix(G, frame)
    return classify_q(Q, scale, tol)


# --- Bel-Debever chain --------------------------------------------------------------------

BEL_DEBEVER_LEVELS = ("O", "N", "III", "II/D", "I")


class BelDebever(NamedTuple):
    res_I: float
    res_IID: float
    res_III: float
    res_N: float
    res_O: float
    level: str

    def to_dict(self) -> dict:
        return {"res_I": self.res_I, "res_IID": self.res_IID, "res_III": self.res_III,
                "res_N": self.res_N, "res_O": self.res_O, "level": self.level}


def _null(k, G: GeometryAt) -> Tuple[np.ndarray, np.ndarray]:
    up, dn = _vec(k, G)
    if not np.any(up) or abs(float(up @ dn)) >= NULL_TOL * fro(up) * fro(dn):
        raise PreconditionError("k must be a nonzero null vector")
    return up, dn


def _iid_tensor(C: np.ndarray, up, dn) -> np.ndarray:
    M = np.einsum("arsq,r,s->aq", C, up, up)
    return np.einsum("b,aq->baq", dn, M) - np.einsum("a,bq->baq", dn, M)


def bel_debever(G: GeometryAt, k, tol: float = 1e-9) -> BelDebever:
    """Residuals of the alignment conditions for a null ``k^a``, each scale-invariant in ``k``."""
    up, dn = _null(k, G)
    C = G.weyl_lowered
    ws = G.scale("weyl", lowered=True)
    nu, nd = fro(up), fro(dn)
    Nk = np.einsum("arsq,r->asq", C, up)
    T3 = np.einsum("b,asq->basq", dn, Nk) - np.einsum("a,bsq->basq", dn, Nk)
    T2 = _iid_tensor(C, up, dn)
    T1 = np.einsum("baq,n->baqn", T2, dn) - np.einsum("ban,q->baqn", T2, dn)
    res = {
        "O": relative(C, ws),
        "N": relative(Nk, ws * nu),
        "III": relative(T3, 2 * ws * nd * nu),
        "II/D": relative(T2, 2 * ws * nd * nu ** 2),
        "I": relative(T1, 4 * ws * nd ** 2 * nu ** 2),
    }
    level = next((lv for lv in BEL_DEBEVER_LEVELS if res[lv] < tol), "none")
    return BelDebever(res["I"], res["II/D"], res["III"], res["N"], res["O"], level)


def special_via_compat(G: GeometryAt, k) -> Tuple[float, float]:
    """``(Weyl vector-compatibility residual, type II/D residual)`` for a null ``k``."""
    _null(k, G)
    return vector_compat_residual(k, G, "weyl"), bel_debever(G, k).res_IID


def type_iii_permutable_pair(G: GeometryAt, k) -> Tuple[float, float]:
    """``(type III residual, Weyl-permutability residual)`` for a null ``k``."""
    up, dn = _null(k, G)
    perm = _permutability(G, up, dn)
    return bel_debever(G, k).res_III, perm


def _permutability(G: GeometryAt, up, dn) -> float:
    Cu = np.einsum("klim,m->kli", G.weyl_mixed, dn)
    P = np.einsum("kli,j->klij", Cu, dn)
    return relative(P - np.swapaxes(P, 2, 3), 2 * G.scale("weyl") * fro(dn) ** 2)


def weyl_permutable_flat_check(G: GeometryAt, u) -> Tuple[float, float]:
    """``(Weyl-permutability residual of u, |C| relative to |C| + |R|)``."""
    _check_n4(G)
    up, dn = _vec(u, G)
    if not np.any(up) or abs(float(up @ dn)) <= NULL_TOL * fro(up) * fro(dn):
        raise PreconditionError("u must be non-null")
    return _permutability(G, up, dn), relative(G.weyl_mixed, G.scale("weyl"))


# --- principal null directions ----------------------------------------------------------------

@dataclass(frozen=True)
class NullDirection:
    k: np.ndarray  # contravariant components
    direction: Tuple[float, ...]  # unit spatial direction in the frame
    residual: float


def _lattice() -> List[np.ndarray]:
    return [np.array(v, float) for v in itertools.product((-1, 0, 1), repeat=3) if any(v)]


def principal_null_directions(G: GeometryAt, frame: Optional[FrameAt] = None, condition: str = "IID",
                              tol: float = 1e-9, dedupe: float = 1e-3) -> List[NullDirection]:
    """Null ``k = e_0 + n`` minimizing a Bel-Debever residual, multi-started on a lattice.

    ``condition`` is ``"IID"`` (repeated principal directions) or ``"I"``.
    Returns only directions whose residual is below ``tol``, ordered by
    (residual, direction).
    """
    _check_n4(G)
    frame = orthonormal_frame(G) if frame is None else frame
    C = G.weyl_lowered
    g = G.g_at
    ws = G.scale("weyl", lowered=True)
    if fro(C) <= tol * ws:
        return []
    e0, spatial = frame.vectors[0], frame.vectors[1:]

    def k_of(v):
        n = v / np.linalg.norm(v)
        return e0 + n @ spatial, n

    def fun(v):
        up, _ = k_of(v)
        dn = g @ up
        T = _iid_tensor(C, up, dn)
        if condition == "I":
            T = np.einsum("baq,n->baqn", T, dn) - np.einsum("ban,q->baqn", T, dn)
            return T.ravel() / (4 * ws * fro(dn) ** 2 * fro(up) ** 2)
        return T.ravel() / (2 * ws * fro(dn) * fro(up) ** 2)

    hits: List[NullDirection] = []
    for start in _lattice():
        sol = least_squares(fun, start, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        res = fro(fun(sol.x))
        if res < tol:
            up, n = k_of(sol.x)
            hits.append(NullDirection(up, tuple(float(x) for x in n), res))
    # Minima of degenerate directions are shallow valleys; keep the best point of each cluster.
    hits.sort(key=lambda f: (f.residual, f.direction))
    found: List[NullDirection] = []
    for h in hits:
        if all(np.linalg.norm(np.subtract(h.direction, f.direction)) >= dedupe for f in found):
            found.append(h)
    return sorted(found, key=lambda f: (round(f.residual, 14), tuple(round(x, 9) for x in f.direction)))
