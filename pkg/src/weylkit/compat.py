"""Compatibility, permutability and related identity residuals.

Notation: ``K`` is a generalized curvature tensor held in mixed form
``K[j, k, l, m] = K_jkl^m`` (the Riemann or the Weyl tensor of a
:class:`~weylkit.geometry.GeometryAt`).  A symmetric tensor ``b`` is
K-compatible when the cyclic sum

    b_im K_jkl^m + b_jm K_kil^m + b_km K_ijl^m

vanishes.  Every residual is relative to the size of its operands.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import PreconditionError
from .geometry import GeometryAt, derivative_scale, field_jet
from .taylor import Jet
from .tensor import fro, relative

NULL_TOL = 1e-10


# --- field types ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SymmetricField:
    """Covariant symmetric ``b_ij`` given by expressions or numbers.

    ``pointwise=True`` marks components known only at a single point; such a
    field cannot be differentiated.
    """

    components: tuple
    description: str = ""
    pointwise: bool = False

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.components)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("a symmetric field needs a square table of components")
        for i in range(n):
            for j in range(i + 1, n):
                a, b = rows[i][j], rows[j][i]
                if _is_number(a) and _is_number(b):
                    if float(a) != float(b):
                        raise ValueError(f"entries ({i},{j}) and ({j},{i}) differ")
                elif str(a).replace(" ", "") != str(b).replace(" ", ""):
                    raise ValueError(f"entries ({i},{j}) and ({j},{i}) differ")
        object.__setattr__(self, "components", rows)

    @classmethod
    def from_values(cls, values, description: str = "") -> "SymmetricField":
        v = np.asarray(values, dtype=float)
        v = 0.5 * (v + v.T)
        return cls(tuple(tuple(float(x) for x in r) for r in v), description, pointwise=True)

    @property
    def dim(self) -> int:
        return len(self.components)

    def jet(self, G: GeometryAt) -> Jet:
        if self.pointwise:
            raise PreconditionError("field is known only at a point and cannot be differentiated")
        return field_jet(self.components, G)

    def at(self, G: GeometryAt) -> np.ndarray:
        if self.dim != G.n:
            raise ValueError("field and metric dimensions differ")
        if self.pointwise or all(_is_number(x) for r in self.components for x in r):
            return np.array(self.components, dtype=float)
        return field_jet(self.components, G, order=0).value


@dataclass(frozen=True, eq=False)
class VectorField:
    """A vector field; ``lower`` says whether the components are ``u_i`` or ``u^i``."""

    components: tuple
    lower: bool = False
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def jet(self, G: GeometryAt) -> Jet:
        return field_jet(list(self.components), G)

    def _raw(self, G: GeometryAt) -> np.ndarray:
        if all(_is_number(x) for x in self.components):
            return np.array(self.components, dtype=float)
        return field_jet(list(self.components), G, order=0).value

    def upper(self, G: GeometryAt) -> np.ndarray:
        raw = self._raw(G)
        return G.ginv_at @ raw if self.lower else raw

    def lower_at(self, G: GeometryAt) -> np.ndarray:
        raw = self._raw(G)
        return raw if self.lower else G.g_at @ raw

    def causal_character(self, G: GeometryAt) -> str:
        return causal_character(self.upper(G), G)


def _is_number(x) -> bool:
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def causal_character(u_up, G: GeometryAt) -> str:
    u_up = np.asarray(u_up, dtype=float)
    u2 = float(u_up @ G.g_at @ u_up)
    if abs(u2) < NULL_TOL * float(u_up @ u_up) or not np.any(u_up):
        return "null"
    return "timelike" if u2 < 0 else "spacelike"


def _sym(b, G: GeometryAt) -> np.ndarray:
    if isinstance(b, SymmetricField):
        return b.at(G)
    if isinstance(b, Jet):
        return b.value
    return np.asarray(b, dtype=float)


def _vec(u, G: GeometryAt) -> Tuple[np.ndarray, np.ndarray]:
    """``(u^a, u_a)`` from a VectorField or a contravariant component array."""
    if isinstance(u, VectorField):
        return u.upper(G), u.lower_at(G)
    up = np.asarray(u, dtype=float)
    return up, G.g_at @ up


def _curv(G: GeometryAt, which: str) -> Tuple[np.ndarray, float]:
    which = which.lower()
    if which not in ("riemann", "weyl"):
        raise ValueError(f"which must be 'riemann' or 'weyl', got {which!r}")
    return G.curvature(which), G.scale(which)


# --- cyclic sums ---------------------------------------------------------------------

def cyclic_sum(b: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``b_im K_jkl^m + b_jm K_kil^m + b_km K_ijl^m`` indexed ``[i, j, k, l]``."""
    T = np.einsum("im,jklm->ijkl", b, K)
    return T + np.einsum("jkil->ijkl", T) + np.einsum("kijl->ijkl", T)


def compat_residual_with(b: np.ndarray, K: np.ndarray, k_scale: Optional[float] = None) -> float:
    k_scale = fro(K) if k_scale is None else k_scale
    return relative(cyclic_sum(b, K), 3 * fro(b) * k_scale)


def riemann_compat_residual(b, G: GeometryAt) -> float:
    b = _sym(b, G)
    return compat_residual_with(b, G.riemann_mixed, G.scale("riemann"))


def weyl_compat_residual(b, G: GeometryAt) -> float:
    b = _sym(b, G)
    return compat_residual_with(b, G.weyl_mixed, G.scale("weyl"))


def ricci_commutator(b, G: GeometryAt) -> np.ndarray:
    """``b_am R_b^m - b_bm R_a^m``."""
    b = _sym(b, G)
    A = b @ G.ricci_mixed.T
    return A - A.T


def ricci_commutator_norm(b, G: GeometryAt) -> float:
    b = _sym(b, G)
    return relative(ricci_commutator(b, G), 2 * fro(b) * G.ricci_scale)


def bridge_identity_residual(b, G: GeometryAt) -> float:
    """Residual of the identity linking the Weyl and Riemann cyclic sums of any symmetric ``b``."""
    b = _sym(b, G)
    n = G.n
    g = G.g_at
    lhs = cyclic_sum(b, G.weyl_mixed)
    A = np.einsum("im,jm->ij", b, G.ricci_mixed)
    W = A - A.T
    bracket = (np.einsum("kl,ij->ijkl", g, W) + np.einsum("il,jk->ijkl", g, W)
               + np.einsum("jl,ki->ijkl", g, W))
    rhs = cyclic_sum(b, G.riemann_mixed) + bracket / (n - 2)
    scale = 3 * fro(b) * (G.scale("weyl") + G.scale("riemann")) + 6 * fro(g) * fro(b) * G.ricci_scale / (n - 2)
    return relative(lhs - rhs, scale)


# --- derivative identities ---------------------------------------------------------------

_deriv_scale = derivative_scale


def codazzi_deviation(b, G: GeometryAt) -> np.ndarray:
    """``nabla_i b_jk - nabla_j b_ik`` indexed ``[i, j, k]``."""
    jet = b if isinstance(b, Jet) else (b.jet(G) if isinstance(b, SymmetricField) else None)
    if jet is None:
        raise PreconditionError("the Codazzi deviation needs a differentiable field, not point values")
    nb = G.cov_deriv(jet, "dd").value
    return nb - np.swapaxes(nb, 0, 1)


def codazzi_deviation_residual(b, G: GeometryAt) -> float:
    jet = b if isinstance(b, Jet) else b.jet(G)
    return relative(codazzi_deviation(jet, G), 2 * _deriv_scale(G, jet))


def lovelock_residual(G: GeometryAt) -> float:
    """Second-derivative identity: the Ricci cyclic sum equals minus the cyclic derivative of div R."""
    div = G.riemann_div
    X = G.cov_deriv(div, "ddd").value  # X[a, b, c, d] = nabla_a nabla_m R_bcd^m
    lhs = -(X + np.einsum("bcad->abcd", X) + np.einsum("cabd->abcd", X))
    rhs = cyclic_sum(G.ricci_at, G.riemann_mixed)
    scale = 3 * _deriv_scale(G, div) + 3 * _deriv_scale(G, G.nabla_riemann) \
        + 3 * fro(G.ricci_at) * G.scale("riemann")
    return relative(lhs - rhs, scale)


def dpi_residual(G: GeometryAt) -> float:
    """Cyclic derivative of ``nabla_m C_jkl^m`` against ``-8 pi (n-3)/(n-2)`` times the T-Weyl cyclic sum.

    ``T`` is defined from the metric through Einstein's equation.
    """
    n = G.n
    div = G.weyl_div
    X = G.cov_deriv(div, "ddd").value
    lhs = X + np.einsum("jkil->ijkl", X) + np.einsum("kijl->ijkl", X)
    T8pi = G.ricci_at - 0.5 * G.scalar_at * G.g_at
    c = (n - 3) / (n - 2)
    rhs = -c * cyclic_sum(T8pi, G.weyl_mixed)
    scale = 3 * _deriv_scale(G, div) + 3 * _deriv_scale(G, G.nabla_weyl) \
        + 3 * c * (G.ricci_scale + abs(G.scalar_at) * fro(G.g_at)) * G.scale("weyl")
    return relative(lhs - rhs, scale)


# --- permutability --------------------------------------------------------------------

PERMUTABLE, SKEW, ANNIHILATING, NONE = "permutable", "skew", "annihilating", "none"


def permutability_residuals(b, G: GeometryAt, which: str = "riemann") -> Dict[str, float]:
    b = _sym(b, G)
    K, ks = _curv(G, which)
    bK = np.einsum("im,jklm->ijkl", b, K)
    P = np.einsum("ljki->ijkl", bK)  # b_lm K_jki^m
    scale = fro(b) * ks
    return {ANNIHILATING: relative(bK, scale),
            PERMUTABLE: relative(bK - P, 2 * scale),
            SKEW: relative(bK + P, 2 * scale)}


def permutability_class(b, G: GeometryAt, which: str = "riemann", tol: float = 1e-9) -> str:
    """``annihilating`` (b K = 0), then ``permutable`` (omega = +1), then ``skew`` (omega = -1)."""
    res = permutability_residuals(b, G, which)
    for cls in (ANNIHILATING, PERMUTABLE, SKEW):
        if res[cls] < tol:
            return cls
    return NONE


# --- vectors ---------------------------------------------------------------------------

def vector_compat_residual(u, G: GeometryAt, which: str = "weyl") -> float:
    up, dn = _vec(u, G)
    K, ks = _curv(G, which)
    return relative(cyclic_sum(np.outer(dn, dn), K), 3 * fro(dn) ** 2 * ks)


def vector_bridge_residual(u, G: GeometryAt) -> float:
    """Vector restatement of the Weyl/Riemann cyclic-sum identity, for ``b = u u``."""
    up, dn = _vec(u, G)
    n, g = G.n, G.g_at
    b = np.outer(dn, dn)
    v = G.ricci_at @ up
    w = np.outer(dn, v) - np.outer(v, dn)
    bracket = (np.einsum("cl,ab->abcl", g, w) + np.einsum("al,bc->abcl", g, w)
               + np.einsum("bl,ca->abcl", g, w))
    res = cyclic_sum(b, G.weyl_mixed) - cyclic_sum(b, G.riemann_mixed) - bracket / (n - 2)
    scale = 3 * fro(b) * (G.scale("weyl") + G.scale("riemann")) \
        + 6 * fro(g) * fro(dn) ** 2 * G.ricci_scale / (n - 2)
    return relative(res, scale)


def vector_ricci_condition(u, G: GeometryAt) -> float:
    """``u_[a R_b]^m u_m`` relative."""
    up, dn = _vec(u, G)
    v = G.ricci_at @ up
    w = np.outer(dn, v) - np.outer(v, dn)
    return relative(w, 2 * fro(dn) ** 2 * G.ricci_scale)


class DTensor(NamedTuple):
    D: np.ndarray
    reconstruction_residual: float
    eigen_residual: float
    eigenvalue: float


def d_tensor(u, G: GeometryAt, which: str = "weyl") -> DTensor:
    """``D_ac = K_aicm u^i u^m / u^2`` and the residual of ``K_abcm u^m = D_ac u_b - D_bc u_a``."""
    up, dn = _vec(u, G)
    u2 = float(up @ dn)
    if abs(u2) <= NULL_TOL * fro(up) * fro(dn) or not np.any(up):
        raise PreconditionError("the D-tensor needs a non-null vector")
    K, ks = _curv(G, which)
    Kl = G.curvature(which, lowered=True)
    D = np.einsum("aicm,i,m->ac", Kl, up, up) / u2
    D = 0.5 * (D + D.T)
    lhs = np.einsum("abcm,m->abc", Kl, up)
    rhs = np.einsum("ac,b->abc", D, dn) - np.einsum("bc,a->abc", D, dn)
    kls = G.scale(which, lowered=True)
    recon = relative(lhs - rhs, kls * fro(up) + 2 * fro(D) * fro(dn))
    lam = float(up @ D @ up) / u2
    eig = relative(D @ up - lam * dn, fro(D) * fro(up) + abs(lam) * fro(dn))
    return DTensor(D, recon, eig, lam)


@dataclass(frozen=True)
class DerdzinskiShenResult:
    max_contraction: float
    triples: int
    vacuous: bool
    skipped_complex: int


def _real_eigenpairs(mat: np.ndarray):
    w, V = np.linalg.eig(mat)
    pairs, skipped = [], 0
    scale = max(1.0, float(np.max(np.abs(w))))
    for i in range(len(w)):
        if abs(w[i].imag) > 1e-9 * scale:
            skipped += 1
            continue
        v = np.real(V[:, i])
        pairs.append((float(w[i].real), v / np.linalg.norm(v)))
    return pairs, skipped


def derdzinski_shen_check(b, G: GeometryAt, which: str = "weyl", gap: float = 1e-6) -> DerdzinskiShenResult:
    """Largest ``|K_abcd X^a Y^b Z^c|`` over eigenvector triples with ``nu != lambda, mu``."""
    b = _sym(b, G)
    pairs, skipped = _real_eigenpairs(G.ginv_at @ b)
    Kl = G.curvature(which, lowered=True)
    ks = G.scale(which, lowered=True)
    lam_scale = max(1e-300, max((abs(l) for l, _ in pairs), default=0.0))
    worst, count = 0.0, 0
    for (l1, X), (l2, Y), (l3, Z) in itertools.product(pairs, repeat=3):
        if abs(l3 - l1) <= gap * lam_scale or abs(l3 - l2) <= gap * lam_scale:
            continue
        count += 1
        val = np.einsum("abcd,a,b,c->d", Kl, X, Y, Z)
        worst = max(worst, fro(val) / (ks + 1e-300))
    return DerdzinskiShenResult(worst, count, count == 0, skipped)


def derdzinski_shen_vector(u, v, w, G: GeometryAt, which: str = "weyl") -> float:
    """``K_abcd w^a v^b u^c`` relative, for ``v, w`` orthogonal to a compatible ``u``."""
    up, dn = _vec(u, G)
    v, w = np.asarray(v, float), np.asarray(w, float)
    Kl = G.curvature(which, lowered=True)
    val = np.einsum("abcd,a,b,c->d", Kl, w, v, up)
    return relative(val, G.scale(which, lowered=True) * fro(w) * fro(v) * fro(up))


class HallResiduals(NamedTuple):
    res_A: float
    res_B: float
    res_C: float


def _hall_term(Kl: np.ndarray, up, dn, u2) -> np.ndarray:
    Y = np.einsum("bclm,c,m->bl", Kl, up, up)
    return np.einsum("a,bl->abl", dn, Y) - np.einsum("b,al->abl", dn, Y) + u2 * np.einsum("ablm,m->abl", Kl, up)


def hall_conditions(u, G: GeometryAt) -> HallResiduals:
    """Residuals of conditions A (Riemann), B (Weyl) and C (Ricci) for ``u``."""
    up, dn = _vec(u, G)
    u2 = float(up @ dn)
    nu, nd = fro(up), fro(dn)
    weight = 2 * nd * nu ** 2 + abs(u2) * nu
    A = relative(_hall_term(G.riemann_lowered, up, dn, u2), weight * G.scale("riemann", lowered=True))
    B = relative(_hall_term(G.weyl_lowered, up, dn, u2), weight * G.scale("weyl", lowered=True))
    return HallResiduals(A, B, vector_ricci_condition(u, G))


@dataclass(frozen=True)
class PurenessPair:
    a: int
    b: int
    lam: float
    residual: float


def pureness_check(G: GeometryAt, basis, tol: float = 1e-9) -> List[PurenessPair]:
    """Least-squares ``lambda_ab`` with ``R_ij^kl X(a)^i ^ X(b)^j = lambda_ab X(a)^k ^ X(b)^l``."""
    X = np.asarray(basis, dtype=float)
    gram = X @ G.g_at @ X.T
    if X.shape != (G.n, G.n) or fro(np.abs(gram) - np.eye(G.n)) > tol * G.n \
            or fro(gram - np.diag(np.diag(gram))) > tol * G.n:
        raise PreconditionError("basis is not orthonormal")
    Rup = np.einsum("ijmn,mk,nl->ijkl", G.riemann_lowered, G.ginv_at, G.ginv_at)
    out = []
    for a, b in itertools.combinations(range(G.n), 2):
        W = np.outer(X[a], X[b]) - np.outer(X[b], X[a])
        M = np.einsum("ijkl,ij->kl", Rup, W)
        lam = float(np.sum(M * W) / np.sum(W * W))
        out.append(PurenessPair(a, b, lam, relative(M - lam * W, fro(Rup) * fro(W))))
    return out


def concircular_residual(u, A: float, B: float, G: GeometryAt) -> Tuple[float, float]:
    """Residuals of ``nabla_k u_l = A g_kl + B u_k u_l`` and of the curvature relation it implies.

    Under the commutator convention used here the implied relation reads
    ``R_jkl^m u_m = A B (u_k g_jl - u_j g_kl)``.
    """
    if isinstance(u, VectorField):
        jet = u.jet(G)
        if not u.lower:
            jet = _lower_jet(jet, G)
    else:
        jet = u
    g = G.g_at
    ul = jet.value
    nu = G.cov_deriv(jet, "d").value
    d_res = relative(nu - A * g - B * np.outer(ul, ul),
                     fro(jet.grad().value) + fro(G.gamma_at) * fro(ul) + abs(A) * fro(g) + abs(B) * fro(ul) ** 2)
    lhs = np.einsum("jklm,m->jkl", G.riemann_mixed, ul)
    rhs = A * B * (np.einsum("k,jl->jkl", ul, g) - np.einsum("j,kl->jkl", ul, g))
    c_res = relative(lhs - rhs, G.scale("riemann") * fro(ul) + 2 * abs(A * B) * fro(ul) * fro(g))
    return d_res, c_res


def _lower_jet(jet: Jet, G: GeometryAt) -> Jet:
    from .taylor import jeinsum
    return jeinsum("ab,b->a", G.g, jet)


def parallel_solution_check(x, G: GeometryAt) -> float:
    """``R_abc^m x_dm + R_abd^m x_cm`` relative."""
    x = _sym(x, G)
    T = np.einsum("abcm,dm->abcd", G.riemann_mixed, x)
    return relative(T + np.swapaxes(T, 2, 3), 2 * fro(x) * G.scale("riemann"))


# --- report ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CompatReport:
    residual_riemann: float
    residual_weyl: float
    ricci_commutator_norm: float
    permutability_class: str
    tolerance: float
    verdicts: Dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"residual_riemann": self.residual_riemann, "residual_weyl": self.residual_weyl,
                "ricci_commutator_norm": self.ricci_commutator_norm,
                "permutability_class": self.permutability_class,
                "tolerance": self.tolerance, "verdicts": dict(self.verdicts)}


def compat_report(b, G: GeometryAt, tol: float = 1e-9, which: str = "riemann") -> CompatReport:
    rr = riemann_compat_residual(b, G)
    rw = weyl_compat_residual(b, G) if G.n >= 3 else float("nan")
    rc = ricci_commutator_norm(b, G)
    pc = permutability_class(b, G, which, tol)
    verdicts = {"riemann_compatible": rr < tol, "weyl_compatible": rw < tol,
                "commutes_with_ricci": rc < tol}
    return CompatReport(rr, rw, rc, pc, tol, verdicts)
