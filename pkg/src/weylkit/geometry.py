"""Curvature of a coordinate metric at a point.

Sign conventions (see ``docs/conventions.md``)::

    Gamma^k_ij  = 1/2 g^km (d_i g_jm + d_j g_im - d_m g_ij)
    [nabla_a, nabla_b] u_c = R_abc^m u_m
    R_abc^m     = -d_a Gamma^m_bc + d_b Gamma^m_ac + Gamma^k_ac Gamma^m_bk - Gamma^k_bc Gamma^m_ak
    R_abcd      = R_abc^m g_md
    R_ab        = R_amb^m
    C_jkl^m     = R_jkl^m + (d_[j^m R_k]l + R_[j^m g_k]l)/(n-2) - R d_[j^m g_k]l/((n-1)(n-2))

with the unhalved bracket ``X_[ab] = X_ab - X_ba``.  All curvature objects
are held as Taylor jets around the point, so covariant derivatives of them
are exact up to the jet order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import taylor
from .errors import DegenerateMetricError, EvalError, SignatureError
from .expr import CONSTANTS, FUNCTIONS, Expression, as_expression, eval_taylor, evaluate, identifiers, to_string
from .taylor import Jet, jeinsum
from .tensor import DenseTensor, MetricAt, fro, relative

DEFAULT_ORDER = 4


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """A chart: coordinate names, parameter values and the metric components.

    ``components`` maps ``(i, j)`` with ``i <= j`` to an expression; missing
    entries are zero.
    """

    name: str
    coords: Tuple[str, ...]
    params: Dict[str, float]
    components: Dict[Tuple[int, int], Expression]
    expected_signature: Optional[Tuple[int, int]] = None
    sample_ranges: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "params", {k: float(v) for k, v in self.params.items()})
        n = len(coords)
        if len(set(coords)) != n:
            raise ValueError(f"duplicate coordinate names in {coords}")
        reserved = set(FUNCTIONS) | set(CONSTANTS)
        for name in list(coords) + list(self.params):
            if name in reserved:
                raise ValueError(f"{name!r} is a reserved word")
        if set(coords) & set(self.params):
            raise ValueError("coordinates and parameters must not share names")
        comps = {}
        for (i, j), e in self.components.items():
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"component ({i}, {j}) outside dimension {n}")
            key = (min(i, j), max(i, j))
            e = as_expression(e)
            if key in comps and to_string(comps[key]) != to_string(e):
                raise ValueError(f"conflicting entries for g {key[0]} {key[1]}")
            comps[key] = e
            unknown = identifiers(e) - set(coords) - set(self.params)
            if unknown:
                raise EvalError(f"g {key[0]} {key[1]}: unresolved identifiers {sorted(unknown)}")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def from_matrix(cls, name, coords, matrix, params=None, signature=None, sample_ranges=None):
        comps = {}
        n = len(coords)
        for i in range(n):
            for j in range(i, n):
                e = matrix[i][j]
                if e is None or (isinstance(e, (int, float)) and e == 0):
                    continue
                comps[(i, j)] = e
        return cls(name, tuple(coords), dict(params or {}), comps, signature, dict(sample_ranges or {}))

    def with_params(self, **params) -> "MetricSpec":
        new = dict(self.params)
        new.update(params)
        return MetricSpec(self.name, self.coords, new, self.components, self.expected_signature,
                          self.sample_ranges)

    def point_map(self, point) -> Dict[str, float]:
        if isinstance(point, Mapping):
            return {c: float(point[c]) for c in self.coords}
        pt = [float(x) for x in point]
        if len(pt) != self.dim:
            raise ValueError(f"point has {len(pt)} coordinates, chart has {self.dim}")
        return dict(zip(self.coords, pt))

    def metric_value(self, point) -> np.ndarray:
        env = dict(self.params)
        env.update(self.point_map(point))
        g = np.zeros((self.dim, self.dim))
        for (i, j), e in self.components.items():
            g[i, j] = g[j, i] = evaluate(e, env)
        return g

    def metric_jet(self, point, order: int = DEFAULT_ORDER) -> Jet:
        pm = self.point_map(point)
        tbl = taylor.table(self.dim, order)
        data = np.zeros((self.dim, self.dim, tbl.size))
        for (i, j), e in self.components.items():
            c = eval_taylor(e, pm, self.params, self.coords, order).coefficients
            data[i, j] = c
            data[j, i] = c
        return Jet(data, order, tbl)


def _cov_slot_letters(r):
    return "jklmnoqrst"[:r]


def covariant_derivative(t: Jet, variance: str, gamma: Jet) -> Jet:
    """Jet of ``nabla_i T``; the new derivative slot is first."""
    out = t.grad()
    letters = _cov_slot_letters(len(variance))
    for s, v in enumerate(variance):
        dummy = letters[:s] + "p" + letters[s + 1:]
        if v == "d":
            out = out - jeinsum(f"pi{letters[s]},{dummy}->i{letters}", gamma, t)
        else:
            out = out + jeinsum(f"{letters[s]}ip,{dummy}->i{letters}", gamma, t)
    return out


def _lower_last(t: Jet, g: Jet) -> Jet:
    r = len(t.shape)
    letters = _cov_slot_letters(r)
    return jeinsum(f"{letters[:-1]}p,p{letters[-1]}->{letters}", t, g)


@dataclass(frozen=True, eq=False)
class GeometryAt:
    """All curvature data at one point, as jets around it.

    Array index positions: ``gamma[k, i, j] = Gamma^k_ij``,
    ``riemann[j, k, l, m] = R_jkl^m``, ``weyl[j, k, l, m] = C_jkl^m``;
    ``*_cov`` variants have every slot lowered.
    """

    coords: Tuple[str, ...]
    point: np.ndarray
    params: Dict[str, float]
    order: int
    g: Jet
    ginv: Jet
    gamma: Jet
    riemann: Jet
    riemann_cov: Jet
    ricci: Jet
    scalar: Jet
    weyl: Optional[Jet]
    weyl_cov: Optional[Jet]
    spec: Optional[MetricSpec] = None

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def point_map(self) -> Dict[str, float]:
        return dict(zip(self.coords, map(float, self.point)))

    @cached_property
    def metric(self) -> MetricAt:
        return MetricAt.from_matrix(self.g.value)

    @property
    def g_at(self) -> np.ndarray:
        return self.g.value

    @property
    def ginv_at(self) -> np.ndarray:
        return self.ginv.value

    @property
    def gamma_at(self) -> np.ndarray:
        return self.gamma.value

    @property
    def riemann_mixed(self) -> np.ndarray:
        return self.riemann.value

    @property
    def riemann_lowered(self) -> np.ndarray:
        return self.riemann_cov.value

    @property
    def ricci_at(self) -> np.ndarray:
        return self.ricci.value

    @property
    def ricci_mixed(self) -> np.ndarray:
        """``R_a^b``."""
        return self.ricci.value @ self.ginv.value

    @property
    def scalar_at(self) -> float:
        return float(self.scalar.value)

    @property
    def weyl_mixed(self) -> np.ndarray:
        if self.weyl is None:
            raise ValueError("the Weyl tensor needs n >= 3")
        return self.weyl.value

    @property
    def weyl_lowered(self) -> np.ndarray:
        if self.weyl_cov is None:
            raise ValueError("the Weyl tensor needs n >= 3")
        return self.weyl_cov.value

    def curvature(self, which: str, lowered: bool = False) -> np.ndarray:
        """``R_jkl^m`` / ``C_jkl^m`` (or fully covariant with ``lowered``)."""
        if which == "riemann":
            return self.riemann_lowered if lowered else self.riemann_mixed
        if which == "weyl":
            return self.weyl_lowered if lowered else self.weyl_mixed
        raise ValueError(f"unknown curvature tensor {which!r}")

    # Residual scales.  The Weyl and Ricci tensors are built from the Riemann
    # tensor, so their rounding floor is set by its size; including it keeps
    # relative residuals meaningful when C or Ric vanish analytically.
    @cached_property
    def riemann_scale(self) -> float:
        return fro(self.riemann_mixed)

    def scale(self, which: str, lowered: bool = False) -> float:
        k = self.curvature(which, lowered)
        base = fro(self.riemann_lowered if lowered else self.riemann_mixed)
        return fro(k) + (base if which == "weyl" else 0.0)

    @cached_property
    def ricci_scale(self) -> float:
        return fro(self.ricci_mixed) + self.riemann_scale

    # derived jets ------------------------------------------------------------
    def cov_deriv(self, t: Jet, variance: str) -> Jet:
        return covariant_derivative(t, variance, self.gamma)

    @cached_property
    def nabla_weyl(self) -> Jet:
        """``nabla_i C_jkl^m``."""
        return self.cov_deriv(self.weyl, "dddu")

    @cached_property
    def nabla_riemann(self) -> Jet:
        """``nabla_i R_jkl^m``."""
        return self.cov_deriv(self.riemann, "dddu")

    @cached_property
    def nabla_ricci(self) -> Jet:
        """``nabla_a R_bc``."""
        return self.cov_deriv(self.ricci, "dd")

    @cached_property
    def weyl_div(self) -> Jet:
        """``nabla_m C_abc^m`` as a jet."""
        nab = self.nabla_weyl
        return Jet(np.einsum("mabcmZ->abcZ", nab.data), nab.order, nab.table)

    @cached_property
    def riemann_div(self) -> Jet:
        """``nabla_m R_abc^m``."""
        nab = self.nabla_riemann
        return Jet(np.einsum("mabcmZ->abcZ", nab.data), nab.order, nab.table)

    def tensor(self, name: str) -> DenseTensor:
        table = {
            "g": (self.g_at, "dd"),
            "g_inv": (self.ginv_at, "uu"),
            "gamma": (self.gamma_at, "udd"),
            "riemann_mixed": (self.riemann_mixed, "dddu"),
            "riemann_cov": (self.riemann_lowered, "dddd"),
            "ricci": (self.ricci_at, "dd"),
            "weyl_mixed": (self.weyl_mixed, "dddu"),
            "weyl_cov": (self.weyl_lowered, "dddd"),
        }
        comps, var = table[name]
        return DenseTensor(comps, tuple(var))


def riemann_from_connection(gamma: Jet) -> Jet:
    """``R_abc^m`` from a connection jet ``gamma[k, i, j] = Gamma^k_ij``."""
    dG = gamma.grad()  # dG[a, m, b, c] = d_a Gamma^m_bc
    dGt = dG.transpose(0, 2, 3, 1)  # [a, b, c, m]
    return (-dGt + dGt.transpose(1, 0, 2, 3)
            + jeinsum("kac,mbk->abcm", gamma, gamma)
            - jeinsum("kbc,mak->abcm", gamma, gamma))


def geometry_from_metric_jet(gjet: Jet, coords, point, params=None, spec=None,
                             expected_signature=None) -> GeometryAt:
    n = gjet.shape[0]
    g0 = gjet.value
    det = float(np.linalg.det(g0))
    scale = float(np.prod(np.linalg.norm(g0, axis=1)))
    if not np.isfinite(det) or abs(det) <= 1e-12 * scale:
        raise DegenerateMetricError(f"degenerate metric at {tuple(np.round(point, 12))}: det g = {det:.3e}")
    if expected_signature is not None:
        ev = np.linalg.eigvalsh(0.5 * (g0 + g0.T))
        sig = (int(np.sum(ev > 0)), int(np.sum(ev < 0)))
        if sig != tuple(expected_signature):
            raise SignatureError(f"signature {sig} at point, expected {tuple(expected_signature)}")

    ginv = taylor.matrix_inverse(gjet)
    dg = gjet.grad()  # dg[i, j, m] = d_i g_jm
    low = (dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)) * 0.5  # Gamma_{ij m} -> index order (i, j, m)
    gamma = jeinsum("km,ijm->kij", ginv, low)

    riem = riemann_from_connection(gamma)
    riem_cov = _lower_last(riem, gjet)
    ricci = Jet(np.einsum("ambmZ->abZ", riem.data), riem.order, riem.table)
    ricci = (ricci + ricci.transpose(1, 0)) * 0.5
    scalar = jeinsum("ab,ab->", ginv, ricci)

    weyl = weyl_cov = None
    if n >= 3:
        delta = np.eye(n)
        ric_mixed = jeinsum("ja,am->jm", ricci, ginv)
        bracket = (jeinsum("jm,kl->jklm", delta, ricci) - jeinsum("km,jl->jklm", delta, ricci)
                   + jeinsum("jm,kl->jklm", ric_mixed, gjet) - jeinsum("km,jl->jklm", ric_mixed, gjet))
        dg_bracket = jeinsum("jm,kl->jklm", delta, gjet) - jeinsum("km,jl->jklm", delta, gjet)
        weyl = (riem + bracket * (1.0 / (n - 2))
                - jeinsum(",jklm->jklm", scalar, dg_bracket) * (1.0 / ((n - 1) * (n - 2))))
        weyl_cov = _lower_last(weyl, gjet)

    return GeometryAt(tuple(coords), np.asarray(point, dtype=float), dict(params or {}), gjet.order,
                      gjet, ginv, gamma, riem, riem_cov, ricci, scalar, weyl, weyl_cov, spec)


def compute_geometry(spec: MetricSpec, point, order: int = DEFAULT_ORDER,
                     check_signature: bool = True) -> GeometryAt:
    """Curvature data of ``spec`` at ``point`` from an order-``order`` metric jet.

    Order 3 suffices for the Weyl divergence identity; order 4 (the default)
    also gives second covariant derivatives of curvature.
    """
    pm = spec.point_map(point)
    pt = np.array([pm[c] for c in spec.coords])
    gjet = spec.metric_jet(pm, order)
    return geometry_from_metric_jet(gjet, spec.coords, pt, spec.params, spec,
                                    spec.expected_signature if check_signature else None)


# --- single-quantity entry points ---------------------------------------------

def christoffel(spec: MetricSpec, point) -> np.ndarray:
    """``Gamma[k, i, j] = Gamma^k_ij`` at the point."""
    return compute_geometry(spec, point, order=2).gamma_at


def riemann(spec: MetricSpec, point):
    """``(R_jkl^m, R_jklm)`` at the point."""
    G = compute_geometry(spec, point, order=2)
    return G.riemann_mixed, G.riemann_lowered


def ricci_scalar(spec: MetricSpec, point):
    G = compute_geometry(spec, point, order=2)
    return G.ricci_at, G.scalar_at


def weyl(spec: MetricSpec, point):
    if spec.dim < 3:
        raise ValueError("the Weyl tensor needs n >= 3")
    G = compute_geometry(spec, point, order=2)
    return G.weyl_mixed, G.weyl_lowered


def cov_deriv(field, spec_or_geometry, point=None, variance: str = "dd") -> np.ndarray:
    """Covariant derivative at the point of a tensor field.

    ``field`` is a nested list/array of expressions (or a :class:`Jet`);
    ``variance`` gives one ``u``/``d`` flag per slot.  Returns the array
    ``nabla_i T...`` with the derivative slot first.
    """
    G = spec_or_geometry if isinstance(spec_or_geometry, GeometryAt) else \
        compute_geometry(spec_or_geometry, point, order=3)
    jet = field if isinstance(field, Jet) else field_jet(field, G)
    if len(jet.shape) != len(variance):
        raise ValueError("variance flags do not match the field rank")
    return G.cov_deriv(jet, variance).value


def field_jet(components, G: GeometryAt, order: Optional[int] = None) -> Jet:
    """Evaluate a nested array of expressions as a jet around ``G.point``."""
    arr = np.empty(np.shape(np.array(components, dtype=object)), dtype=object)
    arr[...] = np.array(components, dtype=object)
    order = G.order if order is None else order
    tbl = taylor.table(G.n, order)
    data = np.zeros(arr.shape + (tbl.size,))
    pm = G.point_map
    for idx in np.ndindex(arr.shape):
        e = arr[idx]
        if isinstance(e, (int, float, np.floating)) and not isinstance(e, bool):
            data[idx + (0,)] = float(e)
            continue
        data[idx] = eval_taylor(as_expression(e), pm, G.params, G.coords, order).coefficients
    return Jet(data, order, tbl)


# --- identity residuals ----------------------------------------------------------

def bianchi_residual(G: GeometryAt) -> float:
    R = G.riemann_lowered
    cyc = R + np.einsum("kljm->jklm", R) + np.einsum("ljkm->jklm", R)
    return relative(cyc, 3 * fro(R))


def riemann_symmetry_residual(G: GeometryAt) -> float:
    R = G.riemann_lowered
    a = R + np.swapaxes(R, 0, 1)
    b = R + np.swapaxes(R, 2, 3)
    c = R - np.transpose(R, (2, 3, 0, 1))
    return relative(np.concatenate([a.ravel(), b.ravel(), c.ravel()]), 2 * fro(R))


def weyl_trace_residual(G: GeometryAt) -> float:
    """Largest single trace of ``C_jklm`` over any slot pair, relative."""
    C = G.weyl_lowered
    gi = G.ginv_at
    traces = []
    for a in range(4):
        for b in range(a + 1, 4):
            letters = list("jklm")
            letters[a], letters[b] = "p", "q"
            rest = "".join(x for x in letters if x not in "pq")
            traces.append(np.einsum(f"pq,{''.join(letters)}->{rest}", gi, C))
    return max(relative(t, fro(gi) * G.scale("weyl", lowered=True)) for t in traces)


def metricity_residual(G: GeometryAt) -> float:
    nab = G.cov_deriv(G.g, "dd").value
    dg = G.g.grad().value
    return relative(nab, fro(dg) + 2 * fro(G.gamma_at) * fro(G.g_at))


def derivative_scale(G: GeometryAt, jet: Jet) -> float:
    """Operand size of ``nabla`` applied to ``jet``: partials plus connection terms."""
    r = len(jet.shape)
    return fro(jet.grad().value) + r * fro(G.gamma_at) * fro(jet.value)


def weyl_divergence_residual(G: GeometryAt) -> float:
    """Relative residual of the identity linking ``nabla_m C_abc^m`` to ``nabla Ric`` and ``nabla R``."""
    n = G.n
    if n < 3:
        raise ValueError("n >= 3 required")
    lhs = -G.weyl_div.value
    nR = G.nabla_ricci.value
    dR = G.scalar.grad().value
    g = G.g_at
    c = (n - 3) / (n - 2)
    rhs = c * (nR - np.swapaxes(nR, 0, 1)
               - (np.einsum("bc,a->abc", g, dR) - np.einsum("ac,b->abc", g, dR)) / (2 * (n - 1)))
    # The Riemann derivative sets the rounding floor of both sides.
    return relative(lhs - rhs, fro(G.nabla_weyl.value), derivative_scale(G, G.riemann),
                    c * (2 * fro(nR) + fro(g) * fro(dR) / (n - 1)))


def scalar_count(n: int) -> int:
    """Number of algebraically independent curvature scalars in dimension ``n``."""
    if n < 3:
        raise ValueError("n >= 3 required")
    return n * (n - 1) * (n - 2) * (n + 3) // 12


def sample_points(spec: MetricSpec, count: int, seed: int = 0, ranges=None,
                  max_rejections: int = 1000) -> np.ndarray:
    """Uniform points in ``ranges`` (default: the spec's sample ranges).

    Points where the metric is numerically degenerate, fails to evaluate, or
    has the wrong signature are rejected.
    """
    ranges = dict(spec.sample_ranges if ranges is None else ranges)
    missing = [c for c in spec.coords if c not in ranges]
    if missing:
        raise ValueError(f"no sampling range for coordinates {missing}")
    rng = np.random.default_rng(seed)
    lo = np.array([ranges[c][0] for c in spec.coords], dtype=float)
    hi = np.array([ranges[c][1] for c in spec.coords], dtype=float)
    points, rejected = [], 0
    while len(points) < count:
        p = lo + (hi - lo) * rng.random(spec.dim)
        try:
            g = spec.metric_value(p)
            det = np.linalg.det(g)
            ok = np.isfinite(det) and abs(det) > 1e-10 * float(np.prod(np.linalg.norm(g, axis=1)))
            if ok and spec.expected_signature is not None:
                ev = np.linalg.eigvalsh(g)
                ok = (int(np.sum(ev > 0)), int(np.sum(ev < 0))) == tuple(spec.expected_signature)
        except EvalError:
            ok = False
        if ok:
            points.append(p)
        else:
            rejected += 1
            if rejected > max_rejections:
                raise DegenerateMetricError(f"sampler rejected more than {max_rejections} points")
    return np.array(points)


def commutator_residual(G: GeometryAt, covector) -> float:
    """``[nabla_a, nabla_b] u_c - R_abc^m u_m`` relative, for a covector field given as expressions."""
    u = covector if isinstance(covector, Jet) else field_jet(covector, G)
    nn = G.cov_deriv(G.cov_deriv(u, "d"), "dd").value  # nn[a, b, c] = nabla_a nabla_b u_c
    lhs = nn - np.swapaxes(nn, 0, 1)
    rhs = np.einsum("abcm,m->abc", G.riemann_mixed, u.value)
    return relative(lhs - rhs, 2 * fro(nn) + fro(rhs))
