"""The acceptance suite behind ``weylkit verify-all`` and ``tests/test_acceptance.py``.

Each ``criterion_N`` returns a :class:`CriterionResult` holding named checks.
A check is either an upper bound on the worst residual seen, a lower bound on
the smallest residual seen (negative instances), or a plain flag.
"""

from __future__ import annotations

import contextlib
import io
import os
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .catalog import SPACETIMES, catalog
from .classify import (bel_debever, electric_magnetic, generalized_eh, orthonormal_frame, petrov_type)
from .compat import (_real_eigenpairs, bridge_identity_residual, compat_report, d_tensor, hall_conditions,
                     lovelock_residual, vector_bridge_residual, vector_compat_residual, vector_ricci_condition)
from .constructs import (GeodesicMapSpec, geodesic_map_deform, hypersurface_compat_suite, hypersurface_geometry,
                         kn_compat_residuals, kn_trace_residual, kulkarni_nomizu_riemann, kn_weyl_condition_residual,
                         omega_codazzi_from_gauss, solve_kn_potential)
from .compat import SymmetricField
from .errors import NoPotentialError, SpecFileError
from .expr import BinOp, Call, Const, FUNCTIONS, Neg, Num, Var, parse, to_string
from .geometry import (bianchi_residual, compute_geometry, metricity_residual, sample_points,
                       weyl_divergence_residual, weyl_trace_residual)
from .oracles import christoffel_agreement, riemann_agreement
from .specfile import dumps_spec, loads_spec
from .tensor import MetricAt, fro, relative

#: metrics swept by the curvature and identity criteria
CURVATURE_METRICS = tuple(SPACETIMES) + ("sphere_metric(4)",)
#: closed potentials for the geodesic-map identity, in the first three coordinates
POTENTIALS = ("0.1*{0} + 0.2*{1}", "0.05*{1}^2 + 0.1*{0}*{2}", "0.1*sin({0})*{1} + 0.1*cos({2})")


@dataclass
class Check:
    name: str
    kind: str  # "below", "above" or "flag"
    threshold: float
    value: float
    count: int = 0
    passed: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "threshold": self.threshold, "value": self.value,
                "count": self.count, "passed": self.passed, "note": self.note}


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: Dict[str, Check] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks.values())

    def failures(self) -> List[Check]:
        return [c for c in self.checks.values() if not c.passed]

    def line(self) -> str:
        bad = self.failures()
        tail = f" ({len(self.checks)} checks)" if not bad else \
            " FAILED: " + ", ".join(f"{c.name}={c.value:.3g} vs {c.threshold:g}" for c in bad)
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title}{tail}"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks.values()]}

    # -- recording helpers --

    def below(self, name: str, value: float, tol: float) -> None:
        c = self.checks.setdefault(name, Check(name, "below", tol, 0.0))
        c.count += 1
        v = float(value)
        if not np.isfinite(v) or v > c.value:
            c.value = v
        c.passed = bool(np.isfinite(c.value) and c.value < tol)

    def above(self, name: str, value: float, tol: float) -> None:
        c = self.checks.setdefault(name, Check(name, "above", tol, float("inf")))
        c.count += 1
        c.value = min(c.value, float(value))
        c.passed = bool(c.value > tol)

    def flag(self, name: str, ok: bool, note: str = "") -> None:
        c = self.checks.setdefault(name, Check(name, "flag", 0.0, 1.0))
        c.count += 1
        if not ok:
            c.value = 0.0
            c.passed = False
            if note and not c.note:
                c.note = note

    def at_least(self, name: str, count: int, minimum: int) -> None:
        self.checks[name] = Check(name, "count", minimum, count, count, count >= minimum)


def _random_symmetric(rng, n: int) -> np.ndarray:
    b = rng.standard_normal((n, n))
    return b + b.T


def _points(spec, count: int, seed: int):
    target = spec.metric_spec_sampler() if hasattr(spec, "metric_spec_sampler") else spec
    return sample_points(target, count, seed=seed)


def _unit(u, G):
    return u / np.sqrt(abs(float(u @ G.g_at @ u)))


# --- 1 ----------------------------------------------------------------------------------------

def criterion_1(seed: int = 0) -> CriterionResult:
    r = CriterionResult(1, "curvature correctness on the catalog at 20 points")
    for k, name in enumerate(CURVATURE_METRICS):
        spec = catalog(name)
        for i, p in enumerate(sample_points(spec, 20, seed=seed + k)):
            G = compute_geometry(spec, p)
            r.below("bianchi", bianchi_residual(G), 1e-9)
            r.below("weyl_trace", weyl_trace_residual(G), 1e-9)
            r.below("metricity", metricity_residual(G), 1e-9)
            r.below("christoffel_vs_fd", christoffel_agreement(spec, p, G), 1e-5)
            if i < 2:
                r.below("riemann_vs_fd", riemann_agreement(spec, p, G), 1e-5)
    return r


# --- 2 ----------------------------------------------------------------------------------------

def criterion_2(seed: int = 0) -> CriterionResult:
    r = CriterionResult(2, "identity suite (divergence, Lovelock, bridge, vector, geodesic map)")
    rng = np.random.default_rng(seed)
    for k, name in enumerate(CURVATURE_METRICS):
        spec = catalog(name)
        psis = [t.format(*spec.coords) for t in POTENTIALS]
        for p in sample_points(spec, 3, seed=seed + 100 + k):
            G = compute_geometry(spec, p)
            n = G.n
            r.below("weyl_divergence", weyl_divergence_residual(G), 1e-8)
            r.below("lovelock", lovelock_residual(G), 1e-8)
            for _ in range(50):
                r.below("bridge_50b", bridge_identity_residual(_random_symmetric(rng, n), G), 1e-8)
                r.below("vector_50u", vector_bridge_residual(rng.standard_normal(n), G), 1e-8)
            for j, psi in enumerate(psis):
                gm = geodesic_map_deform(GeodesicMapSpec(spec, psi), p, panel=20, seed=seed + j)
                r.below("geodesic_map_identity", gm.cyclic_invariance_residual, 1e-8)
                r.below("geodesic_map_connection", gm.connection_residual, 1e-8)
    return r


# --- 3 ----------------------------------------------------------------------------------------

HYPERSURFACES = ("sphere_embedding(4)", "hyperboloid_embedding", "ellipsoid_embedding", "lorentz_graph_embedding")
POS, NEG = 1e-8, 1e-3


def _schwarzschild_observers(G, p):
    """Static observer, radial and tangential boosts at a Schwarzschild point."""
    f = 1 - 2 / p[1]
    static = np.array([1 / np.sqrt(f), 0, 0, 0])
    fr = orthonormal_frame(G, static)
    def boost(axis, v):
        return (fr.vectors[0] + v * fr.vectors[axis]) / np.sqrt(1 - v * v)
    return static, [boost(1, v) for v in (0.3, 0.6)], [boost(a, v) for a in (2, 3) for v in (0.3, 0.6)]


def criterion_3(seed: int = 0) -> CriterionResult:
    r = CriterionResult(3, "theorem equivalences, positive and negative instances")
    rng = np.random.default_rng(seed + 3)
    schw, godel, frw = catalog("schwarzschild"), catalog("godel"), catalog("frw_flat")

    # Riemann compatibility <=> Weyl compatibility + commuting with Ricci.
    pos = neg = 0
    for name in HYPERSURFACES:
        for p in _points(catalog(name), 3, seed):
            hs = hypersurface_geometry(catalog(name), p)
            G = hs.geometry
            for b in (hs.omega, hs.omega_squared, G.ricci_at):
                rep = compat_report(b, G)
                r.below("tensor_pos_riemann", rep.residual_riemann, POS)
                r.below("tensor_pos_weyl_and_ricci", max(rep.residual_weyl, rep.ricci_commutator_norm), POS)
                pos += 1
    for p in sample_points(frw, 3, seed=seed):
        G = compute_geometry(frw, p)
        ud = G.g_at[0]
        for alpha, beta in ((0.7, 1.3), (-0.4, 2.0)):
            rep = compat_report(alpha * G.g_at + beta * np.outer(ud, ud), G)
            r.below("tensor_pos_riemann", rep.residual_riemann, POS)
            r.below("tensor_pos_weyl_and_ricci", max(rep.residual_weyl, rep.ricci_commutator_norm), POS)
            pos += 1
    for spec in (frw, schw, godel):
        for p in sample_points(spec, 4, seed=seed + 1):
            G = compute_geometry(spec, p)
            rep = compat_report(_random_symmetric(rng, 4), G)
            r.above("tensor_neg_riemann", rep.residual_riemann, NEG)
            r.above("tensor_neg_weyl_or_ricci", max(rep.residual_weyl, rep.ricci_commutator_norm), NEG)
            neg += 1
    r.at_least("tensor_instances_pos", pos, 10)
    r.at_least("tensor_instances_neg", neg, 10)

    # Vector version: u Riemann compatible <=> Weyl compatible + the Ricci condition.
    def vec_pos(u, G):
        r.below("vector_pos_riemann", vector_compat_residual(u, G, "riemann"), POS)
        r.below("vector_pos_weyl_and_ricci",
                max(vector_compat_residual(u, G, "weyl"), vector_ricci_condition(u, G)), POS)

    pos = neg = 0
    for p in sample_points(schw, 3, seed=seed + 2):
        G = compute_geometry(schw, p)
        f = 1 - 2 / p[1]
        for u in (np.array([1 / np.sqrt(f), 0, 0, 0]), np.array([1 / f, 1, 0, 0]), np.array([1 / f, -1, 0, 0])):
            vec_pos(u, G)
            pos += 1
    for p in sample_points(frw, 3, seed=seed + 2):
        vec_pos(np.array([1.0, 0, 0, 0]), compute_geometry(frw, p))
        pos += 1
    pp = catalog("pp_wave")
    for p in sample_points(pp, 3, seed=seed + 2):
        vec_pos(np.array([0, 1.0, 0, 0]), compute_geometry(pp, p))
        pos += 1
    for name in ("ellipsoid_embedding", "lorentz_graph_embedding"):
        for p in _points(catalog(name), 2, seed):
            hs = hypersurface_geometry(catalog(name), p)
            for _, v in _real_eigenpairs(hs.omega_mixed)[0]:
                vec_pos(v, hs.geometry)
                pos += 1
    for spec in (schw, godel, frw):
        for p in sample_points(spec, 4, seed=seed + 3):
            G = compute_geometry(spec, p)
            u = rng.standard_normal(4)
            r.above("vector_neg_riemann", vector_compat_residual(u, G, "riemann"), NEG)
            r.above("vector_neg_weyl_or_ricci",
                    max(vector_compat_residual(u, G, "weyl"), vector_ricci_condition(u, G)), NEG)
            neg += 1
    r.at_least("vector_instances_pos", pos, 10)
    r.at_least("vector_instances_neg", neg, 10)

    # H = 0 <=> the observer is Weyl compatible; D-tensor reconstruction <=> Weyl compatible.
    pos = neg = dpos = dneg = 0
    for p in sample_points(schw, 4, seed=seed + 4):
        G = compute_geometry(schw, p)
        static, radial, tangential = _schwarzschild_observers(G, p)
        for u in [static] + radial:
            pair = electric_magnetic(G, u)
            r.below("h_pos_H", pair.norms()[1], POS)
            r.below("h_pos_weyl_compat", vector_compat_residual(u, G, "weyl"), POS)
            r.below("d_pos_reconstruction", d_tensor(u, G).reconstruction_residual, POS)
            r.below("d_equals_E", relative(d_tensor(u, G).D - pair.E, fro(pair.E) + pair.scale), POS)
            pos += 1
            dpos += 1
        radial_spacelike = np.array([0, 1.0, 0, 0])
        r.below("d_pos_reconstruction", d_tensor(radial_spacelike, G).reconstruction_residual, POS)
        dpos += 1
        for u in tangential:
            r.above("h_neg_H", electric_magnetic(G, u).norms()[1], NEG)
            r.above("h_neg_weyl_compat", vector_compat_residual(u, G, "weyl"), NEG)
            r.above("d_neg_reconstruction", d_tensor(u, G).reconstruction_residual, NEG)
            neg += 1
            dneg += 1
    hs = hypersurface_geometry(catalog("lorentz_graph_embedding"), [0, 0, 0, 0])
    u = _unit(np.array([1.0, 0, 0, 0]), hs.geometry)
    r.below("h_pos_H", electric_magnetic(hs.geometry, u).norms()[1], POS)
    r.below("h_pos_weyl_compat", vector_compat_residual(u, hs.geometry, "weyl"), POS)
    pos += 1
    for p in sample_points(godel, 4, seed=seed + 4):
        G = compute_geometry(godel, p)
        fr = orthonormal_frame(G)
        for u in (fr.vectors[0], (fr.vectors[0] + 0.5 * fr.vectors[3]) / np.sqrt(0.75)):
            r.above("h_neg_H", electric_magnetic(G, u).norms()[1], NEG)
            r.above("h_neg_weyl_compat", vector_compat_residual(u, G, "weyl"), NEG)
            r.above("d_neg_reconstruction", d_tensor(u, G).reconstruction_residual, NEG)
            neg += 1
            dneg += 1
    r.at_least("h_instances_pos", pos, 10)
    r.at_least("h_instances_neg", neg, 10)
    r.at_least("d_instances_pos", dpos, 10)
    r.at_least("d_instances_neg", dneg, 10)
    return r


# --- 4 ----------------------------------------------------------------------------------------

HALL_TOL = 1e-7


def criterion_4(seed: int = 0) -> CriterionResult:
    r = CriterionResult(4, "Hall's two-of-three conditions")
    rng = np.random.default_rng(seed + 4)
    cases = []
    for name in ("de_sitter_static", "sphere_metric(4)", "minkowski"):
        spec = catalog(name)
        for p in sample_points(spec, 3, seed=seed):
            G = compute_geometry(spec, p)
            for _ in range(4):
                cases.append((name, G, rng.standard_normal(4)))
            if name == "de_sitter_static":
                fr = orthonormal_frame(G)
                cases.append((name, G, fr.vectors[0] + fr.vectors[1]))  # null
    pp = catalog("pp_wave")
    for p in sample_points(pp, 4, seed=seed):
        G = compute_geometry(pp, p)
        cases.append(("pp_wave", G, np.array([0, 1.0, 0, 0])))
        cases.append(("pp_wave", G, np.array([0, 1.0, 0, 0]) + 0.3 * rng.standard_normal(4)))
        cases.append(("pp_wave", G, rng.standard_normal(4)))
    schw = catalog("schwarzschild")
    for p in sample_points(schw, 3, seed=seed):
        G = compute_geometry(schw, p)
        cases.append(("schwarzschild", G, np.array([1.0, 0, 0, 0])))
        cases.append(("schwarzschild", G, rng.standard_normal(4)))

    premises = {"AB->C": 0, "AC->B": 0, "BC->A": 0, "A->BC": 0}
    for name, G, u in cases:
        A, B, C = hall_conditions(u, G)
        ok = {"A": A < HALL_TOL, "B": B < HALL_TOL, "C": C < HALL_TOL}
        vals = {"A": A, "B": B, "C": C}
        for x, y, z in (("A", "B", "C"), ("A", "C", "B"), ("B", "C", "A")):
            if ok[x] and ok[y]:
                premises[f"{x}{y}->{z}"] += 1
                r.below(f"{x}{y}_forces_{z}", vals[z], HALL_TOL)
        u2 = float(u @ G.g_at @ u)
        if ok["A"] and abs(u2) > 1e-8 * float(u @ u):
            premises["A->BC"] += 1
            r.below("A_forces_B_and_C", max(B, C), HALL_TOL)
    for k, v in premises.items():
        r.at_least(f"premise_{k}", v, 1)
    return r


# --- 5 ----------------------------------------------------------------------------------------

def criterion_5(seed: int = 0) -> CriterionResult:
    r = CriterionResult(5, "Petrov classification and the static observer")
    expect = {"schwarzschild": "D", "pp_wave": "N", "de_sitter_static": "O", "minkowski": "O"}
    for name, t in expect.items():
        spec = catalog(name)
        for p in sample_points(spec, 5, seed=seed + 5):
            G = compute_geometry(spec, p)
            got = petrov_type(G).petrov_type
            r.flag(f"{name}_is_{t}", got == t, f"got {got} at {list(p)}")
            if name == "pp_wave":
                r.below("pp_wave_res_N", bel_debever(G, [0, 1.0, 0, 0]).res_N, 1e-9)
    rots = Rotation.random(20, random_state=seed + 55).as_matrix()
    for name in ("schwarzschild", "pp_wave", "godel", "de_sitter_static"):
        spec = catalog(name)
        G = compute_geometry(spec, sample_points(spec, 1, seed=seed + 6)[0])
        base = petrov_type(G).petrov_type
        fr = orthonormal_frame(G)
        for R in rots:
            got = petrov_type(G, fr.rotated(R)).petrov_type
            r.flag("rotation_invariance", got == base, f"{name}: {base} became {got}")
    schw = catalog("schwarzschild")
    for p in sample_points(schw, 5, seed=seed + 7):
        G = compute_geometry(schw, p)
        u = np.array([1 / np.sqrt(1 - 2 / p[1]), 0, 0, 0])
        pair = electric_magnetic(G, u)
        inv = pair.invariant_residuals(G)
        r.below("static_H_norm", pair.norms()[1], 1e-9)
        r.below("static_E_trace", inv["E_trace"], 1e-9)
        r.below("static_E_dot_u", inv["E_orthogonality"], 1e-9)
    return r


# --- 6 ----------------------------------------------------------------------------------------

def criterion_6(seed: int = 0) -> CriterionResult:
    r = CriterionResult(6, "Weyl-compatible null vectors are repeated principal")
    cases = []
    pp = catalog("pp_wave")
    for p in sample_points(pp, 5, seed=seed + 8):
        cases.append((compute_geometry(pp, p), np.array([0, 1.0, 0, 0])))
    schw = catalog("schwarzschild")
    for p in sample_points(schw, 5, seed=seed + 8):
        G = compute_geometry(schw, p)
        f = 1 - 2 / p[1]
        cases += [(G, np.array([1 / f, 1.0, 0, 0])), (G, np.array([1 / f, -1.0, 0, 0]))]
    ds = catalog("de_sitter_static")
    for p in sample_points(ds, 3, seed=seed + 8):
        G = compute_geometry(ds, p)
        fr = orthonormal_frame(G)
        cases.append((G, fr.vectors[0] + fr.vectors[2]))
    for G, k in cases:
        r.below("constructed_null", abs(float(k @ G.g_at @ k)) / float(k @ k), 1e-10)
        r.below("constructed_weyl_compat", vector_compat_residual(k, G, "weyl"), 1e-8)
        r.below("res_IID", bel_debever(G, k).res_IID, 1e-8)
    r.at_least("instances", len(cases), 10)
    return r


# --- 7 ----------------------------------------------------------------------------------------

def _perfect_fluid_fit(G, u):
    ud = G.g_at @ u
    basis = np.stack([np.outer(ud, ud).ravel(), G.g_at.ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(basis, G.ricci_at.ravel(), rcond=None)
    fit = coef[0] * np.outer(ud, ud) + coef[1] * G.g_at
    return coef, relative(G.ricci_at - fit, fro(G.ricci_at))


def criterion_7(seed: int = 0) -> CriterionResult:
    r = CriterionResult(7, "hypersurfaces: Gauss, Codazzi, compatibility suite, corollary")
    for name in ("sphere_embedding(4)", "hyperboloid_embedding"):
        emb = catalog(name)
        for p in _points(emb, 20, seed + 9):
            hs = hypersurface_geometry(emb, p)
            r.below("gauss", hs.gauss_residual, 1e-9)
            r.below("codazzi", hs.codazzi_residual, 1e-9)
    for name in HYPERSURFACES:
        emb = catalog(name)
        for p in _points(emb, 3, seed + 10):
            rep = hypersurface_compat_suite(emb, p)
            r.below("suite_max_compat", rep.max_compat(), 1e-8)
            r.below("suite_ricci_form", rep.ricci_form_residual, 1e-8)
    for name in ("sphere_embedding(4)", "ellipsoid_embedding"):
        emb = catalog(name)
        for p in _points(emb, 3, seed + 11):
            r.below("codazzi_from_gauss", omega_codazzi_from_gauss(emb, p), 1e-8)
    sphere = catalog("sphere_metric(4)", r=1.5)
    omega = [[to_string(sphere.components[(i, j)]) + " / r" if (i, j) in sphere.components else 0
              for j in range(4)] for i in range(4)]
    for p in sample_points(sphere, 3, seed=seed + 11):
        r.below("codazzi_from_gauss", omega_codazzi_from_gauss(sphere, p, SymmetricField(omega)), 1e-8)

    hs = hypersurface_geometry(catalog("lorentz_graph_embedding"), [0, 0, 0, 0])
    G = hs.geometry
    u = _unit(np.array([1.0, 0, 0, 0]), G)
    _, fit = _perfect_fluid_fit(G, u)
    r.below("corollary_perfect_fluid_ricci", fit, 1e-8)
    r.above("corollary_weyl_nonzero", fro(G.weyl_lowered) / (fro(G.riemann_lowered) + 1e-300), 1e-3)
    r.below("corollary_H_observer", electric_magnetic(G, u).norms()[1], 1e-8)
    r.below("corollary_H_from_T", generalized_eh(G, G.ricci_at).norms()[1], 1e-8)
    return r


# --- 8 ----------------------------------------------------------------------------------------

def _random_metric(rng, lorentzian: bool):
    L = np.eye(4) + 0.4 * rng.standard_normal((4, 4))
    eta = np.diag([-1.0, 1, 1, 1]) if lorentzian else np.eye(4)
    g = L.T @ eta @ L
    frame = np.linalg.inv(L)  # columns are orthonormal vectors
    return MetricAt.from_matrix(g), frame.T, np.diag(eta)


def _diagonal_in_frame(values, frame_rows, eps, g):
    low = frame_rows @ g
    return np.einsum("i,i,ik,il->kl", values, eps, low, low)


def criterion_8(seed: int = 0) -> CriterionResult:
    r = CriterionResult(8, "Kulkarni-Nomizu constructions and the potential solver")
    rng = np.random.default_rng(seed + 8)
    for k in range(12):
        m, rows, eps = _random_metric(rng, lorentzian=k % 2 == 0)
        g = m.g.components
        a = _diagonal_in_frame(rng.standard_normal(4), rows, eps, g)
        b = _diagonal_in_frame(rng.standard_normal(4), rows, eps, g)
        ra, rb = kn_compat_residuals(a, b, m)
        r.below("commuting_pair_compat", max(ra, rb), 1e-12)

    instances = [(np.diag([1.0, -1, 1, -1]), MetricAt.from_matrix(np.diag([-1.0, 1, 1, 1]))),
                 (np.diag([1.0, -1, 0, 0]), MetricAt.from_matrix(np.eye(4))),
                 (np.diag([1.0, -1, 0, 0]), MetricAt.from_matrix(np.diag([-1.0, 1, 1, 1])))]
    for k in range(8):
        # eigenvalues (s, s, x, -x) always admit a potential
        m, rows, eps = _random_metric(rng, lorentzian=k % 2 == 0)
        s, x = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
        instances.append((_diagonal_in_frame(np.array([s, s, x, -x]), rows, eps, m.g.components), m))
    nontrivial = 0
    for b, m in instances:
        pot = solve_kn_potential(b, m)
        r.below("potential_condition", kn_weyl_condition_residual(pot.a, b, m), 1e-10)
        r.below("potential_solver_residual", pot.residual, 1e-10)
        r.below("potential_traceless", kn_trace_residual(pot.a, b, m), 1e-10)
        r.below("potential_unit_norm", abs(fro(pot.a) - 1), 1e-12)
        K, _ = kulkarni_nomizu_riemann(pot.a, b, m)
        nontrivial += fro(K) > 1e-6
    r.at_least("potentials_with_nonzero_product", nontrivial, 5)
    try:
        solve_kn_potential(np.eye(4), MetricAt.from_matrix(np.eye(4)))
        r.flag("b_equals_g_has_no_potential", False, "solver returned a potential for b = g")
    except NoPotentialError:
        r.flag("b_equals_g_has_no_potential", True)
    return r


# --- 9 ----------------------------------------------------------------------------------------

def random_expression(rng: np.random.Generator, depth: int = 4, names=("x", "y", "z")):
    """A random AST over numbers, names, ``pi``, unary minus, binary operators and calls."""
    if depth <= 0 or rng.random() < 0.25:
        k = rng.integers(5)
        if k == 0:
            return Num(float(rng.integers(0, 20)))
        if k == 1:
            return Num(float(rng.choice([rng.uniform(0, 10), 10.0 ** rng.integers(-12, 12) * rng.random()])))
        if k == 2:
            return Const("pi")
        return Var(str(rng.choice(names)))
    k = rng.integers(10)
    if k == 0:
        return Neg(random_expression(rng, depth - 1, names))
    if k == 1:
        return Call(str(rng.choice(FUNCTIONS)), random_expression(rng, depth - 1, names))
    op = str(rng.choice(["+", "-", "*", "/", "^"]))
    return BinOp(op, random_expression(rng, depth - 1, names), random_expression(rng, depth - 1, names))


GOLDEN_SPEC = """\
# Schwarzschild in Schwarzschild coordinates, hand-written
[meta]
name = schwarzschild
dim = 4
signature = -+++

[coords]
t r theta phi

[params]
M = 1

[ranges]
t = -5, 5
r = 2.5, 12
theta = 0.3, 2.8415926535897933
phi = 0, 6.283185307179586

[metric]
g 0 0 = -(1 - 2*M/r)   # time-time
g 1 1 = 1/(1 - 2*M/r)
g 2 2 = r^2
g 3 3 = r^2*sin(theta)^2
"""

GOLDEN_CANONICAL = """\
[meta]
name = schwarzschild
dim = 4
signature = 3, 1

[coords]
t r theta phi

[params]
M = 1.0

[ranges]
t = -5.0, 5.0
r = 2.5, 12.0
theta = 0.3, 2.8415926535897933
phi = 0.0, 6.283185307179586

[metric]
g 0 0 = -(1 - 2 * M / r)
g 1 1 = 1 / (1 - 2 * M / r)
g 2 2 = r^2
g 3 3 = r^2 * sin(theta)^2
"""

_HEAD = "[meta]\nname = x\ndim = 2\n"
GOLDEN_ERRORS = (
    (_HEAD + "[metric]\ng 0 0 = 1\n", "bad.wk:6:1: missing section [coords]"),
    (_HEAD + "[coords]\nx, y\n[metric]\ng 0 1 = x\ng 1 0 = -x\ng 0 0 = 1\ng 1 1 = 1\n",
     "bad.wk:8:1: symmetry conflict: g 1 0 differs from g 0 1"),
    (_HEAD + "[coords]\nx, y\n[metric]\ng 0 0 = 1 + * x\n", "bad.wk:7:13: expected operand"),
    (_HEAD + "[coords]\nx, y\n[metric]\ng 0 0 = 1\ng 0 0 = 2\n",
     "bad.wk:8:1: duplicate entry g 0 0 (first on line 7)"),
    ("[meta]\nname = x\ndim = 3\n[coords]\nx, y\n[metric]\ng 0 0 = 1\n",
     "bad.wk:4:1: dim mismatch: dim = 3 but 2 coordinates declared"),
    (_HEAD + "[coords]\nx, y\n[metric]\ng 0 0 = q\n", "bad.wk:7:9: unresolved identifier 'q'"),
)


def run_cli(argv: List[str], env: Optional[Dict[str, str]] = None):
    """Run ``weylkit.cli.main`` in-process; returns ``(exit code, stdout, stderr)``."""
    from .cli import main
    old = {k: os.environ.get(k) for k in (env or {})}
    os.environ.update(env or {})
    out, err = io.StringIO(), io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(argv)
    finally:
        for k, v in old.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v
    return code, out.getvalue(), err.getvalue()


def criterion_9(seed: int = 0) -> CriterionResult:
    r = CriterionResult(9, "parser round trips, spec-file goldens, CLI determinism and exit codes")
    rng = np.random.default_rng(seed + 9)
    for _ in range(500):
        e = random_expression(rng)
        s = to_string(e)
        e2 = parse(s)
        r.flag("ast_round_trip", e2 == e, s)
        r.flag("print_parse_idempotent", to_string(e2) == s, s)

    spec = loads_spec(GOLDEN_SPEC, "golden.wk")
    r.flag("golden_canonical_dump", dumps_spec(spec) == GOLDEN_CANONICAL)
    ref = catalog("schwarzschild")
    p = [0.3, 4.2, 1.1, 0.7]
    r.flag("golden_metric_values", bool(np.array_equal(spec.metric_value(p), ref.metric_value(p))))
    for name in ("schwarzschild", "godel", "frw_flat", "sphere_embedding(4)", "lorentz_graph_embedding"):
        text = dumps_spec(catalog(name))
        r.flag("dump_load_dump", dumps_spec(loads_spec(text)) == text, name)
    for text, message in GOLDEN_ERRORS:
        try:
            loads_spec(text, "bad.wk")
            r.flag("golden_errors", False, f"accepted: {message}")
        except SpecFileError as exc:
            r.flag("golden_errors", str(exc) == message, f"{exc} != {message}")

    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for k, env in enumerate(({}, {}, {"WEYLKIT_THREADS": "3"})):
            path = os.path.join(tmp, f"r{k}.json")
            code, _, _ = run_cli(["classify", "--catalog", "schwarzschild", "--points", "4", "--seed", "11",
                                  "--out", path], env)
            r.flag("report_exit_0", code == 0, f"exit {code}")
            with open(path, "rb") as fh:
                outs.append(fh.read())
        r.flag("byte_identical_reports", outs[0] == outs[1] == outs[2])
        code, a, _ = run_cli(["curvature", "--catalog", "godel", "--points", "3", "--seed", "2"])
        code2, b, _ = run_cli(["curvature", "--catalog", "godel", "--points", "3", "--seed", "2"])
        r.flag("byte_identical_stdout", a == b and code == code2 == 0)

        bad = os.path.join(tmp, "bad.wk")
        with open(bad, "w") as fh:
            fh.write(GOLDEN_ERRORS[0][0])
        expect = [
            (["curvature", "--catalog", "schwarzschild", "--points", "3", "--vacuum"], 0),
            (["classify", "--catalog", "pp_wave", "--points", "2", "--observer", "0,1,0,0"], 0),
            (["classify", "--catalog", "schwarzschild", "--points", "2", "--expect-type", "N"], 1),
            (["compat", "--catalog", "godel", "--points", "2", "--b", "1,0,0,0;0,2,0,0;0,0,1,0;0,0,0,1",
              "--expect", "compatible"], 1),
            (["curvature", "--catalog", "godel", "--points", "2", "--vacuum"], 1),
            (["curvature", "--spec", bad], 2),
            (["curvature", "--catalog", "no_such_metric"], 2),
            (["compat", "--catalog", "minkowski", "--u", "1,0,0,sin("], 2),
            (["curvature", "--catalog", "schwarzschild", "--point", "0,2,1,1"], 3),
        ]
        for argv, want in expect:
            code, _, _ = run_cli(argv)
            r.flag(f"exit_code_{want}", code == want, f"{' '.join(argv)} -> {code}")
    return r


CRITERIA: List[Callable[[int], CriterionResult]] = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
    criterion_9,
]


def run_all(seed: int = 0, log: Optional[Callable[[str], None]] = print) -> List[CriterionResult]:
    results = []
    for fn in CRITERIA:
        res = fn(seed)
        if log is not None:
            log(res.line())
        results.append(res)
    return results
