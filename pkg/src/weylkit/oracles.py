"""Finite-difference oracles, independent of the Taylor arithmetic.

These recompute Christoffel symbols and the Riemann tensor from plain
float evaluations of the metric, to cross-check the jet route.
"""

from __future__ import annotations

import numpy as np

from .expr import as_expression, evaluate
from .geometry import GeometryAt, MetricSpec, compute_geometry
from .tensor import fro, relative


def _fd_metric_derivs(spec: MetricSpec, point, h: float) -> np.ndarray:
    """``dg[i, j, m] = d_i g_jm`` by fourth-order central differences."""
    p = np.array([spec.point_map(point)[c] for c in spec.coords])
    n = spec.dim
    out = np.zeros((n, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        gp, gm = spec.metric_value(p + e), spec.metric_value(p - e)
        gp2, gm2 = spec.metric_value(p + 2 * e), spec.metric_value(p - 2 * e)
        out[i] = (8 * (gp - gm) - (gp2 - gm2)) / (12 * h)
    return out


def christoffel_fd(spec: MetricSpec, point, h: float = 1e-3) -> np.ndarray:
    """``Gamma[k, i, j]`` from differenced metric values."""
    dg = _fd_metric_derivs(spec, point, h)
    ginv = np.linalg.inv(spec.metric_value(point))
    low = 0.5 * (dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0))
    return np.einsum("km,ijm->kij", ginv, low)


def riemann_fd(spec: MetricSpec, point, h: float = 1e-4) -> np.ndarray:
    """``R_abc^m`` from central differences of jet-computed Christoffel symbols."""
    p = np.array([spec.point_map(point)[c] for c in spec.coords])
    n = spec.dim
    gam = compute_geometry(spec, p, order=2, check_signature=False).gamma_at
    dG = np.zeros((n, n, n, n))  # dG[a, m, b, c] = d_a Gamma^m_bc
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        gp = compute_geometry(spec, p + e, order=2, check_signature=False).gamma_at
        gm = compute_geometry(spec, p - e, order=2, check_signature=False).gamma_at
        dG[a] = (gp - gm) / (2 * h)
    dGt = dG.transpose(0, 2, 3, 1)
    return (-dGt + dGt.transpose(1, 0, 2, 3)
            + np.einsum("kac,mbk->abcm", gam, gam) - np.einsum("kbc,mak->abcm", gam, gam))


def christoffel_agreement(spec: MetricSpec, point, G: GeometryAt = None) -> float:
    G = compute_geometry(spec, point, order=2) if G is None else G
    fd = christoffel_fd(spec, point)
    return relative(G.gamma_at - fd, fro(G.gamma_at) + fro(fd) + fro(G.g_at) * 1e-300)


def riemann_agreement(spec: MetricSpec, point, G: GeometryAt = None) -> float:
    G = compute_geometry(spec, point, order=2) if G is None else G
    fd = riemann_fd(spec, point)
    return relative(G.riemann_mixed - fd, fro(G.riemann_mixed) + fro(fd) + fro(G.gamma_at) ** 2)


def taylor_fd_derivative(expr, env: dict, var: str, h: float = 1e-6) -> float:
    """Central difference of an expression in one variable."""
    e = as_expression(expr)
    up, dn = dict(env), dict(env)
    up[var] += h
    dn[var] -= h
    return (evaluate(e, up) - evaluate(e, dn)) / (2 * h)
