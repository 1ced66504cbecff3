"""Named example metrics and embeddings.

Every entry carries default parameters and sampling ranges that keep clear of
coordinate singularities.
"""

from __future__ import annotations

import math
import re
from typing import Callable, Dict, List, Union

from .constructs import EmbeddingSpec
from .geometry import MetricSpec

PI = math.pi


def minkowski() -> MetricSpec:
    return MetricSpec.from_matrix(
        "minkowski", ["t", "x", "y", "z"],
        [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
        signature=(3, 1),
        sample_ranges={c: (-2.0, 2.0) for c in "txyz"})


def schwarzschild(M: float = 1.0) -> MetricSpec:
    return MetricSpec.from_matrix(
        "schwarzschild", ["t", "r", "theta", "phi"],
        [["-(1 - 2*M/r)", 0, 0, 0],
         [0, "1/(1 - 2*M/r)", 0, 0],
         [0, 0, "r^2", 0],
         [0, 0, 0, "r^2*sin(theta)^2"]],
        params={"M": M}, signature=(3, 1),
        sample_ranges={"t": (-5.0, 5.0), "r": (2.5 * M, 12.0 * M),
                       "theta": (0.3, PI - 0.3), "phi": (0.0, 2 * PI)})


def de_sitter_static(L: float = 3.0) -> MetricSpec:
    """Static patch of de Sitter space; constant curvature ``1/L^2``."""
    return MetricSpec.from_matrix(
        "de_sitter_static", ["t", "r", "theta", "phi"],
        [["-(1 - r^2/L^2)", 0, 0, 0],
         [0, "1/(1 - r^2/L^2)", 0, 0],
         [0, 0, "r^2", 0],
         [0, 0, 0, "r^2*sin(theta)^2"]],
        params={"L": L}, signature=(3, 1),
        sample_ranges={"t": (-3.0, 3.0), "r": (0.3 * L, 0.8 * L),
                       "theta": (0.3, PI - 0.3), "phi": (0.0, 2 * PI)})


def godel(omega: float = 1.0) -> MetricSpec:
    """``ds^2 = a^2 [-(dt + e^x dz)^2 + dx^2 + dy^2 + e^(2x) dz^2 / 2]`` with ``a^2 = 1/(2 omega^2)``."""
    a2 = "1/(2*omega^2)"
    return MetricSpec.from_matrix(
        "godel", ["t", "x", "y", "z"],
        [[f"-{a2}", 0, 0, f"-{a2}*exp(x)"],
         [0, a2, 0, 0],
         [0, 0, a2, 0],
         [f"-{a2}*exp(x)", 0, 0, f"-{a2}*exp(2*x)/2"]],
        params={"omega": omega}, signature=(3, 1),
        sample_ranges={c: (-1.0, 1.0) for c in "txyz"})


def pp_wave(A: float = 1.0) -> MetricSpec:
    """Vacuum plane-fronted wave ``2 du dv + A (x^2 - y^2) cos(u) du^2 + dx^2 + dy^2``.

    ``k = d/dv`` is a covariantly constant null vector.
    """
    return MetricSpec.from_matrix(
        "pp_wave", ["u", "v", "x", "y"],
        [["A*(x^2 - y^2)*cos(u)", 1, 0, 0],
         [1, 0, 0, 0],
         [0, 0, 1, 0],
         [0, 0, 0, 1]],
        params={"A": A}, signature=(3, 1),
        sample_ranges={"u": (-1.0, 1.0), "v": (-1.0, 1.0), "x": (-1.0, 1.0), "y": (-1.0, 1.0)})


def frw_flat(p: float = 2.0 / 3.0, scale_factor: str = None, **params) -> MetricSpec:
    """Spatially flat FRW, ``-dt^2 + a(t)^2 (dx^2 + dy^2 + dz^2)``; default ``a = t^p``."""
    a = scale_factor or "t^p"
    pars = {"p": p} if scale_factor is None else {}
    pars.update(params)
    return MetricSpec.from_matrix(
        "frw_flat", ["t", "x", "y", "z"],
        [[-1, 0, 0, 0], [0, f"({a})^2", 0, 0], [0, 0, f"({a})^2", 0], [0, 0, 0, f"({a})^2"]],
        params=pars, signature=(3, 1),
        sample_ranges={"t": (0.5, 2.0), "x": (-1.0, 1.0), "y": (-1.0, 1.0), "z": (-1.0, 1.0)})


def sphere_metric(n: int = 2, r: float = 1.0) -> MetricSpec:
    """Round ``n``-sphere of radius ``r`` in nested polar angles ``chi1..chin``."""
    if n < 2:
        raise ValueError("n >= 2 required")
    coords = [f"chi{i + 1}" for i in range(n)]
    rows = [[0] * n for _ in range(n)]
    prefix = "r^2"
    for i, c in enumerate(coords):
        rows[i][i] = prefix
        prefix = f"{prefix}*sin({c})^2"
    ranges = {c: (0.4, PI - 0.4) for c in coords}
    ranges[coords[-1]] = (0.0, 2 * PI)
    return MetricSpec.from_matrix(f"sphere_metric({n})", coords, rows, params={"r": r},
                                  signature=(n, 0), sample_ranges=ranges)


# --- embeddings -------------------------------------------------------------------

def sphere_embedding(n: int = 2, r: float = 1.0) -> EmbeddingSpec:
    """Round ``S^n`` of radius ``r`` in Euclidean ``R^(n+1)``."""
    if n < 2:
        raise ValueError("n >= 2 required")
    coords = [f"chi{i + 1}" for i in range(n)]
    maps = []
    prefix = "r"
    for c in coords[:-1]:
        maps.append(f"{prefix}*cos({c})")
        prefix = f"{prefix}*sin({c})"
    maps.append(f"{prefix}*cos({coords[-1]})")
    maps.append(f"{prefix}*sin({coords[-1]})")
    maps.reverse()  # put the polar axis last so the outward normal has a positive last component there
    ranges = {c: (0.4, PI / 2 - 0.1) for c in coords}
    ranges[coords[-1]] = (0.0, 2 * PI)
    return EmbeddingSpec(f"sphere_embedding({n})", tuple(coords), tuple(maps), (1,) * (n + 1),
                         {"r": r}, ranges)


def hyperboloid_embedding(L: float = 2.0) -> EmbeddingSpec:
    """de Sitter space ``-T^2 + X1^2 + ... + X4^2 = L^2`` in ``R^(1,4)``, global chart."""
    coords = ("tau", "chi", "theta", "phi")
    maps = ("L*sinh(tau)",
            "L*cosh(tau)*sin(chi)*sin(theta)*cos(phi)",
            "L*cosh(tau)*sin(chi)*sin(theta)*sin(phi)",
            "L*cosh(tau)*sin(chi)*cos(theta)",
            "L*cosh(tau)*cos(chi)")
    ranges = {"tau": (-1.0, 1.0), "chi": (0.3, PI / 2 - 0.2), "theta": (0.3, PI - 0.3), "phi": (0.0, 2 * PI)}
    return EmbeddingSpec("hyperboloid_embedding", coords, maps, (-1, 1, 1, 1, 1), {"L": L}, ranges)


def ellipsoid_embedding(axes=(1.0, 1.3, 1.7, 2.2, 2.9)) -> EmbeddingSpec:
    """Ellipsoid ``sum (X_i/a_i)^2 = 1`` with distinct semi-axes, as a graph over its top cap."""
    n = len(axes) - 1
    coords = tuple(f"u{i + 1}" for i in range(n))
    params = {f"a{i + 1}": float(a) for i, a in enumerate(axes)}
    maps = [f"a{i + 1}*u{i + 1}" for i in range(n)]
    inner = " - ".join(f"u{i + 1}^2" for i in range(n))
    maps.append(f"a{n + 1}*sqrt(1 - {inner})")
    ranges = {c: (-0.35, 0.35) for c in coords}
    return EmbeddingSpec("ellipsoid_embedding", coords, tuple(maps), (1,) * (n + 1), params, ranges)


def paraboloid_embedding(n: int = 2) -> EmbeddingSpec:
    """``X^(n+1) = sum (X^i)^2 / 2``."""
    coords = tuple(f"x{i + 1}" for i in range(n))
    maps = list(coords) + ["(" + " + ".join(f"{c}^2" for c in coords) + ") / 2"]
    return EmbeddingSpec(f"paraboloid_embedding({n})", coords, tuple(maps), (1,) * (n + 1), {},
                         {c: (-1.0, 1.0) for c in coords})


def hyperplane_embedding(n: int = 4) -> EmbeddingSpec:
    """The tilted hyperplane ``X^(n+1) = sum c_i X^i`` with small fixed slopes."""
    coords = tuple(f"x{i + 1}" for i in range(n))
    slope = " + ".join(f"{0.1 * (i + 1)!r}*{c}" for i, c in enumerate(coords))
    return EmbeddingSpec(f"hyperplane_embedding({n})", coords, tuple(list(coords) + [slope]),
                         (1,) * (n + 1), {}, {c: (-1.0, 1.0) for c in coords})


def lorentz_graph_embedding(lam: float = 0.3, mu: float = 0.7) -> EmbeddingSpec:
    """Graph ``X^4 = lam (t^2 + x^2 + y^2)/2 + mu z^2/2`` in ``R^(1,4)``.

    At the origin the induced Ricci tensor has perfect-fluid form with respect
    to ``d/dt`` while the Weyl tensor is nonzero.
    """
    coords = ("t", "x", "y", "z")
    maps = ("t", "x", "y", "z", "lam*(t^2 + x^2 + y^2)/2 + mu*z^2/2")
    return EmbeddingSpec("lorentz_graph_embedding", coords, maps, (-1, 1, 1, 1, 1),
                         {"lam": lam, "mu": mu}, {c: (-0.3, 0.3) for c in coords})


_METRICS: Dict[str, Callable] = {
    "minkowski": minkowski,
    "schwarzschild": schwarzschild,
    "de_sitter_static": de_sitter_static,
    "godel": godel,
    "pp_wave": pp_wave,
    "frw_flat": frw_flat,
    "sphere_metric": sphere_metric,
}

_EMBEDDINGS: Dict[str, Callable] = {
    "sphere_embedding": sphere_embedding,
    "hyperboloid_embedding": hyperboloid_embedding,
    "ellipsoid_embedding": ellipsoid_embedding,
    "paraboloid_embedding": paraboloid_embedding,
    "hyperplane_embedding": hyperplane_embedding,
    "lorentz_graph_embedding": lorentz_graph_embedding,
}

#: the four-dimensional Lorentzian metrics used by the verification suites
SPACETIMES = ("minkowski", "schwarzschild", "de_sitter_static", "godel", "pp_wave", "frw_flat")

_CALL = re.compile(r"^([a-z_0-9]+)(?:\((\d+)\))?$")


def names() -> List[str]:
    return sorted(_METRICS) + sorted(_EMBEDDINGS)


def catalog(name: str, **params) -> Union[MetricSpec, EmbeddingSpec]:
    """Look up ``name``; ``sphere_embedding(4)`` style names pass the dimension."""
    m = _CALL.match(name.strip())
    if not m:
        raise KeyError(f"unknown catalog entry {name!r}")
    base, arg = m.group(1), m.group(2)
    factory = _METRICS.get(base) or _EMBEDDINGS.get(base)
    if factory is None:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(names())}")
    if arg is not None:
        return factory(int(arg), **params)
    return factory(**params)
