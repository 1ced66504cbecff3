"""Dense tensors over one tangent space.

Components are stored row-major with one variance flag per slot: ``"d"``
(covariant, lower) or ``"u"`` (contravariant, upper).

Bracket convention used across the package: ``X_[ab] = X_ab - X_ba``, with no
factor 1/2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import TensorError

_LETTERS = "abcdefghijklmnopqrstuvwxy"


@dataclass(frozen=True, eq=False)
class DenseTensor:
    components: np.ndarray
    variance: Tuple[str, ...]

    def __post_init__(self):
        comps = np.array(self.components, dtype=float)
        comps.setflags(write=False)
        var = tuple(self.variance)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variance", var)
        if any(v not in ("u", "d") for v in var):
            raise TensorError(f"variance flags must be 'u' or 'd', got {var}")
        if comps.ndim != len(var):
            raise TensorError(f"rank {comps.ndim} does not match variance {var}")
        if comps.ndim and len(set(comps.shape)) != 1:
            raise TensorError(f"all slots must have the same dimension, got {comps.shape}")
        if comps.ndim and not 2 <= comps.shape[0] <= 6:
            raise TensorError(f"dimension {comps.shape[0]} outside 2..6")
        if comps.ndim > 5:
            raise TensorError("rank above 5 is not supported")

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def dim(self) -> int:
        return self.components.shape[0] if self.rank else 0

    def __add__(self, other):
        self._check_same(other)
        return DenseTensor(self.components + other.components, self.variance)

    def __sub__(self, other):
        self._check_same(other)
        return DenseTensor(self.components - other.components, self.variance)

    def __mul__(self, scalar):
        return DenseTensor(self.components * float(scalar), self.variance)

    __rmul__ = __mul__

    def _check_same(self, other):
        if self.variance != other.variance or self.components.shape != other.components.shape:
            raise TensorError("operands differ in shape or variance")

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def __repr__(self):
        return f"DenseTensor(dim={self.dim}, variance={''.join(self.variance)!r})"


def outer(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    if a.rank and b.rank and a.dim != b.dim:
        raise TensorError("dimension mismatch in outer product")
    return DenseTensor(np.multiply.outer(a.components, b.components), a.variance + b.variance)


def contract(t: DenseTensor, slot_a: int, slot_b: int) -> DenseTensor:
    """Trace over two slots of opposite variance; remaining slots keep their order."""
    r = t.rank
    if not (0 <= slot_a < r and 0 <= slot_b < r) or slot_a == slot_b:
        raise TensorError(f"invalid slots ({slot_a}, {slot_b}) for rank {r}")
    if t.variance[slot_a] == t.variance[slot_b]:
        raise TensorError("contracted slots must have opposite variance")
    letters = list(_LETTERS[:r])
    letters[slot_b] = letters[slot_a]
    keep = [letters[i] for i in range(r) if i not in (slot_a, slot_b)]
    comps = np.einsum("".join(letters) + "->" + "".join(keep), t.components)
    var = tuple(v for i, v in enumerate(t.variance) if i not in (slot_a, slot_b))
    return DenseTensor(comps, var)


@dataclass(frozen=True, eq=False)
class MetricAt:
    g: DenseTensor
    g_inv: DenseTensor
    det_g: float
    signature_counts: Tuple[int, int]

    @classmethod
    def from_matrix(cls, g) -> "MetricAt":
        g = np.asarray(g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise TensorError("metric must be a square matrix")
        if not np.allclose(g, g.T, rtol=0, atol=1e-14 * max(1.0, np.abs(g).max())):
            raise TensorError("metric must be symmetric")
        g = 0.5 * (g + g.T)
        det = float(np.linalg.det(g))
        scale = float(np.prod(np.linalg.norm(g, axis=1)))
        if abs(det) <= 1e-12 * scale or det == 0.0:
            from .errors import DegenerateMetricError
            raise DegenerateMetricError(f"metric is degenerate (det g = {det:.3e})")
        ev = np.linalg.eigvalsh(g)
        sig = (int(np.sum(ev > 0)), int(np.sum(ev < 0)))
        return cls(DenseTensor(g, ("d", "d")), DenseTensor(np.linalg.inv(g), ("u", "u")), det, sig)

    @property
    def dim(self) -> int:
        return self.g.dim

    @property
    def lorentzian(self) -> bool:
        return self.signature_counts[1] == 1

    def dot(self, u, v) -> float:
        """Inner product of two contravariant component vectors."""
        return float(np.asarray(u) @ self.g.components @ np.asarray(v))

    def lower(self, u) -> np.ndarray:
        return self.g.components @ np.asarray(u, dtype=float)

    def raise_(self, w) -> np.ndarray:
        return self.g_inv.components @ np.asarray(w, dtype=float)


def raise_lower(t: DenseTensor, slot: int, m: MetricAt) -> DenseTensor:
    """Flip the variance of ``slot`` using ``g`` or its inverse."""
    if not 0 <= slot < t.rank:
        raise TensorError(f"slot {slot} out of range for rank {t.rank}")
    if t.dim != m.dim:
        raise TensorError("tensor and metric dimensions differ")
    mat = m.g.components if t.variance[slot] == "u" else m.g_inv.components
    comps = np.moveaxis(np.tensordot(mat, t.components, axes=([1], [slot])), 0, slot)
    var = list(t.variance)
    var[slot] = "d" if var[slot] == "u" else "u"
    return DenseTensor(comps, tuple(var))


def antisymmetrize_pair(t: DenseTensor, slot_a: int, slot_b: int) -> DenseTensor:
    """``t(..a..b..) - t(..b..a..)``, without the customary 1/2."""
    if not (0 <= slot_a < t.rank and 0 <= slot_b < t.rank) or slot_a == slot_b:
        raise TensorError("invalid slot pair")
    if t.variance[slot_a] != t.variance[slot_b]:
        raise TensorError("antisymmetrized slots must share variance")
    return DenseTensor(t.components - np.swapaxes(t.components, slot_a, slot_b), t.variance)


def levi_civita_symbol(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


def levi_civita(m: MetricAt) -> DenseTensor:
    """Covariant volume form with ``eps_0123 = +sqrt|det g|`` (chart orientation)."""
    if m.dim != 4:
        raise TensorError("the volume form is only provided for dim = 4")
    return DenseTensor(np.sqrt(abs(m.det_g)) * levi_civita_symbol(4), ("d",) * 4)


# --- array helpers used by the geometry modules ---------------------------

def fro(x) -> float:
    return float(np.linalg.norm(np.ravel(x)))


def relative(residual, *scales) -> float:
    """``|residual|_F / (sum of operand scales + 1e-300)``."""
    return fro(residual) / (float(sum(scales)) + 1e-300)
