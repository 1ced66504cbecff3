"""Truncated multivariate Taylor arithmetic.

Two layers live here:

* ``Jet``: a tensor-valued truncated Taylor polynomial.  The last array axis
  holds coefficients ``f_alpha = d^alpha f / alpha!`` over all multi-indices
  with ``|alpha| <= K``.  Products are convolutions over that axis, so the
  Leibniz and chain rules hold exactly up to rounding.
* ``TaylorScalar``: the scalar case, with Python operators, used by the
  expression evaluator.

A jet remembers the order up to which its coefficients are valid.  Taking a
derivative lowers that order by one; products truncate to the smaller order.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .errors import DomainError


class MultiIndexTable:
    """Enumeration of multi-indices ``|alpha| <= order`` in ``nvars`` variables.

    Indices are sorted by total degree, so the coefficients valid up to
    degree ``k`` always form the prefix ``[:count(k)]``.
    """

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        alphas = []
        for deg in range(order + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), deg):
                a = [0] * nvars
                for v in combo:
                    a[v] += 1
                alphas.append(tuple(a))
        self.alphas = alphas
        self.index = {a: i for i, a in enumerate(alphas)}
        self.size = len(alphas)
        self.degree = np.array([sum(a) for a in alphas])
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in a) for a in alphas], dtype=float
        )
        self._counts = [int(np.sum(self.degree <= k)) for k in range(order + 1)]

        ia, ib, it = [], [], []
        for i, a in enumerate(alphas):
            for j, b in enumerate(alphas):
                if self.degree[i] + self.degree[j] <= order:
                    ia.append(i)
                    ib.append(j)
                    it.append(self.index[tuple(x + y for x, y in zip(a, b))])
        ia, ib, it = map(np.asarray, (ia, ib, it))
        perm = np.argsort(it, kind="stable")
        self._ia, self._ib, self._it = ia[perm], ib[perm], it[perm]
        self._pairs = {}

        # d/dx_v maps coefficient alpha + e_v to alpha with factor alpha_v + 1
        self._shift = []
        for v in range(nvars):
            dst, src, fac = [], [], []
            for i, a in enumerate(alphas):
                if self.degree[i] < order:
                    b = list(a)
                    b[v] += 1
                    dst.append(i)
                    src.append(self.index[tuple(b)])
                    fac.append(a[v] + 1)
            self._shift.append((np.array(dst, int), np.array(src, int), np.array(fac, float)))

    def count(self, k: int) -> int:
        return self._counts[k]

    def pairs(self, k: int):
        """Convolution pairs whose target degree is at most ``k``."""
        if k not in self._pairs:
            mask = self.degree[self._it] <= k
            ia, ib, it = self._ia[mask], self._ib[mask], self._it[mask]
            starts = np.flatnonzero(np.r_[True, it[1:] != it[:-1]])
            self._pairs[k] = (ia, ib, starts)
        return self._pairs[k]

    def shift(self, v: int):
        return self._shift[v]


@lru_cache(maxsize=None)
def table(nvars: int, order: int) -> MultiIndexTable:
    return MultiIndexTable(nvars, order)


class Jet:
    """Tensor of truncated Taylor polynomials; ``data.shape == shape + (table.size,)``."""

    __slots__ = ("data", "order", "table")
    __array_priority__ = 100

    def __init__(self, data, order: int, tbl: MultiIndexTable):
        self.data = np.asarray(data, dtype=float)
        self.order = int(order)
        self.table = tbl

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, tbl: MultiIndexTable, order=None):
        value = np.asarray(value, dtype=float)
        data = np.zeros(value.shape + (tbl.size,))
        data[..., 0] = value
        return cls(data, tbl.order if order is None else order, tbl)

    @classmethod
    def variable(cls, v: int, value: float, tbl: MultiIndexTable):
        data = np.zeros(tbl.size)
        data[0] = value
        if tbl.order >= 1:
            e = [0] * tbl.nvars
            e[v] = 1
            data[tbl.index[tuple(e)]] = 1.0
        return cls(data, tbl.order, tbl)

    @classmethod
    def stack(cls, jets, shape=None):
        jets = list(jets)
        order = min(j.order for j in jets)
        data = np.stack([j.data for j in jets])
        if shape is not None:
            data = data.reshape(tuple(shape) + (data.shape[-1],))
        return cls(data, order, jets[0].table)

    # -- views ------------------------------------------------------------
    @property
    def shape(self):
        return self.data.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.data[..., 0]

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if len(idx) > len(self.shape) or any(i is Ellipsis for i in idx):
            raise IndexError("jets are indexed over tensor axes only")
        return Jet(self.data[idx], self.order, self.table)

    def transpose(self, *axes):
        return Jet(np.transpose(self.data, tuple(axes) + (self.data.ndim - 1,)),
                   self.order, self.table)

    def nilpotent(self) -> "Jet":
        d = self.data.copy()
        d[..., 0] = 0.0
        return Jet(d, self.order, self.table)

    def coefficient(self, alpha) -> np.ndarray:
        if sum(alpha) > self.order:
            raise ValueError(f"coefficient {alpha} beyond valid order {self.order}")
        return self.data[..., self.table.index[tuple(alpha)]]

    def partial(self, alpha) -> np.ndarray:
        """Mixed partial derivative ``d^alpha f`` at the expansion point."""
        return self.coefficient(alpha) * self.table.factorial[self.table.index[tuple(alpha)]]

    # -- calculus ---------------------------------------------------------
    def d(self, v: int) -> "Jet":
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        dst, src, fac = self.table.shift(v)
        out = np.zeros_like(self.data)
        out[..., dst] = self.data[..., src] * fac
        return Jet(out, self.order - 1, self.table)

    def grad(self) -> "Jet":
        """Partial derivatives with the derivative index in front."""
        parts = [self.d(v).data for v in range(self.table.nvars)]
        return Jet(np.stack(parts), self.order - 1, self.table)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.table, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        return Jet(self.data + other.data, min(self.order, other.order), self.table)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return Jet(self.data - other.data, min(self.order, other.order), self.table)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return Jet(-self.data, self.order, self.table)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jeinsum("...,...->...", self, other)
        other = np.asarray(other, dtype=float)
        return Jet(self.data * other[..., None], self.order, self.table)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        other = np.asarray(other, dtype=float)
        return Jet(self.data / other[..., None], self.order, self.table)

    def __repr__(self):
        return f"Jet(shape={self.shape}, order={self.order}, nvars={self.table.nvars})"


def _subscripts(sub):
    ins, out = sub.split("->")
    return ins.split(","), out


def jeinsum(sub: str, a, b) -> Jet:
    """``np.einsum`` over tensor indices with Taylor convolution on coefficients.

    Either operand may be a plain array (a constant field).  Subscripts must
    not use the letter ``Z``.
    """
    (sa, sb), out = _subscripts(sub)
    if not isinstance(a, Jet):
        return Jet(np.einsum(f"{sa},{sb}Z->{out}Z", np.asarray(a, float), b.data, optimize=True),
                   b.order, b.table)
    if not isinstance(b, Jet):
        return Jet(np.einsum(f"{sa}Z,{sb}->{out}Z", a.data, np.asarray(b, float), optimize=True),
                   a.order, a.table)
    tbl = a.table
    k = min(a.order, b.order)
    ia, ib, starts = tbl.pairs(k)
    prod = np.einsum(f"{sa}Z,{sb}Z->{out}Z", a.data[..., ia], b.data[..., ib], optimize=True)
    red = np.add.reduceat(prod, starts, axis=-1)
    data = np.zeros(red.shape[:-1] + (tbl.size,))
    data[..., : red.shape[-1]] = red
    return Jet(data, k, tbl)


def compose(a: Jet, derivs) -> Jet:
    """Elementwise ``f(a)`` given ``derivs[k] = f^(k)(a0)`` for ``k = 0..order``."""
    h = a.nilpotent()
    derivs = [np.asarray(dk, dtype=float) for dk in derivs]
    out = Jet.constant(derivs[0], a.table, a.order)
    power = None
    for k in range(1, a.order + 1):
        power = h if power is None else power * h
        out = out + power * (derivs[k] / math.factorial(k))
    return out


def _check_nonzero(x, what):
    if np.any(x == 0.0):
        raise DomainError(f"division by zero in {what}")


def reciprocal(a: Jet) -> Jet:
    x = a.value
    _check_nonzero(x, "reciprocal")
    derivs = [((-1) ** k) * math.factorial(k) / x ** (k + 1) for k in range(a.order + 1)]
    out = compose(a, derivs)
    out.data[..., 0] = 1.0 / x
    return out


def sqrt(a: Jet) -> Jet:
    x = a.value
    if np.any(x <= 0.0):
        raise DomainError("sqrt of non-positive value in jet")
    derivs = []
    coef = 1.0
    for k in range(a.order + 1):
        derivs.append(coef * x ** (0.5 - k))
        coef *= 0.5 - k
    out = compose(a, derivs)
    out.data[..., 0] = np.sqrt(x)
    return out


def matrix_inverse(a: Jet) -> Jet:
    """Inverse of a jet of square matrices (leading two axes)."""
    a0inv = np.linalg.inv(a.value)
    m = jeinsum("ij,jk->ik", -a0inv, a.nilpotent())
    total = Jet.constant(a0inv, a.table, a.order)
    term = total
    for _ in range(a.order):
        term = jeinsum("ij,jk->ik", m, term)
        total = total + term
    return total


def determinant(a: Jet) -> Jet:
    """Leibniz-formula determinant of a jet matrix (small sizes only)."""
    n = a.shape[0]
    total = Jet.constant(0.0, a.table, a.order)
    for perm in itertools.permutations(range(n)):
        sign = _perm_sign(perm)
        term = a[0, perm[0]]
        for i in range(1, n):
            term = term * a[i, perm[i]]
        total = total + term * sign
    return total


def _perm_sign(perm) -> int:
    sign, seen = 1, list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


# --- scalar front end used by the expression evaluator --------------------

_FUNCS_CYCLIC = {
    "sin": lambda x: [math.sin(x), math.cos(x), -math.sin(x), -math.cos(x)],
    "cos": lambda x: [math.cos(x), -math.sin(x), -math.cos(x), math.sin(x)],
    "sinh": lambda x: [math.sinh(x), math.cosh(x)],
    "cosh": lambda x: [math.cosh(x), math.sinh(x)],
}


class TaylorScalar:
    """A real value together with all mixed partials up to ``order``.

    ``nvars`` seeded variables; with ``nvars == 0`` it degenerates to plain
    float arithmetic on ``value``.
    """

    __slots__ = ("jet",)

    def __init__(self, jet: Jet):
        self.jet = jet

    @classmethod
    def constant(cls, value: float, nvars: int, order: int = 3):
        return cls(Jet.constant(float(value), table(nvars, order)))

    @classmethod
    def variable(cls, v: int, value: float, nvars: int, order: int = 3):
        return cls(Jet.variable(v, float(value), table(nvars, order)))

    @property
    def value(self) -> float:
        return float(self.jet.data[0])

    @property
    def order(self) -> int:
        return self.jet.order

    @property
    def nvars(self) -> int:
        return self.jet.table.nvars

    @property
    def coefficients(self) -> np.ndarray:
        return self.jet.data

    def partial(self, *alpha) -> float:
        """``partial(1, 0)`` is d/dx_0, ``partial(0, 2)`` is d^2/dx_1^2, etc."""
        if len(alpha) == 1 and isinstance(alpha[0], (tuple, list)):
            alpha = tuple(alpha[0])
        return float(self.jet.partial(alpha))

    def derivative(self, *vars_) -> float:
        """Partial derivative by a list of variable positions, e.g. ``derivative(0, 0, 1)``."""
        alpha = [0] * self.nvars
        for v in vars_:
            alpha[v] += 1
        return self.partial(tuple(alpha))

    def is_constant(self) -> bool:
        return not np.any(self.jet.data[1:])

    # arithmetic: the order-0 coefficient is always computed with the same
    # float operation as the plain evaluator, so the two agree bit-for-bit
    def _wrap(self, other):
        if isinstance(other, TaylorScalar):
            return other
        return TaylorScalar(Jet.constant(float(other), self.jet.table, self.jet.order))

    def __add__(self, other):
        other = self._wrap(other)
        out = self.jet + other.jet
        out.data[0] = self.value + other.value
        return TaylorScalar(out)

    def __radd__(self, other):
        return self._wrap(other) + self

    def __sub__(self, other):
        other = self._wrap(other)
        out = self.jet - other.jet
        out.data[0] = self.value - other.value
        return TaylorScalar(out)

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __neg__(self):
        return TaylorScalar(-self.jet)

    def __mul__(self, other):
        other = self._wrap(other)
        out = _scalar_mul(self.jet, other.jet)
        out.data[0] = self.value * other.value
        return TaylorScalar(out)

    def __rmul__(self, other):
        return self._wrap(other) * self

    def __truediv__(self, other):
        other = self._wrap(other)
        if other.value == 0.0:
            raise DomainError("division by zero")
        out = _scalar_mul(self.jet, reciprocal(other.jet))
        out.data[0] = self.value / other.value
        return TaylorScalar(out)

    def __rtruediv__(self, other):
        return self._wrap(other) / self

    def __repr__(self):
        return f"TaylorScalar(value={self.value!r}, order={self.order}, nvars={self.nvars})"

    # elementary functions --------------------------------------------------
    def apply(self, name: str) -> "TaylorScalar":
        x = self.value
        k = self.order
        if name in _FUNCS_CYCLIC:
            cyc = _FUNCS_CYCLIC[name](x)
            derivs = [cyc[i % len(cyc)] for i in range(k + 1)]
            out = compose(self.jet, derivs)
            out.data[0] = getattr(math, name)(x)
        elif name == "exp":
            e = math.exp(x)
            out = compose(self.jet, [e] * (k + 1))
            out.data[0] = e
        elif name == "log":
            if x <= 0.0:
                raise DomainError("log of non-positive value")
            derivs = [math.log(x)] + [((-1) ** (i - 1)) * math.factorial(i - 1) / x ** i
                                      for i in range(1, k + 1)]
            out = compose(self.jet, derivs)
            out.data[0] = math.log(x)
        elif name == "sqrt":
            if x < 0.0 or (x == 0.0 and not self.is_constant()):
                raise DomainError("sqrt of negative value")
            if x == 0.0:
                out = Jet.constant(0.0, self.jet.table, self.jet.order)
            else:
                out = sqrt(self.jet)
                out.data[0] = math.sqrt(x)
        elif name in ("tan", "tanh"):
            if name == "tan" and math.cos(x) == 0.0:
                raise DomainError("tan at a pole")
            t = getattr(math, name)(x)
            # every derivative is a polynomial in t, since t' = 1 + s t^2;
            # this avoids sinh/cosh overflow where tanh itself saturates
            s = 1.0 if name == "tan" else -1.0
            poly = np.polynomial.Polynomial([0.0, 1.0])
            step = np.polynomial.Polynomial([1.0, 0.0, s])
            derivs = []
            for _ in range(k + 1):
                derivs.append(poly(t))
                poly = step * poly.deriv()
            out = compose(self.jet, derivs)
            out.data[0] = t
        else:
            raise ValueError(f"unknown function {name!r}")
        return TaylorScalar(out)


def _scalar_mul(a: Jet, b: Jet) -> Jet:
    tbl = a.table
    k = min(a.order, b.order)
    ia, ib, starts = tbl.pairs(k)
    red = np.add.reduceat(a.data[ia] * b.data[ib], starts)
    data = np.zeros(tbl.size)
    data[: red.shape[0]] = red
    return Jet(data, k, tbl)
