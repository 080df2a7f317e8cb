"""Truncated multivariate Taylor arithmetic (forward-mode jets up to order 4).

A :class:`TaylorScalar` stores the coefficients of a polynomial

    f(x0 + h) = sum_{|a| <= K} c_a h^a,      c_a = (d^a f)(x0) / a!

over all multi-indices ``a`` in ``n`` variables with total degree at most
``K``.  Arithmetic (+, -, *, /), elementary functions and per-axis
differentiation are exact on this truncated algebra, so evaluating a
closed-form field on seeded coordinates yields machine-accurate partial
derivatives of every quantity computed downstream, including ones with no
closed form of their own (Christoffel symbols, curvature contractions...).

Multiplication uses a precomputed sparse table of index triples
(i, j) -> k with alpha_i + alpha_j = alpha_k, shared per (nvars, order)
context.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import InsufficientJet

MAX_ORDER = 4


def _multi_indices(nvars: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices with |a| <= order, graded lexicographic."""

    def comps(total, slots):
        if slots == 1:
            yield (total,)
            return
        for v in range(total + 1):
            for rest in comps(total - v, slots - 1):
                yield (v,) + rest

    out: list[tuple[int, ...]] = []
    for total in range(order + 1):
        out.extend(sorted(comps(total, nvars)))
    return out


class TaylorContext:
    """Shared tables for one (nvars, order) truncated polynomial algebra."""

    def __init__(self, nvars: int, order: int):
        if not (1 <= nvars):
            raise ValueError("nvars must be >= 1")
        if not (0 <= order <= MAX_ORDER):
            raise InsufficientJet(f"jet order {order} outside supported range 0..{MAX_ORDER}")
        self.nvars = nvars
        self.order = order
        self.indices = _multi_indices(nvars, order)
        self.ncoef = len(self.indices)
        self.index_of = {a: i for i, a in enumerate(self.indices)}
        self.degrees = np.array([sum(a) for a in self.indices], dtype=np.intp)

        mi, mj, mk = [], [], []
        for i, a in enumerate(self.indices):
            for j, b in enumerate(self.indices):
                c = tuple(ai + bi for ai, bi in zip(a, b))
                k = self.index_of.get(c)
                if k is not None:
                    mi.append(i)
                    mj.append(j)
                    mk.append(k)
        self._mi = np.array(mi, dtype=np.intp)
        self._mj = np.array(mj, dtype=np.intp)
        self._mk = np.array(mk, dtype=np.intp)

        # per-axis differentiation: coeff[a - e_ax] += a_ax * coeff[a]
        self._dsrc, self._ddst, self._dfac = [], [], []
        for ax in range(nvars):
            src, dst, fac = [], [], []
            for i, a in enumerate(self.indices):
                if a[ax] >= 1:
                    b = list(a)
                    b[ax] -= 1
                    src.append(i)
                    dst.append(self.index_of[tuple(b)])
                    fac.append(a[ax])
            self._dsrc.append(np.array(src, dtype=np.intp))
            self._ddst.append(np.array(dst, dtype=np.intp))
            self._dfac.append(np.array(fac, dtype=float))

        self.factorials = np.array(
            [math.prod(math.factorial(v) for v in a) for a in self.indices], dtype=float
        )

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.bincount(self._mk, weights=a[self._mi] * b[self._mj], minlength=self.ncoef)


@lru_cache(maxsize=None)
def get_context(nvars: int, order: int) -> TaylorContext:
    return TaylorContext(nvars, order)


class TaylorScalar:
    """One element of the truncated Taylor algebra. Immutable by convention."""

    __slots__ = ("ctx", "coef")
    __array_priority__ = 100.0  # beat ndarray in mixed binary ops

    def __init__(self, ctx: TaylorContext, coef: np.ndarray):
        self.ctx = ctx
        self.coef = coef

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, ctx: TaylorContext, value: float) -> "TaylorScalar":
        c = np.zeros(ctx.ncoef)
        c[0] = value
        return cls(ctx, c)

    @classmethod
    def variable(cls, ctx: TaylorContext, axis: int, value: float) -> "TaylorScalar":
        c = np.zeros(ctx.ncoef)
        c[0] = value
        if ctx.order >= 1:
            unit = tuple(1 if i == axis else 0 for i in range(ctx.nvars))
            c[ctx.index_of[unit]] = 1.0
        return cls(ctx, c)

    # -- inspection ----------------------------------------------------
    @property
    def value(self) -> float:
        return float(self.coef[0])

    def partial(self, alpha: tuple[int, ...]) -> float:
        """Value of the mixed partial d^alpha at the seed point."""
        i = self.ctx.index_of.get(tuple(alpha))
        if i is None:
            raise InsufficientJet(f"partial {alpha} exceeds jet order {self.ctx.order}")
        return float(self.coef[i] * self.ctx.factorials[i])

    def derivative_array(self, m: int) -> np.ndarray:
        """Dense symmetric array of all order-m partials, shape (nvars,)*m."""
        n = self.ctx.nvars
        if m == 0:
            return np.array(self.value)
        out = np.empty((n,) * m)
        for idx in np.ndindex(*(n,) * m):
            alpha = [0] * n
            for ax in idx:
                alpha[ax] += 1
            out[idx] = self.partial(tuple(alpha))
        return out

    # -- algebra -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TaylorScalar):
            if other.ctx is not self.ctx:
                raise ValueError("mixed Taylor contexts")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return TaylorScalar.constant(self.ctx, float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return TaylorScalar(self.ctx, self.coef + o.coef)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return TaylorScalar(self.ctx, self.coef - o.coef)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return TaylorScalar(self.ctx, o.coef - self.coef)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return TaylorScalar(self.ctx, self.coef * float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return TaylorScalar(self.ctx, self.ctx.mul(self.coef, o.coef))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            return TaylorScalar(self.ctx, self.coef / float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._reciprocal()

    def __neg__(self):
        return TaylorScalar(self.ctx, -self.coef)

    def __pos__(self):
        return self

    def __abs__(self):
        return abs(self.value)

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            result = TaylorScalar.constant(self.ctx, 1.0)
            for _ in range(int(p)):
                result = result * self
            return result
        return self._compose(lambda k, c: _pow_series(float(p), k, c))

    # -- composition ---------------------------------------------------
    def _nilpotent(self):
        tilde = self.coef.copy()
        tilde[0] = 0.0
        return TaylorScalar(self.ctx, tilde)

    def _compose(self, series) -> "TaylorScalar":
        """f(self) where series(k, c0) gives f^(k)(c0)/k! for k = 0..order."""
        K = self.ctx.order
        c0 = self.value
        u = self._nilpotent()
        # Horner in the nilpotent part: u^(K+1) = 0 exactly.
        result = TaylorScalar.constant(self.ctx, series(K, c0))
        for k in range(K - 1, -1, -1):
            result = result * u + series(k, c0)
        return result

    def _reciprocal(self):
        c0 = self.value
        if c0 == 0.0:
            raise ZeroDivisionError("division by Taylor scalar with zero value")
        return self._compose(lambda k, c: (-1.0) ** k / c ** (k + 1))

    def exp(self):
        return self._compose(lambda k, c: math.exp(c) / math.factorial(k))

    def log(self):
        if self.value <= 0.0:
            raise ValueError("log of non-positive Taylor scalar")
        return self._compose(
            lambda k, c: math.log(c) if k == 0 else (-1.0) ** (k + 1) / (k * c**k)
        )

    def sqrt(self):
        return self ** 0.5

    def sin(self):
        return self._compose(lambda k, c: math.sin(c + 0.5 * math.pi * k) / math.factorial(k))

    def cos(self):
        return self._compose(lambda k, c: math.cos(c + 0.5 * math.pi * k) / math.factorial(k))

    def tanh(self):
        # derivative coefficients via the recurrence on t = tanh(c)
        K = self.ctx.order
        c0 = self.value
        t = math.tanh(c0)
        # poly[k] = list of coefficients of tanh^m in d^k tanh
        derivs = [t]
        poly = np.zeros(K + 2)
        poly[1] = 1.0  # tanh itself
        powers = np.array([t**m for m in range(K + 2)])
        for _ in range(K):
            dpoly = np.zeros(K + 2)
            for m in range(1, K + 2):
                if poly[m]:
                    # d/dc t^m = m t^(m-1) (1 - t^2)
                    dpoly[m - 1] += m * poly[m]
                    if m + 1 < K + 2:
                        dpoly[m + 1] -= m * poly[m]
            poly = dpoly
            derivs.append(float(poly @ powers))
        return self._compose(lambda k, c: derivs[k] / math.factorial(k))

    def deriv(self, axis: int) -> "TaylorScalar":
        """Partial derivative along one axis; result lives at order-1."""
        ctx = self.ctx
        if ctx.order == 0:
            raise InsufficientJet("cannot differentiate an order-0 jet")
        sub = get_context(ctx.nvars, ctx.order - 1)
        out = np.zeros(ctx.ncoef)
        np.add.at(out, ctx._ddst[axis], self.coef[ctx._dsrc[axis]] * ctx._dfac[axis])
        # re-embed into the lower-order context (leading block of indices)
        return TaylorScalar(sub, out[: sub.ncoef].copy())

    def lower(self, order: int) -> "TaylorScalar":
        """Truncate to a lower-order context."""
        if order == self.ctx.order:
            return self
        if order > self.ctx.order:
            raise InsufficientJet("cannot raise jet order by truncation")
        sub = get_context(self.ctx.nvars, order)
        return TaylorScalar(sub, self.coef[: sub.ncoef].copy())

    def __repr__(self):
        return f"TaylorScalar(n={self.ctx.nvars}, K={self.ctx.order}, value={self.value})"


def _pow_series(p: float, k: int, c: float) -> float:
    if c <= 0.0:
        raise ValueError("fractional power of non-positive Taylor scalar")
    binom = 1.0
    for i in range(k):
        binom *= (p - i) / (i + 1)
    return binom * c ** (p - k)


def seed(point, order: int, nvars: int | None = None) -> list[TaylorScalar]:
    """Coordinate jets at ``point``: evaluate any closed form on these to
    obtain its Taylor expansion there."""
    pt = [float(v) for v in point]
    n = nvars if nvars is not None else len(pt)
    ctx = get_context(n, order)
    return [TaylorScalar.variable(ctx, i, v) for i, v in enumerate(pt)]


def seed_time(t: float, order: int = 1) -> TaylorScalar:
    """A one-variable jet in time, for differentiating families along t."""
    ctx = get_context(1, order)
    return TaylorScalar.variable(ctx, 0, float(t))
