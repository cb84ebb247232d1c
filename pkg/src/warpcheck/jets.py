"""Truncated multivariate Taylor (jet) arithmetic.

A :class:`Jet` stores the Taylor coefficients of one or more scalar
functions about a point, for every multi-index of total degree up to the
jet's order.  Coefficients are kept *normalized*: the entry for the
multi-index ``alpha`` is ``d^alpha f / alpha!``.  :meth:`Jet.partial`
multiplies the factorial back in.

Jets may carry a leading batch shape (``coeffs.shape == batch + (M,)``), so a
matrix of functions is a single jet with batch shape ``(d, d)``.  All
arithmetic broadcasts over the batch axes.

Differentiation lowers the order by one: ``Jet.d(i)`` of an order-``k`` jet
is exact to order ``k - 1``.  Every jet records the order to which it is
exact and products and compositions take the minimum.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

MAX_ORDER = 4


class JetError(ValueError):
    """Invalid jet operation (order out of range, mismatched spaces)."""


class DomainError(ArithmeticError):
    """An elementary function was evaluated outside its real domain."""


def _monomials(nvars: int, order: int) -> list[tuple[int, ...]]:
    out = []
    for deg in range(order + 1):
        degree_terms = []
        for combo in combinations_with_replacement(range(nvars), deg):
            alpha = [0] * nvars
            for v in combo:
                alpha[v] += 1
            degree_terms.append(tuple(alpha))
        # lexicographically descending inside a degree: x1 before x2
        out.extend(sorted(set(degree_terms), reverse=True))
    return out


class JetSpace:
    """Index tables for jets in ``nvars`` variables up to ``max_order``."""

    def __init__(self, nvars: int, max_order: int = MAX_ORDER):
        if nvars < 0:
            raise JetError("nvars must be non-negative")
        if not 0 <= max_order <= MAX_ORDER:
            raise JetError(f"order must lie in [0, {MAX_ORDER}], got {max_order}")
        self.nvars = nvars
        self.max_order = max_order
        self.monomials = _monomials(nvars, max_order)
        self.index = {alpha: k for k, alpha in enumerate(self.monomials)}
        self.size = len(self.monomials)
        self.degree = np.array([sum(a) for a in self.monomials], dtype=int)
        self.factorial = np.array(
            [math.prod(math.factorial(x) for x in a) for a in self.monomials], dtype=float
        )

        pairs = []
        for i, a in enumerate(self.monomials):
            for j, b in enumerate(self.monomials):
                if sum(a) + sum(b) <= max_order:
                    k = self.index[tuple(x + y for x, y in zip(a, b))]
                    pairs.append((k, i, j))
        pairs.sort()
        arr = np.array(pairs, dtype=int).reshape(-1, 3)
        self._pk, self._pi, self._pj = arr[:, 0], arr[:, 1], arr[:, 2]
        # every output slot receives at least the (k, k, 0) pair
        self._offsets = np.searchsorted(self._pk, np.arange(self.size))

        self._dsrc = []
        self._dfac = []
        for v in range(nvars):
            src = np.zeros(self.size, dtype=int)
            fac = np.zeros(self.size)
            for k, a in enumerate(self.monomials):
                up = list(a)
                up[v] += 1
                up = tuple(up)
                if up in self.index:
                    src[k] = self.index[up]
                    fac[k] = up[v]
            self._dsrc.append(src)
            self._dfac.append(fac)

    def __repr__(self) -> str:
        return f"JetSpace(nvars={self.nvars}, max_order={self.max_order})"

    def mask(self, order: int) -> np.ndarray:
        return (self.degree <= order).astype(float)

    def mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = a[..., self._pi] * b[..., self._pj]
        return np.add.reduceat(prod, self._offsets, axis=-1)

    def constant(self, value, order: int | None = None) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (self.size,))
        c[..., 0] = value
        return Jet(self, c, self.max_order if order is None else order)

    def variables(self, point: Sequence[float], order: int | None = None) -> list["Jet"]:
        """Coordinate jets ``x_i = p_i + dx_i`` about ``point``."""
        if len(point) != self.nvars:
            raise JetError(f"point has {len(point)} coordinates, space has {self.nvars}")
        order = self.max_order if order is None else order
        out = []
        for v, p in enumerate(point):
            c = np.zeros(self.size)
            c[0] = float(p)
            if self.max_order >= 1:
                e = [0] * self.nvars
                e[v] = 1
                c[self.index[tuple(e)]] = 1.0
            out.append(Jet(self, c, order))
        return out


@lru_cache(maxsize=None)
def jet_space(nvars: int, max_order: int = MAX_ORDER) -> JetSpace:
    return JetSpace(nvars, max_order)


class Jet:
    """Normalized Taylor coefficients of (a batch of) scalar functions."""

    __slots__ = ("space", "coeffs", "order")
    __array_priority__ = 100

    def __init__(self, space: JetSpace, coeffs: np.ndarray, order: int):
        if order < 0:
            raise JetError("jet order exhausted by differentiation")
        if order > space.max_order:
            raise JetError(f"order {order} exceeds space maximum {space.max_order}")
        coeffs = np.asarray(coeffs, dtype=float)
        if order < space.max_order:
            coeffs = coeffs * space.mask(order)
        self.space = space
        self.coeffs = coeffs
        self.order = order

    # -- inspection ---------------------------------------------------------
    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self) -> np.ndarray | float:
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v

    def coefficient(self, alpha: Sequence[int]):
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise JetError(f"multi-index {alpha} exceeds jet order {self.order}")
        v = self.coeffs[..., self.space.index[alpha]]
        return float(v) if v.ndim == 0 else v

    def partial(self, alpha: Sequence[int]):
        """Un-normalized partial derivative ``d^alpha f`` at the base point."""
        alpha = tuple(alpha)
        k = self.space.index[alpha] if alpha in self.space.index else None
        if k is None or sum(alpha) > self.order:
            raise JetError(f"multi-index {alpha} exceeds jet order {self.order}")
        v = self.coeffs[..., k] * self.space.factorial[k]
        return float(v) if v.ndim == 0 else v

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, nvars={self.space.nvars}, shape={self.shape})"

    def __getitem__(self, idx) -> "Jet":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.space, self.coeffs[idx + (Ellipsis, slice(None))], self.order)

    def __len__(self) -> int:
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.space is not self.space:
                raise JetError("jets live in different spaces")
            return other.coeffs, other.order
        arr = np.asarray(other, dtype=float)
        c = np.zeros(arr.shape + (self.space.size,))
        c[..., 0] = arr
        return c, self.space.max_order

    def __add__(self, other):
        c, o = self._coerce(other)
        return Jet(self.space, self.coeffs + c, min(self.order, o))

    __radd__ = __add__

    def __sub__(self, other):
        c, o = self._coerce(other)
        return Jet(self.space, self.coeffs - c, min(self.order, o))

    def __rsub__(self, other):
        c, o = self._coerce(other)
        return Jet(self.space, c - self.coeffs, min(self.order, o))

    def __neg__(self):
        return Jet(self.space, -self.coeffs, self.order)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Jet):
            c, o = self._coerce(other)
            return Jet(self.space, self.space.mul_coeffs(self.coeffs, c), min(self.order, o))
        arr = np.asarray(other, dtype=float)
        return Jet(self.space, self.coeffs * arr[..., None], self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * reciprocal(other)
        arr = np.asarray(other, dtype=float)
        return Jet(self.space, self.coeffs / arr[..., None], self.order)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        return power(self, exponent)

    # -- calculus -----------------------------------------------------------
    def d(self, var: int) -> "Jet":
        """Partial derivative in variable ``var``; exact to ``order - 1``."""
        sp = self.space
        c = self.coeffs[..., sp._dsrc[var]] * sp._dfac[var]
        return Jet(sp, c, self.order - 1)

    def gradient(self) -> "Jet":
        """Stack of first partials along a new trailing batch axis."""
        return stack([self.d(v) for v in range(self.space.nvars)], axis=-1)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.space, self.coeffs, min(order, self.order))

    def nilpotent(self) -> "Jet":
        c = self.coeffs.copy()
        c[..., 0] = 0.0
        return Jet(self.space, c, self.order)

    # -- batch helpers ------------------------------------------------------
    def reshape(self, *shape) -> "Jet":
        return Jet(self.space, self.coeffs.reshape(tuple(shape) + (self.space.size,)), self.order)

    def transpose(self, *axes) -> "Jet":
        nb = len(self.shape)
        axes = axes or tuple(reversed(range(nb)))
        return Jet(self.space, self.coeffs.transpose(tuple(axes) + (nb,)), self.order)

    def sum(self, axis=None) -> "Jet":
        nb = len(self.shape)
        if axis is None:
            axis = tuple(range(nb))
        elif isinstance(axis, int):
            axis = (axis % nb,)
        else:
            axis = tuple(a % nb for a in axis)
        return Jet(self.space, self.coeffs.sum(axis=axis), self.order)


# -- construction helpers ---------------------------------------------------

def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    if not jets:
        raise JetError("cannot stack an empty sequence")
    space = jets[0].space
    if any(j.space is not space for j in jets):
        raise JetError("jets live in different spaces")
    nb = len(jets[0].shape)
    if axis < 0:
        axis += nb + 1
    c = np.stack([j.coeffs for j in jets], axis=axis)
    return Jet(space, c, min(j.order for j in jets))


def einsum(subscripts: str, a: Jet, b: Jet) -> Jet:
    """Two-operand einsum over batch axes with jet multiplication.

    ``subscripts`` names batch axes only, e.g. ``"ij,jk->ik"``.
    """
    if a.space is not b.space:
        raise JetError("jets live in different spaces")
    sp = a.space
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    pa = a.coeffs[..., sp._pi]
    pb = b.coeffs[..., sp._pj]
    prod = np.einsum(f"{sa}Z,{sb}Z->{out}Z", pa, pb)
    c = np.add.reduceat(prod, sp._offsets, axis=-1)
    return Jet(sp, c, min(a.order, b.order))


def contract(subscripts: str, *ops: Jet | np.ndarray) -> Jet:
    """Multi-operand contraction; plain arrays enter as constant factors.

    Jets are multiplied pairwise from left to right, so every intermediate
    keeps the full index set named in ``subscripts``; this is simple and is
    adequate for the small dimensions used here.
    """
    lhs, out = subscripts.replace(" ", "").split("->")
    terms = lhs.split(",")
    if len(terms) != len(ops):
        raise JetError("subscript/operand count mismatch")
    jets = [(t, o) for t, o in zip(terms, ops) if isinstance(o, Jet)]
    arrays = [(t, np.asarray(o, dtype=float)) for t, o in zip(terms, ops) if not isinstance(o, Jet)]
    if not jets:
        raise JetError("contract needs at least one jet operand")

    all_idx = "".join(dict.fromkeys("".join(terms)))
    needed_later = [set("".join(t for t, _ in jets[k + 1:]) + "".join(t for t, _ in arrays) + out)
                    for k in range(len(jets))]

    cur_t, cur = jets[0]
    for k in range(1, len(jets)):
        t, j = jets[k]
        keep = "".join(ch for ch in all_idx if ch in (cur_t + t) and ch in needed_later[k])
        cur = einsum(f"{cur_t},{t}->{keep}", cur, j)
        cur_t = keep
    if arrays:
        spec = ",".join([cur_t + "Z"] + [t for t, _ in arrays]) + f"->{out}Z"
        c = np.einsum(spec, cur.coeffs, *[arr for _, arr in arrays])
        return Jet(cur.space, c, cur.order)
    c = np.einsum(f"{cur_t}Z->{out}Z", cur.coeffs)
    return Jet(cur.space, c, cur.order)


# -- elementary functions ---------------------------------------------------

def _series(u: Jet, derivs: Sequence[np.ndarray]) -> Jet:
    """``sum_k derivs[k] / k! * (u - u0)^k`` truncated at the jet order."""
    n = u.nilpotent()
    out = u.space.constant(np.broadcast_to(derivs[0], u.shape), u.order)
    powk = None
    for k in range(1, u.order + 1):
        powk = n if powk is None else powk * n
        out = out + powk * (np.asarray(derivs[k]) / math.factorial(k))
    return Jet(u.space, out.coeffs, u.order)


def _base(u: Jet) -> np.ndarray:
    return np.asarray(u.coeffs[..., 0])


def exp(u: Jet) -> Jet:
    e = np.exp(_base(u))
    return _series(u, [e] * (u.order + 1))


def sin(u: Jet) -> Jet:
    x = _base(u)
    s, c = np.sin(x), np.cos(x)
    cyc = [s, c, -s, -c]
    return _series(u, [cyc[k % 4] for k in range(u.order + 1)])


def cos(u: Jet) -> Jet:
    x = _base(u)
    s, c = np.sin(x), np.cos(x)
    cyc = [c, -s, -c, s]
    return _series(u, [cyc[k % 4] for k in range(u.order + 1)])


def log(u: Jet) -> Jet:
    x = _base(u)
    if np.any(x <= 0):
        raise DomainError(f"log of non-positive value {np.min(x)!r}")
    derivs = [np.log(x)]
    for k in range(1, u.order + 1):
        derivs.append((-1) ** (k - 1) * math.factorial(k - 1) / x**k)
    return _series(u, derivs)


def _real_power(u: Jet, c: float) -> Jet:
    x = _base(u)
    if np.any(x <= 0):
        raise DomainError(f"non-integer power of non-positive value {np.min(x)!r}")
    derivs = []
    coef = 1.0
    for k in range(u.order + 1):
        derivs.append(coef * x ** (c - k))
        coef *= c - k
    return _series(u, derivs)


def sqrt(u: Jet) -> Jet:
    return _real_power(u, 0.5)


def reciprocal(u: Jet) -> Jet:
    x = _base(u)
    if np.any(x == 0):
        raise ZeroDivisionError("division by a jet with zero base value")
    derivs = []
    for k in range(u.order + 1):
        derivs.append((-1) ** k * math.factorial(k) / x ** (k + 1))
    return _series(u, derivs)


def power(u: Jet, exponent) -> Jet:
    if isinstance(exponent, Jet):
        # u^v = exp(v log u)
        return exp(exponent * log(u))
    c = float(exponent)
    if c.is_integer():
        k = int(c)
        if k == 0:
            return u.space.constant(np.ones(u.shape), u.order)
        base = u if k > 0 else reciprocal(u)
        out = None
        sq = base
        k = abs(k)
        while k:
            if k & 1:
                out = sq if out is None else out * sq
            k >>= 1
            if k:
                sq = sq * sq
        return out
    return _real_power(u, c)


# -- linear algebra ---------------------------------------------------------

def inverse(m: Jet) -> Jet:
    """Inverse of a square jet matrix (batch shape ``(..., d, d)``)."""
    g0 = m.coeffs[..., 0]
    try:
        inv0 = np.linalg.inv(g0)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular matrix at the base point") from exc
    sp = m.space
    n = m.nilpotent()
    if m.coeffs.ndim != 3:
        raise JetError("inverse supports a single matrix (batch shape (d, d))")
    # (G0 + N)^-1 = sum_k (-G0^-1 N)^k G0^-1 ; N^k vanishes beyond the order
    x = contract("ij,jk->ik", -inv0, n)
    term = sp.constant(inv0, m.order)
    total = term
    for _ in range(m.order):
        term = einsum("ij,jk->ik", x, term)
        total = total + term
    return Jet(sp, total.coeffs, m.order)


def compose(outer: Jet, inner: Sequence[Jet]) -> Jet:
    """Substitute jets ``inner`` into the Taylor polynomial ``outer``.

    ``outer`` must be expanded about the base values of ``inner``; the result
    lives in the space of ``inner``.
    """
    tsp = outer.space
    if len(inner) != tsp.nvars:
        raise JetError(f"outer jet has {tsp.nvars} variables, got {len(inner)} inner jets")
    if not inner:
        return outer
    return _compose_with(outer, power_table(tsp, inner))


def power_table(outer_space: JetSpace, inner: Sequence[Jet]) -> "PowerTable":
    return PowerTable(outer_space, inner)


class PowerTable:
    """All monomials ``(inner - inner0)^beta`` for reuse across compositions."""

    def __init__(self, outer_space: JetSpace, inner: Sequence[Jet]):
        self.outer_space = outer_space
        sp = inner[0].space
        self.space = sp
        self.order = min(j.order for j in inner)
        nil = [j.nilpotent() for j in inner]
        rows = [None] * outer_space.size
        rows[0] = sp.constant(1.0).coeffs
        for k, beta in enumerate(outer_space.monomials[1:], start=1):
            v = next(i for i, b in enumerate(beta) if b)
            prev = list(beta)
            prev[v] -= 1
            pk = outer_space.index[tuple(prev)]
            rows[k] = sp.mul_coeffs(rows[pk], nil[v].coeffs)
        self.matrix = np.stack(rows)  # (M_outer, M_inner)
        self.base = np.array([j.coeffs[0] for j in inner])


def _compose_with(outer: Jet, table: PowerTable) -> Jet:
    c = outer.coeffs @ table.matrix
    return Jet(table.space, c, min(outer.order, table.order))


def compose_table(outer: Jet, table: PowerTable) -> Jet:
    if outer.space is not table.outer_space:
        raise JetError("outer jet does not match the power table")
    return _compose_with(outer, table)
