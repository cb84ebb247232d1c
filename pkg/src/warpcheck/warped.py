"""Doubly warped products ``_f B ×_b F`` with metric ``f² g_B ⊕ b² g_F``.

Closed forms for the Levi-Civita connection and for the curvature difference
``R̄ - R`` live here next to the first-principles versions computed from the
assembled product-chart metric.  Several published forms are kept as named
variants so a verifier can report which one agrees with the oracle:

connection variants
    ``printed``          warping terms exactly as typeset: ``-½ g_B(X₁,Y₁)(grad f², 0)
                         - ½ g_F(X₂,Y₂)(0, grad b²)``; only typable when m == n.
    ``slot-swap``        the two vectors moved to the slots where they live,
                         gradients still taken in ``g_B`` / ``g_F``.
    ``corrected``        slot swap plus the factors ``1/b²`` and ``1/f²``;
                         identical to reading both gradients in the warped metric.

curvature variants (wedges always in the warped metric)
    ``printed``          component gradients, as typeset.
    ``warped-gradient``  every ``grad`` read in the warped metric.
    ``norm-sign``        warped gradients, both ``|grad|²`` wedge terms negated.
    ``corrected``        ``norm-sign`` plus the mixed b/f wedge group that the
                         typeset relation lacks (see :func:`curvature_relation_closed`).

Throughout, ``grad b²`` is the ``g_B`` gradient and ``grad f²`` the ``g_F``
gradient unless a variant says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import jets as J
from .expr import ScalarFieldExpr, constant, parse
from .geometry import GeometryError, LocalGeometry, MetricPatch

CONNECTION_FORMS = ("printed", "slot-swap", "corrected")
CURVATURE_FORMS = ("printed", "warped-gradient", "norm-sign", "corrected")


class IllTyped(GeometryError):
    """A printed formula adds vectors that live on different factors."""


class WarpingError(J.DomainError):
    pass


@dataclass(frozen=True)
class SplitVector:
    horizontal: np.ndarray
    vertical: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.horizontal, self.vertical])

    @classmethod
    def split(cls, v: Sequence[float], m: int) -> "SplitVector":
        v = np.asarray(v, dtype=float)
        return cls(v[:m].copy(), v[m:].copy())

    def __iter__(self):
        yield self.horizontal
        yield self.vertical


def _extend(e: ScalarFieldExpr, names: tuple[str, ...]) -> ScalarFieldExpr:
    return e.with_vars(names)


class DwpSpace:
    """The doubly warped product of ``base`` (B, dim m) and ``fiber`` (F, dim n).

    ``b`` is a function on B and ``f`` on F.  Pass ``b_squared=True`` (or
    ``f_squared``) when the expression given is ``b²`` rather than ``b``.
    """

    def __init__(
        self,
        base: MetricPatch,
        fiber: MetricPatch,
        b: ScalarFieldExpr | str,
        f: ScalarFieldExpr | str,
        *,
        b_squared: bool = False,
        f_squared: bool = False,
        name: str = "dwp",
    ):
        if set(base.vars) & set(fiber.vars):
            raise GeometryError(f"base and fiber share coordinate names {set(base.vars) & set(fiber.vars)}")
        self.base = base
        self.fiber = fiber
        self.name = name
        b = parse(b, base.vars) if isinstance(b, str) else b
        f = parse(f, fiber.vars) if isinstance(f, str) else f
        if not b.free_vars <= set(base.vars):
            raise GeometryError("b must be a function on the base")
        if not f.free_vars <= set(fiber.vars):
            raise GeometryError("f must be a function on the fiber")
        b = b.with_vars(base.vars)
        f = f.with_vars(fiber.vars)
        self.b_squared = b_squared
        self.f_squared = f_squared
        self.b_input, self.f_input = b, f
        self.b2 = b if b_squared else b**2
        self.f2 = f if f_squared else f**2
        self.lnb = (0.5 * b.apply("log")) if b_squared else b.apply("log")
        self.lnf = (0.5 * f.apply("log")) if f_squared else f.apply("log")
        self.vars = base.vars + fiber.vars
        self.m, self.n = base.dim, fiber.dim
        self.chart = base.chart + fiber.chart

    def __repr__(self) -> str:
        return f"DwpSpace({self.name}: m={self.m}, n={self.n}, b={self.b_input}, f={self.f_input})"

    @property
    def dim(self) -> int:
        return self.m + self.n

    def _block(self, wb: ScalarFieldExpr | None, wf: ScalarFieldExpr | None, name: str) -> MetricPatch:
        names = self.vars
        m, n = self.m, self.n
        zero = constant(0.0, names)
        rows = []
        for i in range(m + n):
            row = []
            for j in range(m + n):
                if i < m and j < m:
                    e = _extend(self.base.g[i][j], names)
                    row.append(e if wb is None else _extend(wb, names) * e)
                elif i >= m and j >= m:
                    e = _extend(self.fiber.g[i - m][j - m], names)
                    row.append(e if wf is None else _extend(wf, names) * e)
                else:
                    row.append(zero)
            rows.append(tuple(row))
        return MetricPatch(name, names, self.chart, tuple(rows))

    @cached_property
    def product_chart(self) -> MetricPatch:
        """The warped metric ``f² g_B ⊕ b² g_F`` on the product chart."""
        return self._block(self.f2, self.b2, f"{self.name}-warped")

    @cached_property
    def plain_product(self) -> MetricPatch:
        """The unwarped product metric ``g_B ⊕ g_F``."""
        return self._block(None, None, f"{self.name}-product")

    def swapped(self) -> "DwpSpace":
        """``_b F ×_f B``: the same construction with the factors exchanged."""
        return DwpSpace(
            self.fiber, self.base, self.f_input, self.b_input,
            b_squared=self.f_squared, f_squared=self.b_squared, name=f"{self.name}-swap",
        )

    def split(self, p: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise GeometryError(f"{self.name} expects {self.dim} coordinates")
        return p[: self.m], p[self.m:]

    def warping_values(self, p: Sequence[float]) -> tuple[float, float]:
        x, y = self.split(p)
        b2, f2 = self.b2.evaluate(x), self.f2.evaluate(y)
        if not (b2 > 0 and f2 > 0) or (not self.b_squared and self.b_input.evaluate(x) <= 0) or (
            not self.f_squared and self.f_input.evaluate(y) <= 0
        ):
            raise WarpingError(f"{self.name}: non-positive warping function at {tuple(p)}")
        return b2, f2

    def check_positive(self, points) -> None:
        for p in points:
            self.warping_values(p)
        self.base.check_positive([self.split(p)[0] for p in points])
        self.fiber.check_positive([self.split(p)[1] for p in points])

    def local(self, p: Sequence[float], order: int = 2) -> "FactorJets":
        self.warping_values(p)
        return FactorJets(self, p, order)


class FactorJets:
    """Factor geometries and warping data as jets on the product chart."""

    def __init__(self, space: DwpSpace, p: Sequence[float], order: int):
        self.space = space
        sp = J.jet_space(space.dim, order)
        self.jspace = sp
        self.coords = sp.variables(list(map(float, p)))
        m = space.m
        self.B = LocalGeometry(space.base, self.coords[:m], offset=0)
        self.F = LocalGeometry(space.fiber, self.coords[m:], offset=m)
        self.b2 = self.B.scalar(space.b2)
        self.f2 = self.F.scalar(space.f2)
        self.lnb = self.B.scalar(space.lnb)
        self.lnf = self.F.scalar(space.lnf)

    def grad_b2(self) -> J.Jet:
        return self.B.grad(self.b2)

    def grad_f2(self) -> J.Jet:
        return self.F.grad(self.f2)


# -- metric -----------------------------------------------------------------------

def assemble_metric(space: DwpSpace, p: Sequence[float]) -> np.ndarray:
    """``diag(f(y)² g_B(x), b(x)² g_F(y))`` at ``p = (x, y)``."""
    b2, f2 = space.warping_values(p)
    x, y = space.split(p)
    m, n = space.m, space.n
    out = np.zeros((m + n, m + n))
    out[:m, :m] = f2 * space.base.metric_at(x)
    out[m:, m:] = b2 * space.fiber.metric_at(y)
    return out


def wedge(X, Y, Z, g: np.ndarray) -> np.ndarray:
    """``(X ∧_g Y) Z = g(Y, Z) X - g(X, Z) Y``."""
    X, Y, Z = (np.asarray(v.vector if isinstance(v, SplitVector) else v, dtype=float) for v in (X, Y, Z))
    return (Y @ g @ Z) * X - (X @ g @ Z) * Y


def wedge_matrix(X: np.ndarray, Y: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Matrix of ``Z ↦ (X ∧_g Y) Z``."""
    return np.outer(X, g @ Y) - np.outer(Y, g @ X)


# -- connection ----------------------------------------------------------------------

def _field_jets(space: DwpSpace, fj: FactorJets, field) -> J.Jet:
    comps = [parse(c, space.vars) if isinstance(c, str) else c.with_vars(space.vars) for c in field]
    if len(comps) != space.dim:
        raise GeometryError(f"vector field needs {space.dim} components")
    env = dict(zip(space.vars, fj.coords))
    return J.stack([c.jet_in(fj.jspace, env, fj.jspace.max_order) for c in comps])


def _as_field(space: DwpSpace, v):
    if isinstance(v, SplitVector):
        v = v.vector
    if len(v) and all(isinstance(c, (int, float, np.floating)) for c in v):
        return [constant(float(c), space.vars) for c in v]
    return list(v)


def product_connection(space: DwpSpace, fj: FactorJets, X: J.Jet, Y: J.Jet) -> J.Jet:
    m = space.m
    dY = J.stack([Y.d(v) for v in range(space.dim)])  # [i, k]
    xdy = J.contract("i,ik->k", X, dY)
    tb = J.contract("kij,i,j->k", fj.B.gamma, X[:m], Y[:m])
    tf = J.contract("kij,i,j->k", fj.F.gamma, X[m:], Y[m:])
    return xdy + J.stack(list(tb) + list(tf))


def dwp_connection_closed(space: DwpSpace, X, Y, p: Sequence[float], form: str = "corrected") -> SplitVector:
    """``∇̄_X Y`` at ``p`` from the factor connections and warping functions.

    ``X`` and ``Y`` are vector fields on the product chart (``m + n``
    expressions or strings) or constant component vectors.
    """
    if form not in CONNECTION_FORMS:
        raise ValueError(f"unknown connection form {form!r}")
    fj = space.local(p, 2)
    Xj = _field_jets(space, fj, _as_field(space, X))
    Yj = _field_jets(space, fj, _as_field(space, Y))
    m, n = space.m, space.n
    base = np.asarray(product_connection(space, fj, Xj, Yj).value, dtype=float)
    x1, x2 = np.asarray(Xj.value)[:m], np.asarray(Xj.value)[m:]
    y1, y2 = np.asarray(Yj.value)[:m], np.asarray(Yj.value)[m:]
    b2, f2 = fj.b2.value, fj.f2.value
    gb2 = np.asarray(fj.grad_b2().value, dtype=float).reshape(m)
    gf2 = np.asarray(fj.grad_f2().value, dtype=float).reshape(n)
    db2 = np.asarray(fj.B.dall(fj.b2).value, dtype=float).reshape(m)
    df2 = np.asarray(fj.F.dall(fj.f2).value, dtype=float).reshape(n)
    gB = np.asarray(fj.B.g.value, dtype=float)
    gF = np.asarray(fj.F.g.value, dtype=float)

    out = base.copy()
    out[m:] += (x1 @ db2) / (2 * b2) * y2 + (y1 @ db2) / (2 * b2) * x2
    out[:m] += (x2 @ df2) / (2 * f2) * y1 + (y2 @ df2) / (2 * f2) * x1
    hh = x1 @ gB @ y1
    vv = x2 @ gF @ y2
    if form == "printed":
        if m != n:
            raise IllTyped("grad f² lives on F and cannot fill the B slot when m != n")
        out[:m] += -0.5 * hh * gf2
        out[m:] += -0.5 * vv * gb2
    elif form == "slot-swap":
        out[m:] += -0.5 * hh * gf2
        out[:m] += -0.5 * vv * gb2
    else:
        out[m:] += -0.5 * hh * gf2 / b2
        out[:m] += -0.5 * vv * gb2 / f2
    return SplitVector.split(out, m)


def connection_oracle(space: DwpSpace, X, Y, p: Sequence[float]) -> SplitVector:
    """``∇̄_X Y`` from the Christoffel symbols of the assembled metric."""
    fj = space.local(p, 2)
    Xj = _field_jets(space, fj, _as_field(space, X))
    Yj = _field_jets(space, fj, _as_field(space, Y))
    warped = LocalGeometry(space.product_chart, fj.coords)
    dY = J.stack([Yj.d(v) for v in range(space.dim)])
    val = J.contract("i,ik->k", Xj, dY) + J.contract("kij,i,j->k", warped.gamma, Xj, Yj)
    return SplitVector.split(np.asarray(val.value, dtype=float), space.m)


# -- curvature --------------------------------------------------------------------------

def curvature_difference_oracle(space: DwpSpace, X, Y, p: Sequence[float]) -> np.ndarray:
    """Matrix of ``Z ↦ R̄(X,Y)Z - R(X,Y)Z`` from both assembled metrics."""
    X = np.asarray(X.vector if isinstance(X, SplitVector) else X, dtype=float)
    Y = np.asarray(Y.vector if isinstance(Y, SplitVector) else Y, dtype=float)
    space.warping_values(p)
    sp = J.jet_space(space.dim, 2)
    coords = sp.variables(list(map(float, p)))
    rw = np.asarray(LocalGeometry(space.product_chart, coords).riemann.value)
    rp = np.asarray(LocalGeometry(space.plain_product, coords).riemann.value)
    return np.einsum("lkij,i,j->lk", rw - rp, X, Y)


def _curvature_parts(space: DwpSpace, p, grads: str) -> dict:
    fj = space.local(p, 2)
    m, n = space.m, space.n
    b2, f2 = float(fj.b2.value), float(fj.f2.value)
    gb2j, gf2j = fj.grad_b2(), fj.grad_f2()
    parts = dict(
        b2=b2,
        f2=f2,
        db2=np.asarray(fj.B.dall(fj.b2).value, dtype=float).reshape(m),
        df2=np.asarray(fj.F.dall(fj.f2).value, dtype=float).reshape(n),
        # hess[i, k] = (∇_i grad)^k
        hess_b=np.asarray(fj.B.covd(gb2j).value, dtype=float).reshape(m, m),
        hess_f=np.asarray(fj.F.covd(gf2j).value, dtype=float).reshape(n, n),
        gb2=np.asarray(gb2j.value, dtype=float).reshape(m),
        gf2=np.asarray(gf2j.value, dtype=float).reshape(n),
    )
    gB = np.asarray(fj.B.g.value, dtype=float)
    gF = np.asarray(fj.F.g.value, dtype=float)
    if grads == "warped":
        # grad in f² g_B ⊕ b² g_F: the B part scales by 1/f², the F part by 1/b²
        parts["gb2"] = parts["gb2"] / f2
        parts["gf2"] = parts["gf2"] / b2
        parts["hess_b"] = parts["hess_b"] / f2
        parts["hess_f"] = parts["hess_f"] / b2
        parts["nb2"] = f2 * (parts["gb2"] @ gB @ parts["gb2"])
        parts["nf2"] = b2 * (parts["gf2"] @ gF @ parts["gf2"])
    else:
        parts["nb2"] = parts["gb2"] @ gB @ parts["gb2"]
        parts["nf2"] = parts["gf2"] @ gF @ parts["gf2"]
    return parts


def curvature_relation_closed(space: DwpSpace, X, Y, p: Sequence[float], form: str = "corrected") -> np.ndarray:
    """Matrix of ``Z ↦ R̄(X,Y)Z - R(X,Y)Z`` from factor data.

    With ``X̂₁ = (X₁, 0)``, ``X̂₂ = (0, X₂)`` and wedges in the warped metric,
    the typeset relation reads::

        (1/2b²){ [A(Y₁) ∧ X̂₂ - A(X₁) ∧ Ŷ₂] + s (1/2b²)|grad b²|² X̂₂ ∧ Ŷ₂ }
      + (1/2f²){ [C(Y₂) ∧ X̂₁ - C(X₂) ∧ Ŷ₁] + s (1/2f²)|grad f²|² X̂₁ ∧ Ŷ₁ }

        A(V₁) = (∇_{V₁} grad b² - (1/2b²) V₁(b²) grad b², 0) - (1/2f²)(0, V₁(b²) grad f²)
        C(V₂) = (0, ∇_{V₂} grad f² - (1/2f²) V₂(f²) grad f²) - (1/2b²)(V₂(f²) grad b², 0)

    with ``s = +1``.  Bilinearity of the wedge makes both bracketings of the
    inner groups agree.  Variants:

    ``printed``          ``s = +1``, component gradients.
    ``warped-gradient``  ``s = +1``, gradients in the warped metric.
    ``norm-sign``        ``s = -1``, gradients in the warped metric; exact
                         whenever b or f is constant.
    ``corrected``        ``norm-sign`` plus the mixed group::

        (1/4b²f²){ X₁(b²)(0, grad f²) ∧ Ŷ₁ - Y₁(b²)(0, grad f²) ∧ X̂₁
                 + X₂(f²)(grad b², 0) ∧ Ŷ₂ - Y₂(f²)(grad b², 0) ∧ X̂₂ }
    """
    if form not in CURVATURE_FORMS:
        raise ValueError(f"unknown curvature form {form!r}")
    X = np.asarray(X.vector if isinstance(X, SplitVector) else X, dtype=float)
    Y = np.asarray(Y.vector if isinstance(Y, SplitVector) else Y, dtype=float)
    m, n = space.m, space.n
    g = assemble_metric(space, p)
    c = _curvature_parts(space, p, "component" if form == "printed" else "warped")
    b2, f2 = c["b2"], c["f2"]
    sign = 1.0 if form in ("printed", "warped-gradient") else -1.0

    def hor(v):
        return np.concatenate([v, np.zeros(n)])

    def ver(v):
        return np.concatenate([np.zeros(m), v])

    def W(a, b):
        return wedge_matrix(a, b, g)

    def A(v1):
        d = c["db2"] @ v1
        return hor(v1 @ c["hess_b"] - d / (2 * b2) * c["gb2"]) - ver(d * c["gf2"]) / (2 * f2)

    def C(v2):
        d = c["df2"] @ v2
        return ver(v2 @ c["hess_f"] - d / (2 * f2) * c["gf2"]) - hor(d * c["gb2"]) / (2 * b2)

    x1, x2, y1, y2 = X[:m], X[m:], Y[:m], Y[m:]
    out = (W(A(y1), ver(x2)) - W(A(x1), ver(y2)) + sign * c["nb2"] / (2 * b2) * W(ver(x2), ver(y2))) / (2 * b2)
    out += (W(C(y2), hor(x1)) - W(C(x2), hor(y1)) + sign * c["nf2"] / (2 * f2) * W(hor(x1), hor(y1))) / (2 * f2)
    if form == "corrected":
        gb, gf = hor(c["gb2"]), ver(c["gf2"])
        dbx, dby = c["db2"] @ x1, c["db2"] @ y1
        dfx, dfy = c["df2"] @ x2, c["df2"] @ y2
        out += (
            dbx * W(gf, hor(y1)) - dby * W(gf, hor(x1)) + dfx * W(gb, ver(y2)) - dfy * W(gb, ver(x2))
        ) / (4 * b2 * f2)
    return out


dwp_curvature_relation = curvature_relation_closed
