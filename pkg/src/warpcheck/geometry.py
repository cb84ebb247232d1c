"""Riemannian geometry of a single coordinate chart.

Index conventions (shared by every module in the package):

=====================  ==========================================================
quantity               array layout
=====================  ==========================================================
metric                 ``g[i, j]``
Christoffel symbols    ``gamma[k, i, j] = Γ^k_ij``, ``∇_i ∂_j = Γ^k_ij ∂_k``
Riemann tensor         ``riemann[l, k, i, j] = R^l_kij`` with
                       ``R(∂_i, ∂_j) ∂_k = R^l_kij ∂_l`` and
                       ``R(X, Y) = ∇_X ∇_Y - ∇_Y ∇_X - ∇_[X,Y]``
Ricci tensor           ``ricci[i, j] = R^k_ikj``  (the unit sphere has Ric = g)
covariant derivative   ``nabla[i, k] = (∇_i V)^k``
=====================  ==========================================================

Two Laplacians appear in the package and are named apart:

* :func:`laplace_beltrami` / :meth:`LocalGeometry.laplacian` use the analyst
  sign, ``Δh = trace Hess h`` (so ``Δ x² = 2`` on the line);
* the rough Laplacian on sections along a map (``warpcheck.maps``) keeps the
  geometer sign ``Δv = -trace ∇²v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .expr import ExprError, ScalarFieldExpr, constant, parse

RIEMANN_LAYOUT = "riemann[l, k, i, j] = dx^l(R(d_i, d_j) d_k)"
RICCI_LAYOUT = "ricci[i, j] = riemann[k, i, k, j]"


class GeometryError(ValueError):
    pass


class SingularMetric(GeometryError):
    pass


# -- metric patches ---------------------------------------------------------------

@dataclass(frozen=True)
class MetricPatch:
    """A coordinate box with a symmetric metric of expression entries."""

    name: str
    vars: tuple[str, ...]
    chart: tuple[tuple[float, float], ...]
    g: tuple[tuple[ScalarFieldExpr, ...], ...]

    def __post_init__(self):
        d = len(self.vars)
        if d < 1:
            raise GeometryError("a patch needs at least one coordinate")
        if len(self.chart) != d:
            raise GeometryError(f"chart has {len(self.chart)} intervals for {d} coordinates")
        for lo, hi in self.chart:
            if not lo < hi:
                raise GeometryError(f"empty chart interval ({lo}, {hi})")
        if len(self.g) != d or any(len(row) != d for row in self.g):
            raise GeometryError(f"metric must be {d}x{d}")
        for i in range(d):
            for j in range(d):
                if self.g[i][j].vars != self.vars:
                    raise GeometryError(f"metric entry ({i},{j}) is not over {self.vars}")
            for j in range(i + 1, d):
                if self.g[i][j].source() != self.g[j][i].source():
                    raise GeometryError(f"metric is not symmetric in entries ({i},{j})")

    @property
    def dim(self) -> int:
        return len(self.vars)

    @classmethod
    def euclidean(cls, vars: Sequence[str], chart, name: str = "euclidean") -> "MetricPatch":
        vars = tuple(vars)
        g = tuple(
            tuple(constant(1.0 if i == j else 0.0, vars) for j in range(len(vars)))
            for i in range(len(vars))
        )
        return cls(name, vars, tuple(map(tuple, chart)), g)

    @classmethod
    def from_strings(cls, vars: Sequence[str], chart, components, name: str = "patch") -> "MetricPatch":
        vars = tuple(vars)
        g = tuple(tuple(parse(str(c), vars) for c in row) for row in components)
        return cls(name, vars, tuple(map(tuple, chart)), g)

    @classmethod
    def diagonal(cls, vars: Sequence[str], chart, entries: Sequence[str], name: str = "patch") -> "MetricPatch":
        d = len(entries)
        comps = [[entries[i] if i == j else "0" for j in range(d)] for i in range(d)]
        return cls.from_strings(vars, chart, comps, name)

    def contains(self, point: Sequence[float]) -> bool:
        return len(point) == self.dim and all(lo < x < hi for x, (lo, hi) in zip(point, self.chart))

    def metric_at(self, point: Sequence[float]) -> np.ndarray:
        return np.array([[gij.evaluate(point) for gij in row] for row in self.g])

    def check_positive(self, points: Sequence[Sequence[float]]) -> None:
        """Raise unless every leading principal minor is positive at ``points``."""
        for p in points:
            gm = self.metric_at(p)
            for k in range(1, self.dim + 1):
                if np.linalg.det(gm[:k, :k]) <= 0:
                    raise GeometryError(f"{self.name}: metric not positive-definite at {tuple(p)}")

    def renamed(self, names: Sequence[str], name: str | None = None) -> "MetricPatch":
        names = tuple(names)
        mapping = dict(zip(self.vars, names))
        g = tuple(tuple(e.rename(mapping, names) for e in row) for row in self.g)
        return MetricPatch(name or self.name, names, self.chart, g)


# -- local geometry in jet arithmetic -------------------------------------------------

class LocalGeometry:
    """Metric, connection and curvature of a patch as jets about one point.

    ``coords`` are the jets of the patch coordinates.  They are normally the
    variables ``offset .. offset+dim-1`` of a (possibly larger) jet space, so
    the same machinery serves a factor of a product chart.
    """

    def __init__(self, patch: MetricPatch, coords: Sequence[J.Jet], offset: int = 0):
        self.patch = patch
        self.coords = list(coords)
        self.space = self.coords[0].space
        self.offset = offset
        self.dim = patch.dim
        env = dict(zip(patch.vars, self.coords))
        order = min(c.order for c in self.coords)
        self.order = order
        rows = [[e.jet_in(self.space, env, order) for e in row] for row in patch.g]
        self.g = J.stack([J.stack(r) for r in rows])

    @classmethod
    def at(cls, patch: MetricPatch, point: Sequence[float], order: int = J.MAX_ORDER) -> "LocalGeometry":
        if len(point) != patch.dim:
            raise GeometryError(f"{patch.name} expects {patch.dim} coordinates, got {len(point)}")
        space = J.jet_space(patch.dim, order)
        return cls(patch, space.variables(point))

    def d(self, jet: J.Jet, i: int) -> J.Jet:
        return jet.d(self.offset + i)

    def dall(self, jet: J.Jet) -> J.Jet:
        """Partials along a new leading axis: ``out[i] = ∂_i jet``."""
        return J.stack([self.d(jet, i) for i in range(self.dim)])

    def scalar(self, expr: ScalarFieldExpr) -> J.Jet:
        env = dict(zip(self.patch.vars, self.coords))
        return expr.jet_in(self.space, env, self.order)

    @cached_property
    def ginv(self) -> J.Jet:
        if abs(np.linalg.det(self.g.coeffs[..., 0])) < 1e-300:
            raise SingularMetric(f"{self.patch.name}: singular metric")
        try:
            return J.inverse(self.g)
        except np.linalg.LinAlgError as exc:
            raise SingularMetric(f"{self.patch.name}: singular metric") from exc

    @cached_property
    def dg(self) -> J.Jet:
        return self.dall(self.g)  # [l, i, j] = ∂_l g_ij

    @cached_property
    def gamma(self) -> J.Jet:
        dg = self.dg
        # lowered: Γ_lij = ½(∂_i g_jl + ∂_j g_il - ∂_l g_ij)
        low = (dg.transpose(2, 0, 1) + dg.transpose(2, 1, 0) - dg) * 0.5
        return J.contract("kl,lij->kij", self.ginv, low)

    @cached_property
    def riemann(self) -> J.Jet:
        gam = self.gamma
        dgam = self.dall(gam)  # [i, l, j, k] = ∂_i Γ^l_jk
        # R^l_kij = ∂_i Γ^l_jk - ∂_j Γ^l_ik + Γ^l_im Γ^m_jk - Γ^l_jm Γ^m_ik
        a = dgam.transpose(1, 3, 0, 2)  # [l, k, i, j] = ∂_i Γ^l_jk
        quad = J.contract("lim,mjk->lkij", gam, gam)
        return a - a.transpose(0, 1, 3, 2) + quad - quad.transpose(0, 1, 3, 2)

    @cached_property
    def ricci(self) -> J.Jet:
        return J.contract("kikj->ij", self.riemann)

    # -- calculus on functions and vector fields -----------------------------------
    def grad(self, h: J.Jet) -> J.Jet:
        return J.contract("ij,j->i", self.ginv, self.dall(h))

    def hessian(self, h: J.Jet) -> J.Jet:
        dh = self.dall(h)
        ddh = self.dall(dh)
        return ddh - J.contract("kij,k->ij", self.gamma, dh)

    def laplacian(self, h: J.Jet) -> J.Jet:
        """Analyst-sign Laplace-Beltrami ``g^ij Hess(h)_ij``."""
        return J.contract("ij,ij->", self.ginv, self.hessian(h))

    def inner(self, u: J.Jet, v: J.Jet) -> J.Jet:
        return J.contract("ij,i,j->", self.g, u, v)

    def norm2(self, u: J.Jet) -> J.Jet:
        return self.inner(u, u)

    def covd(self, v: J.Jet) -> J.Jet:
        """``out[i, k] = (∇_i V)^k`` for a vector field ``V``."""
        return self.dall(v) + J.contract("kij,j->ik", self.gamma, v)

    def covd_along(self, x: J.Jet, v: J.Jet) -> J.Jet:
        return J.contract("i,ik->k", x, self.covd(v))

    def trace_hess_vector(self, v: J.Jet) -> J.Jet:
        """``trace ∇²V = g^ij (∇_i ∇_j V - Γ^k_ij ∇_k V)`` (analyst sign)."""
        nv = self.covd(v)  # [j, k]
        dnv = self.dall(nv)  # [i, j, k]
        # ∇_i(∇V)_j^k = ∂_i (∇_j V^k) + Γ^k_il (∇_j V)^l - Γ^l_ij (∇_l V)^k
        second = (
            dnv
            + J.contract("kil,jl->ijk", self.gamma, nv)
            - J.contract("lij,lk->ijk", self.gamma, nv)
        )
        return J.contract("ij,ijk->k", self.ginv, second)

    def ricci_vector(self, v: J.Jet) -> J.Jet:
        """Ricci endomorphism ``Ric(V)^k = g^kl R_lj V^j``."""
        return J.contract("kl,lj,j->k", self.ginv, self.ricci, v)

    def curvature_apply(self, x: J.Jet, y: J.Jet, z: J.Jet) -> J.Jet:
        """``R(X, Y) Z``."""
        return J.contract("lkij,i,j,k->l", self.riemann, x, y, z)


# -- value-level records and operations -----------------------------------------------

@dataclass(frozen=True)
class ChristoffelAt:
    point: tuple[float, ...]
    symbols: np.ndarray  # [k, i, j]


@dataclass(frozen=True)
class CurvatureAt:
    point: tuple[float, ...]
    riemann: np.ndarray  # [l, k, i, j]
    ricci: np.ndarray = field(repr=False)


def _local(M: MetricPatch, p: Sequence[float], order: int) -> LocalGeometry:
    return LocalGeometry.at(M, tuple(map(float, p)), order)


def christoffel(M: MetricPatch, p: Sequence[float]) -> ChristoffelAt:
    loc = _local(M, p, 1)
    return ChristoffelAt(tuple(map(float, p)), np.array(loc.gamma.value))


def curvature(M: MetricPatch, p: Sequence[float]) -> CurvatureAt:
    loc = _local(M, p, 2)
    return CurvatureAt(tuple(map(float, p)), np.array(loc.riemann.value), np.array(loc.ricci.value))


def _field_jet(loc: LocalGeometry, h: ScalarFieldExpr) -> J.Jet:
    if h.vars != loc.patch.vars:
        if not h.free_vars <= set(loc.patch.vars):
            raise ExprError(f"field over {h.vars} is not a function on {loc.patch.name}")
    return loc.scalar(h)


def grad(M: MetricPatch, h: ScalarFieldExpr, p: Sequence[float]) -> np.ndarray:
    loc = _local(M, p, 1)
    return np.array(loc.grad(_field_jet(loc, h)).value, dtype=float).reshape(M.dim)


def laplace_beltrami(M: MetricPatch, h: ScalarFieldExpr, p: Sequence[float]) -> float:
    """Analyst-sign Laplacian ``trace Hess h`` at ``p``."""
    loc = _local(M, p, 2)
    return float(loc.laplacian(_field_jet(loc, h)).value)


def orthonormal_frame(gm: np.ndarray) -> np.ndarray:
    """Gram-Schmidt on the coordinate frame; columns are orthonormal for ``gm``."""
    d = gm.shape[0]
    frame = np.zeros((d, d))
    for a in range(d):
        v = np.zeros(d)
        v[a] = 1.0
        for b in range(a):
            e = frame[:, b]
            v = v - (e @ gm @ v) * e
        nrm = np.sqrt(v @ gm @ v)
        if not nrm > 0:
            raise SingularMetric("metric is not positive-definite")
        frame[:, a] = v / nrm
    return frame


def trace_form(gm: np.ndarray, form: np.ndarray, method: str = "contraction") -> np.ndarray:
    """g-trace of a (possibly vector-valued) bilinear form ``form[i, j, ...]``."""
    if method == "contraction":
        return np.tensordot(np.linalg.inv(gm), form, axes=([0, 1], [0, 1]))
    if method == "frame":
        e = orthonormal_frame(gm)
        return np.einsum("ia,ja,ij...->...", e, e, form)
    raise ValueError(f"unknown trace method {method!r}")


def trace_g(
    M: MetricPatch,
    sampler: Callable[[np.ndarray, np.ndarray], float],
    p: Sequence[float],
    method: str = "contraction",
):
    """g-trace of a bilinear sampler at ``p``.

    ``method="contraction"`` returns ``g^ij S(∂_i, ∂_j)``; ``method="frame"``
    sums ``S(e_a, e_a)`` over a Gram-Schmidt orthonormal frame.
    """
    gm = M.metric_at(p)
    d = M.dim
    if method == "frame":
        e = orthonormal_frame(gm)
        return sum(np.asarray(sampler(e[:, a], e[:, a])) for a in range(d))
    basis = np.eye(d)
    form = np.array([[np.asarray(sampler(basis[i], basis[j])) for j in range(d)] for i in range(d)])
    return trace_form(gm, form, "contraction")
