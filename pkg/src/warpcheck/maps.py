"""Calculus of maps between metric patches.

Everything here is computed from first principles: the map's component
expressions, the two metrics and their Levi-Civita connections.  Target
quantities are expanded as jets about ``φ(p)`` and composed with the jets of
``φ`` so that the pull-back connection can differentiate sections along the
map.  A single order-4 jet evaluation of ``φ`` carries enough derivatives for
the bitension field.

Sign conventions:

* ``tension``           τ(φ) = trace ∇dφ
* ``rough_laplacian``   Δv = -trace (∇^φ)² v
* ``jacobi``            J(V) = ΔV + trace R(dφ, V) dφ
* ``bitension_oracle``  τ₂(φ) = -J(τ(φ))
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .expr import ScalarFieldExpr, jet_array, parse
from .geometry import GeometryError, LocalGeometry, MetricPatch, trace_form


class InsufficientOrder(J.JetError):
    pass


@dataclass(frozen=True)
class SmoothMap:
    source: MetricPatch
    target: MetricPatch
    components: tuple[ScalarFieldExpr, ...]
    name: str = "phi"

    def __post_init__(self):
        if len(self.components) != self.target.dim:
            raise GeometryError(
                f"{self.name}: {len(self.components)} components for a {self.target.dim}-dimensional target"
            )
        for c in self.components:
            if c.vars != self.source.vars:
                raise GeometryError(f"{self.name}: component {c} is not over {self.source.vars}")

    @classmethod
    def from_strings(cls, source: MetricPatch, target: MetricPatch, comps: Sequence[str], name: str = "phi"):
        return cls(source, target, tuple(parse(c, source.vars) for c in comps), name)

    @classmethod
    def identity(cls, patch: MetricPatch, target: MetricPatch | None = None, name: str = "identity"):
        target = patch if target is None else target
        return cls.from_strings(patch, target, list(patch.vars), name)

    def __call__(self, point: Sequence[float]) -> np.ndarray:
        return np.array([c.evaluate(point) for c in self.components])

    def check_image(self, points) -> None:
        for p in points:
            if not self.target.contains(self(p)):
                raise GeometryError(f"{self.name}: image of {tuple(p)} leaves the target chart")


Provider = Callable[["MapJets"], J.Jet]


@dataclass(frozen=True)
class SectionAlongMap:
    """A section of φ⁻¹(TN) given over source coordinates.

    Either ``components`` (expressions) or ``provider`` (a function of the
    local :class:`MapJets`) defines it; providers let computed fields such as
    the tension field be differentiated along the map.
    """

    map: SmoothMap
    components: tuple[ScalarFieldExpr, ...] | None = None
    provider: Provider | None = None
    name: str = "V"

    def __post_init__(self):
        if (self.components is None) == (self.provider is None):
            raise ValueError("give exactly one of components or provider")
        if self.components is not None and len(self.components) != self.map.target.dim:
            raise GeometryError("section needs one component per target dimension")

    @classmethod
    def from_strings(cls, phi: SmoothMap, comps: Sequence[str], name: str = "V"):
        return cls(phi, tuple(parse(c, phi.source.vars) for c in comps), name=name)

    def jets(self, ctx: "MapJets") -> J.Jet:
        if self.provider is not None:
            return self.provider(ctx)
        return jet_array(list(self.components), ctx.src.coords)

    def __add__(self, other: "SectionAlongMap") -> "SectionAlongMap":
        a, b = self, other
        return SectionAlongMap(self.map, provider=lambda ctx: a.jets(ctx) + b.jets(ctx), name=f"{a.name}+{b.name}")

    def scaled(self, c: float) -> "SectionAlongMap":
        a = self
        return SectionAlongMap(self.map, provider=lambda ctx: a.jets(ctx) * c, name=f"{c}*{a.name}")


def tension_section(phi: SmoothMap) -> SectionAlongMap:
    return SectionAlongMap(phi, provider=lambda ctx: ctx.tension, name="tau")


class MapJets:
    """Jets of a map and of both geometries about a source point."""

    def __init__(self, phi: SmoothMap, point: Sequence[float], order: int = J.MAX_ORDER):
        self.phi = phi
        self.point = tuple(map(float, point))
        if len(self.point) != phi.source.dim:
            raise GeometryError(f"{phi.name} expects {phi.source.dim} source coordinates")
        self.src = LocalGeometry.at(phi.source, self.point, order)
        self.f = jet_array(list(phi.components), self.src.coords)  # [a]
        self.image = np.array(self.f.value, dtype=float).reshape(phi.target.dim)
        self.tgt = LocalGeometry.at(phi.target, self.image, order)
        self._table = J.power_table(self.tgt.space, list(self.f))

    def pull(self, jet: J.Jet) -> J.Jet:
        """Compose a target-space jet with φ."""
        return J.compose_table(jet, self._table)

    @cached_property
    def dphi(self) -> J.Jet:
        return self.src.dall(self.f)  # [i, a]

    @cached_property
    def h(self) -> J.Jet:
        return self.pull(self.tgt.g)

    @cached_property
    def target_gamma(self) -> J.Jet:
        return self.pull(self.tgt.gamma)

    @cached_property
    def target_riemann(self) -> J.Jet:
        return self.pull(self.tgt.riemann)

    def second_fundamental_form(self) -> J.Jet:
        """``(∇dφ)_ij^a``."""
        ddf = self.src.dall(self.dphi)  # [i, j, a]
        return (
            ddf
            - J.contract("kij,ka->ija", self.src.gamma, self.dphi)
            + J.contract("abc,ib,jc->ija", self.target_gamma, self.dphi, self.dphi)
        )

    @cached_property
    def tension(self) -> J.Jet:
        return J.contract("ij,ija->a", self.src.ginv, self.second_fundamental_form())

    def covd(self, v: J.Jet) -> J.Jet:
        """Pull-back covariant derivative ``out[i, a] = (∇^φ_i V)^a``."""
        return self.src.dall(v) + J.contract("abc,ib,c->ia", self.target_gamma, self.dphi, v)

    def second_covd(self, v: J.Jet) -> J.Jet:
        """``out[i, j, a] = (∇^φ_i ∇^φ_j V - ∇^φ_{∇_i ∂_j} V)^a``."""
        if v.order < 2:
            raise InsufficientOrder(f"second covariant derivative needs jet order >= 2, have {v.order}")
        w = self.covd(v)  # [j, a]
        return (
            self.src.dall(w)
            + J.contract("abc,ib,jc->ija", self.target_gamma, self.dphi, w)
            - J.contract("kij,ka->ija", self.src.gamma, w)
        )

    def curvature_form(self, v: J.Jet) -> J.Jet:
        """``out[i, j, l] = R(dφ(∂_i), V) dφ(∂_j)``."""
        return J.contract("lkab,ia,b,jk->ijl", self.target_riemann, self.dphi, v, self.dphi)

    def trace(self, form: J.Jet, method: str = "contraction") -> np.ndarray:
        gm = np.asarray(self.src.g.value, dtype=float)
        return trace_form(gm, np.asarray(form.value, dtype=float), method)

    def rough_laplacian_jet(self, v: J.Jet) -> J.Jet:
        return -J.contract("ij,ija->a", self.src.ginv, self.second_covd(v))

    def jacobi_jet(self, v: J.Jet) -> J.Jet:
        return self.rough_laplacian_jet(v) + J.contract("ij,ija->a", self.src.ginv, self.curvature_form(v))

    def energy_density(self) -> J.Jet:
        return 0.5 * J.contract("ij,ab,ia,jb->", self.src.ginv, self.h, self.dphi, self.dphi)


def _ctx(phi: SmoothMap, p: Sequence[float], order: int = J.MAX_ORDER) -> MapJets:
    return MapJets(phi, p, order)


def differential(phi: SmoothMap, p: Sequence[float], X: Sequence[float]) -> np.ndarray:
    ctx = MapJets(phi, p, 1)
    return np.asarray(ctx.dphi.value).reshape(phi.source.dim, phi.target.dim).T @ np.asarray(X, float)


def tension(phi: SmoothMap, p: Sequence[float], method: str = "contraction") -> np.ndarray:
    ctx = MapJets(phi, p, 2)
    return ctx.trace(ctx.second_fundamental_form(), method)


def rough_laplacian(V: SectionAlongMap, p: Sequence[float], method: str = "contraction") -> np.ndarray:
    ctx = _ctx(V.map, p)
    return -ctx.trace(ctx.second_covd(V.jets(ctx)), method)


def jacobi(phi: SmoothMap, V: SectionAlongMap, p: Sequence[float], method: str = "contraction") -> np.ndarray:
    if V.map is not phi and V.map != phi:
        raise GeometryError("section is not along the given map")
    ctx = _ctx(phi, p)
    v = V.jets(ctx)
    return -ctx.trace(ctx.second_covd(v), method) + ctx.trace(ctx.curvature_form(v), method)


def bitension_oracle(
    phi: SmoothMap, p: Sequence[float], method: str = "contraction", order: int = J.MAX_ORDER
) -> np.ndarray:
    """τ₂(φ) = -Δτ - trace R(dφ, τ)dφ from the metrics and the map alone.

    Needs jets of order 4; lower orders raise :class:`InsufficientOrder`.
    """
    ctx = _ctx(phi, p, order)
    tau = ctx.tension
    lap = -ctx.trace(ctx.second_covd(tau), method)
    curv = ctx.trace(ctx.curvature_form(tau), method)
    return -lap - curv


def tension_and_bitension(
    phi: SmoothMap, p: Sequence[float], method: str = "contraction", order: int = J.MAX_ORDER
):
    ctx = _ctx(phi, p, order)
    tau = ctx.tension
    lap = -ctx.trace(ctx.second_covd(tau), method)
    curv = ctx.trace(ctx.curvature_form(tau), method)
    return np.asarray(tau.value, dtype=float).reshape(phi.target.dim), -lap - curv


def energy_density(phi: SmoothMap, p: Sequence[float]) -> float:
    ctx = MapJets(phi, p, 1)
    return float(ctx.energy_density().value)
