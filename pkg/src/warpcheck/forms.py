"""Closed-form tension and bitension fields for maps built from a doubly warped product.

Every field comes in named variants so that a verifier can compare each one
with the first-principles bitension of the corresponding map:

``printed``          the formula as typeset, every ``grad`` taken in the factor
                     metric (``g_B`` or ``g_F``).
``warped-gradient``  the same formula with every ``grad`` / ``|.|`` read in the
                     metric of the manifold the function lives on (the warped
                     metric on the product, the factor metric otherwise).
``corrected``        the expression derived from the connection and curvature
                     of the warped metric; it agrees with the oracle.

Some fields have extra intermediate variants (see ``VARIANTS``).  Notation in
comments: ``β = b²``, ``ψ = f²``, ``u = 1/β``, ``v = 1/ψ``, ``∇`` a factor
gradient, ``w = ∇ ln b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import jets as J
from .expr import ScalarFieldExpr, constant, parse
from .geometry import LocalGeometry, MetricPatch
from .maps import MapJets, SmoothMap, bitension_oracle, tension, tension_and_bitension
from .warped import DwpSpace, SplitVector

VARIANTS = {
    "inclusion-b": ("printed", "warped-gradient", "corrected"),
    "inclusion-f": ("printed", "proof", "warped-gradient", "corrected"),
    "proj-first": ("printed", "warped-gradient", "corrected"),
    "proj-second": ("printed", "warped-gradient", "corrected"),
    "product-dom": ("printed", "warped-gradient", "corrected"),
    "product-dom-mirror": ("printed", "warped-gradient", "corrected"),
}

HARMONIC_TOL = 1e-9


class PreconditionError(ValueError):
    """A map handed to a closed form does not satisfy its hypotheses."""


@dataclass(frozen=True)
class Correction:
    equation: str
    term: str
    printed: str
    corrected: str


@dataclass(frozen=True)
class ClosedFormField:
    label: str
    evaluator: Callable[[Sequence[float]], SplitVector]
    correction_notes: tuple[Correction, ...] = ()
    variant: str = "corrected"

    def __call__(self, p: Sequence[float]) -> SplitVector:
        return self.evaluator(p)


class Kind(str, Enum):
    harmonic = "harmonic"
    proper_biharmonic = "proper_biharmonic"
    not_biharmonic = "not_biharmonic"
    indeterminate = "indeterminate"


@dataclass(frozen=True)
class BiharmonicClass:
    kind: Kind
    tau_norm: float
    tau2_norm: float
    tol: float
    corollary: "CorollaryCheck | None" = None

    @property
    def agrees(self) -> bool | None:
        if self.corollary is None or self.corollary.prediction is None or self.kind is Kind.indeterminate:
            return None
        return (self.kind is Kind.proper_biharmonic) == self.corollary.prediction


@dataclass(frozen=True)
class CorollaryCheck:
    opposite_constant: bool
    critical_warping: bool | None
    critical_norm: bool | None
    prediction: bool | None
    notes: tuple[str, ...] = ()


def classify(tau_norm: float, tau2_norm: float, tol: float = 1e-7, margin: float = 10.0) -> Kind:
    """Sort a pair of field norms; values within a factor ``margin`` of ``tol`` are indeterminate."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")

    def side(x):
        if x <= tol / margin:
            return True
        if x > tol * margin:
            return False
        return None

    small_tau, small_tau2 = side(tau_norm), side(tau2_norm)
    if small_tau:
        return Kind.harmonic
    if small_tau2 is False:
        return Kind.not_biharmonic
    if small_tau is None or small_tau2 is None:
        return Kind.indeterminate
    return Kind.proper_biharmonic


def _v(jet: J.Jet) -> np.ndarray:
    return np.asarray(jet.value, dtype=float)


def _vars_expr(names: Sequence[str], all_names: Sequence[str]) -> list[ScalarFieldExpr]:
    return [parse(n, all_names) for n in names]


def _consts(values, all_names) -> list[ScalarFieldExpr]:
    return [constant(float(c), all_names) for c in values]


# -- maps whose bitension the closed forms describe ---------------------------------

def inclusion_map(space: DwpSpace, side: str, basepoint: Sequence[float]) -> SmoothMap:
    """``i_{y0}: B → M`` (``side="B"``) or ``i_{x0}: F → M`` (``side="F"``)."""
    M = space.product_chart
    if side == "B":
        src = space.base
        comps = _vars_expr(src.vars, src.vars) + _consts(basepoint, src.vars)
    elif side == "F":
        src = space.fiber
        comps = _consts(basepoint, src.vars) + _vars_expr(src.vars, src.vars)
    else:
        raise ValueError("side must be 'B' or 'F'")
    return SmoothMap(src, M, tuple(comps), name=f"i_{side}")


def projection_map(space: DwpSpace, side: str) -> SmoothMap:
    """``π̄: M → B`` (``side="B"``) or ``σ̃: M → F`` (``side="F"``)."""
    M = space.product_chart
    tgt = space.base if side == "B" else space.fiber
    return SmoothMap(M, tgt, tuple(_vars_expr(tgt.vars, M.vars)), name=f"proj_{side}")


def _lift(phi: SmoothMap, names) -> list[ScalarFieldExpr]:
    return [c.with_vars(names) for c in phi.components]


def product_map(space: DwpSpace, phi: SmoothMap, side: str, warped_domain: bool = True) -> SmoothMap:
    """``I × φ`` (``side="F"``, φ on F) or ``φ × I`` (``side="B"``, φ on B).

    With ``warped_domain`` the domain is the doubly warped product and the
    codomain the plain product; otherwise the roles are exchanged.
    """
    M, P = space.product_chart, space.plain_product
    src, tgt = (M, P) if warped_domain else (P, M)
    names = src.vars
    if side == "F":
        _check_factor_map(phi, space.fiber)
        comps = _vars_expr(space.base.vars, names) + _lift(phi, names)
    elif side == "B":
        _check_factor_map(phi, space.base)
        comps = _lift(phi, names) + _vars_expr(space.fiber.vars, names)
    else:
        raise ValueError("side must be 'B' or 'F'")
    return SmoothMap(src, tgt, tuple(comps), name=f"product_{side}")


def _check_factor_map(phi: SmoothMap, patch: MetricPatch) -> None:
    if phi.source.vars != patch.vars or phi.target.vars != patch.vars:
        raise PreconditionError(f"{phi.name} must map the factor over {patch.vars} to itself")


def check_harmonic(phi: SmoothMap, points, tol: float = HARMONIC_TOL) -> float:
    """Largest ``|τ(φ)|`` over ``points``; raises if any exceeds ``tol``."""
    worst = 0.0
    for q in points:
        worst = max(worst, float(np.max(np.abs(tension(phi, q)))))
    if worst > tol:
        raise PreconditionError(f"{phi.name} is not harmonic: |tau| = {worst:.3e} > {tol:g}")
    return worst


# -- inclusions ----------------------------------------------------------------------------

_INCL_B_NOTES = {
    "warped-gradient": (
        Correction("4.1", "grad", "grad f², grad b² in g_F, g_B", "grad in the warped metric g"),
    ),
    "corrected": (
        Correction("4.1", "grad", "grad f², grad b² in g_F, g_B", "grad in the warped metric g"),
        Correction("4.1", "horizontal coefficient", "-m²/8", "(4m - m²)/8"),
        Correction("4.1", "Δ(ln b) coefficient", "m/2", "m"),
    ),
}


def _inclusion_parts(space: DwpSpace, x, y, swap: bool):
    """Factor data for the inclusion along the factor of ``x``; ``swap`` mirrors B and F."""
    S = space.swapped() if swap else space
    fj = S.local(np.concatenate([x, y]), 3)
    beta, psi = float(_v(fj.b2)), float(_v(fj.f2))
    gbeta = _v(fj.grad_b2())
    G = fj.F.grad(fj.f2)
    G2 = fj.F.norm2(G)
    return dict(
        m=S.m, n=S.n, beta=beta, psi=psi, gbeta=gbeta,
        lap_lnb=float(_v(fj.B.laplacian(fj.lnb))),
        G=_v(G), G2=float(_v(G2)), gG2=_v(fj.F.grad(G2)),
    )


def _inclusion_fields(c: dict, variant: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(τ_B, τ_F, τ₂_B, τ₂_F)`` for ``i_{y0}`` with factor data ``c``."""
    m, beta, psi = c["m"], c["beta"], c["psi"]
    G, G2, gG2, gbeta = c["G"], c["G2"], c["gG2"], c["gbeta"]
    u = 1.0 / beta
    zero_b = np.zeros_like(gbeta)
    if variant == "printed":
        tau = -(m / 2) * G
        h2 = -(m**2 / (8 * beta)) * G2 * gbeta
        v2 = (m / 2) * c["lap_lnb"] * G + (m**2 / 8) * gG2
        return zero_b, tau, h2, v2
    A = u * G2 / psi
    ell = gbeta / beta
    tau = -(m / 2) * u * G
    if variant == "warped-gradient":
        h2 = -(m**2 / 8) * A * ell
        v2 = (m / 2) * u * c["lap_lnb"] * G + (m**2 / 8) * u**2 * gG2
    elif variant == "corrected":
        h2 = (m / 2 - m**2 / 8) * A * ell
        v2 = m * u * c["lap_lnb"] * G + (m**2 / 8) * u**2 * gG2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return zero_b, tau, h2, v2


def inclusion_B_fields(space: DwpSpace, y0: Sequence[float], variant: str = "corrected"):
    """``(τ, τ₂)`` of ``i_{y0}: B → M`` as closed-form fields over B."""
    if variant not in VARIANTS["inclusion-b"]:
        raise ValueError(f"unknown variant {variant!r}")
    y0 = np.asarray(y0, dtype=float)
    if not space.fiber.contains(y0):
        raise ValueError(f"y0={tuple(y0)} lies outside the fiber chart")

    def both(x):
        c = _inclusion_parts(space, np.asarray(x, dtype=float), y0, swap=False)
        return _inclusion_fields(c, variant)

    notes = _INCL_B_NOTES.get(variant, ())
    tau = ClosedFormField("tau(i_y0)", lambda x: SplitVector(*both(x)[:2]), notes, variant)
    tau2 = ClosedFormField("tau2(i_y0)", lambda x: SplitVector(*both(x)[2:]), notes, variant)
    return tau, tau2


_INCL_F_NOTES = {
    "proof": (Correction("4.2", "Laplacian term", "Δ(ln b)", "Δ(ln f)"),),
    "warped-gradient": (
        Correction("4.2", "Laplacian term", "Δ(ln b)", "Δ(ln f)"),
        Correction("4.2", "grad", "grad b², grad f² in g_B, g_F", "grad in the warped metric g"),
    ),
    "corrected": (
        Correction("4.2", "Laplacian term", "Δ(ln b)", "Δ(ln f)"),
        Correction("4.2", "grad", "grad b², grad f² in g_B, g_F", "grad in the warped metric g"),
        Correction("4.2", "vertical coefficient", "-n²/8", "(4n - n²)/8"),
        Correction("4.2", "Δ(ln f) coefficient", "n/2", "n"),
    ),
}


def inclusion_F_fields(space: DwpSpace, x0: Sequence[float], variant: str = "corrected"):
    """``(τ, τ₂)`` of ``i_{x0}: F → M`` as closed-form fields over F.

    ``printed`` keeps the statement's ``Δ(ln b)`` (read on B at ``x0``);
    ``proof`` uses ``Δ(ln f)`` as the last display of the argument does.
    """
    if variant not in VARIANTS["inclusion-f"]:
        raise ValueError(f"unknown variant {variant!r}")
    x0 = np.asarray(x0, dtype=float)
    if not space.base.contains(x0):
        raise ValueError(f"x0={tuple(x0)} lies outside the base chart")

    def both(y):
        y = np.asarray(y, dtype=float)
        c = _inclusion_parts(space, y, x0, swap=True)
        if variant == "printed":
            fj = space.local(np.concatenate([x0, y]), 2)
            c["lap_lnb"] = float(_v(fj.B.laplacian(fj.lnb)))
        inner = "printed" if variant in ("printed", "proof") else variant
        tv, th, t2v, t2h = _inclusion_fields(c, inner)
        return th, tv, t2h, t2v

    notes = _INCL_F_NOTES.get(variant, ())
    tau = ClosedFormField("tau(i_x0)", lambda y: SplitVector(*both(y)[:2]), notes, variant)
    tau2 = ClosedFormField("tau2(i_x0)", lambda y: SplitVector(*both(y)[2:]), notes, variant)
    return tau, tau2


def inclusion_oracle(space: DwpSpace, side: str, basepoint: Sequence[float]):
    """``q ↦ (τ, τ₂)`` from first principles for the inclusion on ``side``."""
    phi = inclusion_map(space, side, basepoint)
    m = space.m

    def ev(q):
        tau, tau2 = tension_and_bitension(phi, q)
        return SplitVector.split(tau, m), SplitVector.split(tau2, m)

    return ev


def _norm(v: np.ndarray, g: np.ndarray) -> float:
    return float(np.sqrt(max(v @ g @ v, 0.0)))


def corollary_check(space: DwpSpace, side: str, basepoint: Sequence[float], at: Sequence[float],
                    k: int = 9, tol: float = 1e-7) -> CorollaryCheck:
    """Analytic conditions of the inclusion corollaries at the point ``at``.

    For ``side="B"``: the inclusion at ``y0`` is proper biharmonic iff ``b``
    is constant, ``y0`` is not critical for ``f²`` and is critical for
    ``|grad f²|²``; mirrored for ``side="F"``.  Constancy of the opposite
    warping function is judged from ``k`` sample points of its chart.
    """
    S = space if side == "B" else space.swapped()
    other = S.base
    lo = np.array([a for a, _ in other.chart], dtype=float)
    hi = np.array([b for _, b in other.chart], dtype=float)
    ts = np.linspace(0.05, 0.95, k)
    samples = [lo + t * (hi - lo) for t in ts] + [lo + t * (hi - lo) * np.roll(np.ones_like(lo), 1) for t in ts]
    vals = [S.b2.evaluate(q) for q in samples]
    grads = [float(np.max(np.abs(_v(LocalGeometry.at(other, q, 1).dall(
        LocalGeometry.at(other, q, 1).scalar(S.b2)))))) for q in samples]
    opposite_constant = (max(vals) - min(vals) <= tol) and max(grads) <= tol
    c = _inclusion_parts(S, np.asarray(at, dtype=float), np.asarray(basepoint, dtype=float), swap=False)
    crit_w = bool(np.sqrt(max(c["G2"], 0.0)) <= tol)
    crit_n = bool(np.max(np.abs(c["gG2"])) <= tol)
    prediction = opposite_constant and not crit_w and crit_n
    return CorollaryCheck(opposite_constant, crit_w, crit_n, prediction)


def classify_inclusion(space: DwpSpace, side: str, basepoint: Sequence[float], tol: float = 1e-7,
                       at: Sequence[float] | None = None) -> BiharmonicClass:
    """Classify ``i_{y0}`` (``side="B"``) or ``i_{x0}`` (``side="F"``) at one point of its domain.

    The verdict comes from the first-principles fields; the corollary
    conditions are evaluated alongside and exposed through ``.agrees``.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    dom = space.base if side == "B" else space.fiber
    if at is None:
        at = [0.5 * (a + b) for a, b in dom.chart]
    phi = inclusion_map(space, side, basepoint)
    tau, tau2 = tension_and_bitension(phi, at)
    g = space.product_chart.metric_at(phi(at))
    kind = classify(_norm(tau, g), _norm(tau2, g), tol)
    cor = corollary_check(space, side, basepoint, at, tol=tol)
    return BiharmonicClass(kind, _norm(tau, g), _norm(tau2, g), tol, cor)


# -- projections ---------------------------------------------------------------------------

_PROJ_NOTES = {
    "B": {
        "warped-gradient": (Correction("5.7", "grad", "grad ln b in g_B", "grad ln b in the warped metric g"),),
        "corrected": (
            Correction("5.7", "grad", "grad ln b in g_B", "grad ln b in the warped metric g"),
            Correction("5.7", "missing fiber term", "(absent)",
                       "(n/b²)[(2 - m/2)|grad f²|²/f⁶ - Δ(f²)/f⁴] grad ln b"),
        ),
    },
    "F": {
        "warped-gradient": (Correction("5.12", "grad", "grad ln f in g_F", "grad ln f in the warped metric g"),),
        "corrected": (
            Correction("5.12", "grad", "grad ln f in g_F", "grad ln f in the warped metric g"),
            Correction("5.12", "missing base term", "(absent)",
                       "(m/f²)[(2 - n/2)|grad b²|²/b⁶ - Δ(b²)/b⁴] grad ln f"),
        ),
    },
}


def _projection_value(space: DwpSpace, p, variant: str) -> np.ndarray:
    fj = space.local(p, 3)
    m, n = space.m, space.n
    B, F = fj.B, fj.F
    w = B.grad(fj.lnb)
    T = _v(B.trace_hess_vector(w))
    R = _v(B.ricci_vector(w))
    gw2 = _v(B.grad(B.norm2(w)))
    beta, psi = float(_v(fj.b2)), float(_v(fj.f2))
    if variant == "printed":
        return (n / psi) * (T + R) + (n**2 / 2) * gw2
    out = (n / psi**2) * (T + R + (n / 2) * gw2)
    if variant == "warped-gradient":
        return out
    if variant != "corrected":
        raise ValueError(f"unknown variant {variant!r}")
    gpsi = F.grad(fj.f2)
    npsi = float(_v(F.norm2(gpsi)))
    lap_psi = float(_v(F.laplacian(fj.f2)))
    return out + (n / beta) * ((2 - m / 2) * npsi / psi**3 - lap_psi / psi**2) * _v(w)


def projection_first_bitension(space: DwpSpace, p: Sequence[float], variant: str = "corrected") -> np.ndarray:
    """``τ₂(π̄)`` at ``p = (x, y)``, a vector on B."""
    return _projection_value(space, np.asarray(p, dtype=float), variant)


def projection_second_bitension(space: DwpSpace, p: Sequence[float], variant: str = "corrected") -> np.ndarray:
    """``τ₂(σ̃)`` at ``p = (x, y)``, a vector on F (mirror of the first projection)."""
    x, y = space.split(p)
    return _projection_value(space.swapped(), np.concatenate([y, x]), variant)


def projection_tension(space: DwpSpace, p: Sequence[float], side: str = "B") -> np.ndarray:
    """``τ(π̄) = (n/f²) grad_B ln b`` (``side="B"``) or its mirror."""
    S, q = (space, np.asarray(p, float)) if side == "B" else (space.swapped(), np.concatenate(space.split(p)[::-1]))
    fj = S.local(q, 1)
    return (S.n / float(_v(fj.f2))) * _v(fj.B.grad(fj.lnb))


def projection_field(space: DwpSpace, side: str, variant: str = "corrected") -> ClosedFormField:
    notes = _PROJ_NOTES[side].get(variant, ())
    if side == "B":
        def ev(p):
            return SplitVector(projection_first_bitension(space, p, variant), np.zeros(0))
    else:
        def ev(p):
            return SplitVector(np.zeros(0), projection_second_bitension(space, p, variant))
    return ClosedFormField(f"tau2(proj_{side})", ev, notes, variant)


# -- product maps with warped domain -------------------------------------------------------

_LAMBDA_NOTES = {
    "F": {
        "warped-gradient": (Correction("5.9", "grad", "grad ln f in g_F", "grad ln f in the warped metric g"),),
        "corrected": (
            Correction("5.9", "grad", "grad ln f in g_F", "grad ln f in the warped metric g"),
            Correction("5.9", "norm term", "(m²/2) grad|dφ(grad ln f)|²",
                       "(m²/b⁴) ∇^φ_{grad ln f} dφ(grad ln f)"),
            Correction("5.9", "missing base term", "(absent)",
                       "(m/f²)[Δ(1/b²) - (n/2)|grad ln b²|²/b²] dφ(grad ln f)"),
        ),
    },
    "B": {
        "warped-gradient": (Correction("5.14", "grad", "grad ln b in g_B", "grad ln b in the warped metric g"),),
        "corrected": (
            Correction("5.14", "grad", "grad ln b in g_B", "grad ln b in the warped metric g"),
            Correction("5.14", "norm term", "(n²/2) grad|dφ(grad ln b)|²",
                       "(n²/f⁴) ∇^φ_{grad ln b} dφ(grad ln b)"),
            Correction("5.14", "missing fiber term", "(absent)",
                       "(n/b²)[Δ(1/f²) - (m/2)|grad ln f²|²/f²] dφ(grad ln b)"),
        ),
    },
}


@dataclass(frozen=True)
class ProductFields:
    tau: SplitVector
    tau2: SplitVector
    second: np.ndarray
    harmonic_residual: float = 0.0
    notes: tuple[Correction, ...] = field(default=())


def _lambda_value(space: DwpSpace, phi: SmoothMap, x, y, variant: str) -> tuple[np.ndarray, np.ndarray]:
    """``(τ second slot, Λ)`` for ``I × φ`` with φ on the fiber of ``space``."""
    m, n = space.m, space.n
    ctx = MapJets(phi, y, J.MAX_ORDER)
    lnf = ctx.src.scalar(space.lnf)
    glnf = ctx.src.grad(lnf)
    Z = J.contract("i,ia->a", glnf, ctx.dphi)
    bx = LocalGeometry.at(space.base, x, 2)
    beta = bx.scalar(space.b2)
    b = float(_v(beta))
    u = 1.0 / b
    tau_v = m * u * _v(Z)
    jz = _v(ctx.jacobi_jet(Z))
    if variant == "printed":
        gz2 = _v(ctx.src.grad(J.contract("a,ab,b->", Z, ctx.h, Z)))
        return m * _v(Z), -(m * u) * jz + (m**2 / 2) * gz2
    if variant == "warped-gradient":
        gz2 = _v(ctx.src.grad(J.contract("a,ab,b->", Z, ctx.h, Z)))
        return tau_v, -(m * u**2) * jz + (m**2 / 2) * u**3 * gz2
    if variant != "corrected":
        raise ValueError(f"unknown variant {variant!r}")
    nab = _v(J.contract("i,ia->a", glnf, ctx.covd(Z)))
    lap_u = float(_v(bx.laplacian(1.0 / beta)))
    ell = bx.grad(J.log(beta))
    ell2 = float(_v(bx.norm2(ell)))
    psi = float(space.f2.evaluate(y))
    lam = -(m * u**2) * jz + (m**2 * u**2) * nab + (m / psi) * (lap_u - (n / 2) * u * ell2) * _v(Z)
    return tau_v, lam


def _require_harmonic(phi: SmoothMap, points, tol: float) -> float:
    return check_harmonic(phi, points, tol)


def product_domain_warped(space: DwpSpace, phi: SmoothMap, p: Sequence[float], variant: str = "corrected",
                          harmonic_points=None, harmonic_tol: float = HARMONIC_TOL) -> ProductFields:
    """``τ`` and ``τ₂`` of ``I × φ``: ``M → B × F`` from closed forms, with ``Λ`` as second slot."""
    _check_factor_map(phi, space.fiber)
    x, y = space.split(p)
    res = _require_harmonic(phi, harmonic_points if harmonic_points is not None else [y], harmonic_tol)
    tau_v, lam = _lambda_value(space, phi, x, y, variant)
    first = projection_first_bitension(space, p, variant)
    tau_h = projection_tension(space, p, "B") if variant != "printed" else space.n * _v(
        LocalGeometry.at(space.base, x, 1).grad(LocalGeometry.at(space.base, x, 1).scalar(space.lnb)))
    notes = _PROJ_NOTES["B"].get(variant, ()) + _LAMBDA_NOTES["F"].get(variant, ())
    return ProductFields(SplitVector(tau_h, tau_v), SplitVector(first, lam), lam, res, notes)


def product_domain_warped_mirror(space: DwpSpace, phi: SmoothMap, p: Sequence[float], variant: str = "corrected",
                                 harmonic_points=None, harmonic_tol: float = HARMONIC_TOL) -> ProductFields:
    """``φ × I``: ``M → B × F`` with φ harmonic on B; first slot is ``Ω``."""
    _check_factor_map(phi, space.base)
    x, y = space.split(p)
    S = space.swapped()
    res = _require_harmonic(phi, harmonic_points if harmonic_points is not None else [x], harmonic_tol)
    tau_h, omega = _lambda_value(S, phi, y, x, variant)
    second = projection_second_bitension(space, p, variant)
    tau_v = projection_tension(space, p, "F") if variant != "printed" else space.m * _v(
        LocalGeometry.at(space.fiber, y, 1).grad(LocalGeometry.at(space.fiber, y, 1).scalar(space.lnf)))
    notes = _LAMBDA_NOTES["B"].get(variant, ()) + _PROJ_NOTES["F"].get(variant, ())
    return ProductFields(SplitVector(tau_h, tau_v), SplitVector(omega, second), omega, res, notes)


def product_oracle(space: DwpSpace, phi: SmoothMap, side: str, warped_domain: bool = True):
    Psi = product_map(space, phi, side, warped_domain)
    m = space.m

    def ev(p):
        tau, tau2 = tension_and_bitension(Psi, p)
        return SplitVector.split(tau, m), SplitVector.split(tau2, m)

    return ev


# -- warped codomain ----------------------------------------------------------------------------

READINGS = ("a", "b")


@dataclass(frozen=True)
class CodomainConditions:
    lhs_b: dict  # reading -> vector on B
    lhs_f: dict  # reading -> vector on F
    oracle_tau2: np.ndarray
    energy: float

    def holds(self, reading: str, tol: float) -> bool:
        return bool(np.max(np.abs(self.lhs_b[reading])) <= tol and np.max(np.abs(self.lhs_f[reading])) <= tol)

    def oracle_zero(self, tol: float) -> bool:
        return bool(np.max(np.abs(self.oracle_tau2)) <= tol)


def codomain_warped_conditions(space: DwpSpace, phi: SmoothMap, p: Sequence[float],
                               harmonic_points=None, harmonic_tol: float = HARMONIC_TOL) -> CodomainConditions:
    """Both biharmonicity conditions for ``I × φ: B × F → M`` as typeset, plus the oracle ``τ₂``.

    Two scalar terms are not well typed as printed; each is evaluated in two
    readings:

    ``dφ(Δ(f²))``        (a) ``(Δ f²)∘φ``; (b) ``Δ(f² ∘ φ)``.
    ``dφ(Δ(ln f))``      (a) ``(Δ ln f)∘φ``; (b) ``Δ(ln f ∘ φ)``.
    ``dφ(grad e(φ))``    (a) ``dφ(grad e(φ))``; (b) ``grad e(φ)`` read as a
                         vector at ``φ(y)`` without ``dφ``.

    All gradients are factor gradients, ``f`` and its derivatives are taken
    at ``φ(y)``, ``b`` at ``x``.
    """
    _check_factor_map(phi, space.fiber)
    x, y = space.split(p)
    res_pts = harmonic_points if harmonic_points is not None else [y]
    check_harmonic(phi, res_pts, harmonic_tol)
    m = space.m
    ctx = MapJets(phi, y, J.MAX_ORDER)
    tgt = ctx.tgt
    e_jet = ctx.energy_density()
    e = float(_v(e_jet))
    ge = _v(ctx.src.grad(e_jet))
    dphi = _v(ctx.dphi)  # [i, a]

    psi_t = tgt.scalar(space.f2)
    gpsi_t = tgt.grad(psi_t)
    npsi_t = tgt.norm2(gpsi_t)
    psi = float(_v(psi_t))
    gpsi = _v(gpsi_t)
    npsi = float(_v(npsi_t))
    lap_psi_a = float(_v(tgt.laplacian(psi_t)))
    lap_lnf_a = float(_v(tgt.laplacian(tgt.scalar(space.lnf))))
    psi_pull = ctx.pull(psi_t)
    lap_psi_b = float(_v(ctx.src.laplacian(psi_pull)))
    lap_lnf_b = float(_v(ctx.src.laplacian(ctx.pull(tgt.scalar(space.lnf)))))
    # J_φ of the section grad f² ∘ φ and grad|grad f²|² at φ(y)
    jg = _v(ctx.jacobi_jet(ctx.pull(gpsi_t)))
    gnpsi = _v(tgt.grad(npsi_t))

    B = LocalGeometry.at(space.base, x, 3)
    beta_j = B.scalar(space.b2)
    beta = float(_v(beta_j))
    gb_j = B.grad(beta_j)
    gb = _v(gb_j)
    nb = float(_v(B.norm2(gb_j)))
    T = _v(B.trace_hess_vector(gb_j))
    R = _v(B.ricci_vector(gb_j))
    gnb = _v(B.grad(B.norm2(gb_j)))
    lap_beta = float(_v(B.laplacian(beta_j)))
    lap_lnb = float(_v(B.laplacian(B.scalar(space.lnb))))

    lhs_b, lhs_f = {}, {}
    for r in READINGS:
        lap_psi = lap_psi_a if r == "a" else lap_psi_b
        lap_lnf = lap_lnf_a if r == "a" else lap_lnf_b
        dge = ge @ dphi if r == "a" else ge
        lhs_b[r] = (
            e * (-T - R + (e / 2) * gnb)
            + (m / 4) * (e / psi - m / (2 * beta)) * npsi * gb
            + (m / (4 * beta)) * lap_psi * gb
            + (e / 2) * lap_lnf * gb
        )
        lhs_f[r] = (
            (m / 2) * (-jg + (m / 4) * gnpsi)
            - (e / 2) * (e / psi - m / (2 * beta)) * nb * gpsi
            - nb / (2 * beta) * dge
            + e / (2 * psi) * lap_beta * gpsi
            + (m / 4) * lap_lnb * gpsi
        )
    Psi = product_map(space, phi, "F", warped_domain=False)
    return CodomainConditions(lhs_b, lhs_f, bitension_oracle(Psi, p), e)
