"""Sampling verifier: closed forms against first-principles oracles.

Each case evaluates the oracle once per sample point and then compares the
closed-form variants from its correction catalog against the cached values.
By default the adopted (corrected) form is checked and the ledger records,
per correction, how far the printed form was off.  With ``printed_forms`` the
run starts from the printed form and walks the catalog until a variant
agrees; the first that does gives ``corrected-match``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Sequence

import numpy as np

from . import __version__
from . import forms as Fm
from .config import VerifyConfig
from .forms import ClosedFormField, Correction
from .maps import SmoothMap, tension_and_bitension
from .warped import (
    CONNECTION_FORMS,
    CURVATURE_FORMS,
    IllTyped,
    SplitVector,
    connection_oracle,
    curvature_difference_oracle,
    curvature_relation_closed,
    dwp_connection_closed,
)

MATCH, CORRECTED, MISMATCH = "match", "corrected-match", "mismatch"
REL_FLOOR = 1e-3  # below this oracle magnitude relative error becomes absolute / REL_FLOOR


def sample_points(chart: Sequence[tuple[float, float]], count: int, seed: int) -> list[np.ndarray]:
    """``count`` points uniform in ``chart`` shrunk by 1% per side."""
    if count < 1:
        raise ValueError("count must be at least 1")
    box = np.asarray(chart, dtype=float).reshape(-1, 2)
    if box.size == 0 or np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("empty chart")
    margin = 0.01 * (box[:, 1] - box[:, 0])
    lo, hi = box[:, 0] + margin, box[:, 1] - margin
    rng = np.random.default_rng(seed)
    return [lo + (hi - lo) * rng.random(len(box)) for _ in range(count)]


def _flat(v) -> np.ndarray:
    if isinstance(v, SplitVector):
        return v.vector
    if isinstance(v, tuple):
        return np.concatenate([_flat(x) for x in v])
    return np.ravel(np.asarray(v, dtype=float))


@dataclass
class PointRecord:
    index: int
    point: list[float]
    closed: list[float] | None
    oracle: list[float] | None
    abs_err: float | None
    rel_err: float | None
    component: int | None = None
    error: str | None = None

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "point": self.point,
            "closed": self.closed,
            "oracle": self.oracle,
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "component": self.component,
            "error": self.error,
        }


@dataclass
class LedgerEntry:
    equation: str
    term: str
    printed: str
    corrected: str
    err_before: float | None
    err_after: float | None
    evidence: str = ""

    def to_json(self) -> dict:
        return {
            "equation": self.equation,
            "term": self.term,
            "printed": self.printed,
            "corrected": self.corrected,
            "err_before": self.err_before,
            "err_after": self.err_after,
            "evidence": self.evidence,
        }


@dataclass
class FieldReport:
    case: str
    variant: str
    verdict: str
    max_abs_err: float
    max_rel_err: float
    tol: float
    metric: str
    points: list[PointRecord] = field(default_factory=list)
    ledger: list[LedgerEntry] = field(default_factory=list)
    worst_component: str | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def max_err(self) -> float:
        return self.max_abs_err if self.metric == "abs" else self.max_rel_err

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "variant": self.variant,
            "verdict": self.verdict,
            "metric": self.metric,
            "tol": self.tol,
            "max_abs_err": _num(self.max_abs_err),
            "max_rel_err": _num(self.max_rel_err),
            "worst_component": self.worst_component,
            "notes": list(self.notes),
            "points": [r.to_json() for r in self.points],
            "ledger": [e.to_json() for e in self.ledger],
        }


def _num(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return float(x)


Evaluator = Callable[[np.ndarray], object]


def _evaluate(fn: Evaluator, points) -> list[tuple[np.ndarray | None, str | None]]:
    out = []
    for p in points:
        try:
            out.append((_flat(fn(p)), None))
        except Exception as exc:  # reported per point; the run continues
            out.append((None, f"{type(exc).__name__}: {exc}"))
    return out


def _compare_values(case, variant, points, closed_vals, oracle_vals, tol, metric, labels=None) -> FieldReport:
    records = []
    max_abs = max_rel = 0.0
    worst = None
    failed = False
    for k, (p, (c, ce), (o, oe)) in enumerate(zip(points, closed_vals, oracle_vals)):
        if ce or oe or c is None or o is None or c.shape != o.shape:
            err = ce or oe or f"shape mismatch {None if c is None else c.shape} vs {None if o is None else o.shape}"
            records.append(PointRecord(k, [float(t) for t in p], None, None, None, None, None, err))
            failed = True
            continue
        d = np.abs(c - o)
        rel = d / np.maximum(np.abs(o), REL_FLOOR)
        score = d if metric == "abs" else rel
        j = int(np.argmax(score)) if score.size else None
        a, r = (float(d.max()), float(rel.max())) if d.size else (0.0, 0.0)
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(o))):
            failed = True
            a = r = math.inf
        if (a if metric == "abs" else r) > (max_abs if metric == "abs" else max_rel) and j is not None:
            worst = j
        max_abs, max_rel = max(max_abs, a), max(max_rel, r)
        records.append(PointRecord(k, [float(t) for t in p], c.tolist(), o.tolist(), a, r, j))
    ok = not failed and (max_abs if metric == "abs" else max_rel) <= tol
    name = None
    if worst is not None:
        name = labels[worst] if labels and worst < len(labels) else f"component[{worst}]"
    if failed:
        max_abs = max_rel = math.inf
    return FieldReport(case, variant, MATCH if ok else MISMATCH, max_abs, max_rel, tol, metric, records,
                       worst_component=name)


def compare_fields(closed: ClosedFormField | Evaluator, oracle: Evaluator, points, tol: float,
                   metric: str = "rel", case: str = "field", labels=None) -> FieldReport:
    """Componentwise comparison of a closed form with an oracle over ``points``.

    ``metric="rel"`` scores ``|c - o| / max(|o|, 1e-3)``, so oracle values
    below 1e-3 are held to ``tol * 1e-3`` absolute; ``metric="abs"`` scores
    ``|c - o|``.
    """
    variant = getattr(closed, "variant", "closed")
    rep = _compare_values(case, variant, points, _evaluate(closed, points), _evaluate(oracle, points), tol, metric,
                          labels)
    for note in getattr(closed, "correction_notes", ()):
        rep.ledger.append(LedgerEntry(note.equation, note.term, note.printed, note.corrected, None, rep.max_err))
    return rep


# -- cases ----------------------------------------------------------------------------------

@dataclass
class Case:
    """Oracle plus an ordered catalog of closed-form variants."""

    name: str
    points: list[np.ndarray]
    oracle: Evaluator
    variants: dict[str, Evaluator]
    notes: dict[str, tuple[Correction, ...]]
    adopted: str
    printed: str
    metric: str
    tol: float
    labels: list[str] | None = None


def run_case(case: Case, printed_forms: bool = False) -> FieldReport:
    oracle_vals = _evaluate(case.oracle, case.points)
    cache: dict[str, FieldReport] = {}

    def check(v: str) -> FieldReport:
        if v not in cache:
            cache[v] = _compare_values(case.name, v, case.points, _evaluate(case.variants[v], case.points),
                                       oracle_vals, case.tol, case.metric, case.labels)
        return cache[v]

    start = case.printed if printed_forms else case.adopted
    first = check(start)
    chosen = first
    verdict = first.verdict
    if first.verdict == MISMATCH and printed_forms:
        order = list(case.variants)
        for v in order[order.index(start) + 1:]:
            if check(v).verdict == MATCH:
                chosen, verdict = check(v), CORRECTED
                break
    report = FieldReport(case.name, chosen.variant, verdict, chosen.max_abs_err, chosen.max_rel_err, case.tol,
                         case.metric, chosen.points, worst_component=first.worst_component if verdict == MISMATCH
                         else chosen.worst_component)
    if chosen.variant != case.printed:
        before = check(case.printed)
        for note in case.notes.get(chosen.variant, ()):
            report.ledger.append(LedgerEntry(
                note.equation, note.term, note.printed, note.corrected,
                _num(before.max_err), _num(chosen.max_err),
                f"{case.printed}: {before.verdict}; {chosen.variant}: {chosen.verdict}",
            ))
        if before.verdict == MISMATCH and not report.ledger:
            report.notes.append(f"printed variant fails (max {before.metric} err {_num(before.max_err)})")
    errors = [rec.error for rec in chosen.points if rec.error]
    if errors:
        report.notes.append(f"{len(errors)} point(s) failed to evaluate; first: {errors[0]}")
    if verdict == MISMATCH and printed_forms:
        tried = ", ".join(f"{v}={_num(r.max_err)}" for v, r in cache.items())
        report.notes.append(f"no catalog variant reached tol {case.tol:g}: {tried}")
    return report


def _fields(space, seed: int):
    """Deterministic smooth vector fields on the product chart."""
    names = space.vars
    d = len(names)
    X = [f"{0.5 + 0.1 * k}+{names[k]}*{names[(k + 1) % d]}" for k in range(d)]
    Y = [f"cos({names[k]})-{0.2 * (k + 1)}*{names[(k + d - 1) % d]}" for k in range(d)]
    return X, Y


def _connection_case(cfg, pts, tol) -> Case:
    S = cfg.space
    X, Y = _fields(S, cfg.seed)
    variants = {f: (lambda p, f=f: dwp_connection_closed(S, X, Y, p, f)) for f in CONNECTION_FORMS}
    notes = {
        "slot-swap": (Correction("3.3", "warping terms", "-½g_B(X₁,Y₁)(grad f²,0) - ½g_F(X₂,Y₂)(0,grad b²)",
                                 "-½g_B(X₁,Y₁)(0,grad f²) - ½g_F(X₂,Y₂)(grad b²,0)"),),
        "corrected": (Correction("3.3", "warping terms", "-½g_B(X₁,Y₁)(grad f²,0) - ½g_F(X₂,Y₂)(0,grad b²)",
                                 "-(1/2b²)g_B(X₁,Y₁)(0,grad f²) - (1/2f²)g_F(X₂,Y₂)(grad b²,0)"),),
    }
    labels = [f"nabla_X Y[{v}]" for v in S.vars]
    return Case("connection", pts, lambda p: connection_oracle(S, X, Y, p), variants, notes, "corrected", "printed",
                "abs", tol, labels)


def _curvature_case(cfg, pts, tol) -> Case:
    S = cfg.space
    rng = np.random.default_rng(cfg.seed)
    XY = {tuple(p): (rng.normal(size=S.dim), rng.normal(size=S.dim)) for p in pts}

    def at(fn):
        return lambda p: fn(*XY[tuple(p)], p)

    variants = {f: at(lambda X, Y, p, f=f: curvature_relation_closed(S, X, Y, p, f)) for f in CURVATURE_FORMS}
    grad = Correction("3.4", "grad", "grad b², grad f² in g_B, g_F", "grad in the warped metric g")
    signs = Correction("3.4", "norm terms", "+(1/2b²)|grad b²|² X̂₂∧Ŷ₂, +(1/2f²)|grad f²|² X̂₁∧Ŷ₁",
                       "-(1/2b²)|grad b²|² X̂₂∧Ŷ₂, -(1/2f²)|grad f²|² X̂₁∧Ŷ₁")
    mixed = Correction("3.4", "mixed terms", "(absent)",
                       "(1/4b²f²){X₁(b²)(0,grad f²)∧Ŷ₁ - Y₁(b²)(0,grad f²)∧X̂₁ "
                       "+ X₂(f²)(grad b²,0)∧Ŷ₂ - Y₂(f²)(grad b²,0)∧X̂₂}")
    notes = {"warped-gradient": (grad,), "norm-sign": (grad, signs), "corrected": (grad, signs, mixed)}
    d = S.dim
    labels = [f"(Rbar-R)[{S.vars[l]},{S.vars[k]}]" for l in range(d) for k in range(d)]
    return Case("curvature", pts, at(lambda X, Y, p: curvature_difference_oracle(S, X, Y, p)), variants, notes,
                "corrected", "printed", "abs", tol, labels)


def _inclusion_case(cfg, pts, tol, side: str) -> Case:
    S = cfg.space
    m = S.m
    order = cfg.jet_order

    def split(p):
        x, y = p[:m], p[m:]
        return (y, x) if side == "B" else (x, y)  # (basepoint, evaluation point)

    fn = Fm.inclusion_B_fields if side == "B" else Fm.inclusion_F_fields
    key = "inclusion-b" if side == "B" else "inclusion-f"

    def variant(v):
        def ev(p):
            bp, q = split(p)
            t, t2 = fn(S, bp, v)
            return t(q), t2(q)
        return ev

    def oracle(p):
        bp, q = split(p)
        phi = Fm.inclusion_map(S, side, bp)
        tau, tau2 = tension_and_bitension(phi, q, order=order)
        return tau, tau2

    notes = Fm._INCL_B_NOTES if side == "B" else Fm._INCL_F_NOTES
    labels = [f"tau[{v}]" for v in S.vars] + [f"tau2[{v}]" for v in S.vars]
    return Case(key, pts, oracle, {v: variant(v) for v in Fm.VARIANTS[key]}, notes, "corrected", "printed", "rel",
                tol, labels)


def _projection_case(cfg, pts, tol, side: str) -> Case:
    S = cfg.space
    key = "proj-first" if side == "B" else "proj-second"
    P = Fm.projection_map(S, side)

    def variant(v):
        fld = Fm.projection_field(S, side, v)
        return lambda p: (Fm.projection_tension(S, p, side), _flat(fld(p)))

    def oracle(p):
        return tension_and_bitension(P, p, order=cfg.jet_order)

    notes = {v: Fm.projection_field(S, side, v).correction_notes for v in Fm.VARIANTS[key]}
    tv = S.base.vars if side == "B" else S.fiber.vars
    labels = [f"tau[{v}]" for v in tv] + [f"tau2[{v}]" for v in tv]
    return Case(key, pts, oracle, {v: variant(v) for v in Fm.VARIANTS[key]}, notes, "corrected", "printed", "rel",
                tol, labels)


def _factor_map(cfg, side: str) -> SmoothMap:
    S = cfg.space
    if cfg.phi is not None and cfg.phi_side == side:
        return cfg.phi
    patch = S.base if side == "B" else S.fiber
    return SmoothMap.identity(patch)


def _harmonic_points(cfg, side: str):
    patch = cfg.space.base if side == "B" else cfg.space.fiber
    return sample_points(patch.chart, 50, cfg.seed + 1)


def _product_case(cfg, pts, tol, side: str) -> Case:
    S = cfg.space
    key = "product-dom" if side == "F" else "product-dom-mirror"
    phi = _factor_map(cfg, side)
    Fm.check_harmonic(phi, _harmonic_points(cfg, side), cfg.tolerances["harmonic"])
    fn = Fm.product_domain_warped if side == "F" else Fm.product_domain_warped_mirror
    Psi = Fm.product_map(S, phi, side)

    def variant(v):
        def ev(p):
            r = fn(S, phi, p, v, harmonic_tol=math.inf)
            return r.tau, r.tau2
        return ev

    def oracle(p):
        return tension_and_bitension(Psi, p, order=cfg.jet_order)

    notes = {v: fn(S, phi, pts[0], v, harmonic_tol=math.inf).notes for v in Fm.VARIANTS[key]}
    labels = [f"tau[{v}]" for v in S.vars] + [f"tau2[{v}]" for v in S.vars]
    return Case(key, pts, oracle, {v: variant(v) for v in Fm.VARIANTS[key]}, notes, "corrected", "printed", "rel",
                tol, labels)


def _codomain_report(cfg, pts) -> FieldReport:
    """Equivalence of the typeset conditions with ``τ₂ = 0`` for ``I × φ: B × F → M``."""
    S = cfg.space
    zero = cfg.tolerances["zero"]
    phi = _factor_map(cfg, "F")
    Fm.check_harmonic(phi, _harmonic_points(cfg, "F"), cfg.tolerances["harmonic"])
    records = []
    agree = {r: True for r in Fm.READINGS}
    worst = 0.0
    failed = False
    for k, p in enumerate(pts):
        try:
            c = Fm.codomain_warped_conditions(S, phi, p, harmonic_tol=math.inf)
        except Exception as exc:
            records.append(PointRecord(k, [float(t) for t in p], None, None, None, None, None,
                                       f"{type(exc).__name__}: {exc}"))
            failed = True
            continue
        oz = c.oracle_zero(zero)
        cond = []
        for r in Fm.READINGS:
            cond.append(float(max(np.max(np.abs(c.lhs_b[r]), initial=0.0), np.max(np.abs(c.lhs_f[r]), initial=0.0))))
            if c.holds(r, zero) != oz:
                agree[r] = False
        onorm = float(np.max(np.abs(c.oracle_tau2), initial=0.0))
        worst = max(worst, onorm)
        records.append(PointRecord(k, [float(t) for t in p], cond, [onorm], None, None))
    ok = {r: agree[r] and not failed for r in Fm.READINGS}
    if ok["a"]:
        verdict, used = MATCH, "a"
    elif ok["b"]:
        verdict, used = CORRECTED, "b"
    else:
        verdict, used = MISMATCH, "a"
    rep = FieldReport("product-cod", f"reading-{used}", verdict, math.nan, math.nan, zero, "equivalence", records)
    rep.notes.append("closed = max |lhs| of both conditions per reading (a, b); oracle = max |tau2(Psi_hat)|")
    rep.notes.append(f"equivalence with oracle tau2 = 0 (tol {zero:g}): a={agree['a']}, b={agree['b']}")
    if verdict == CORRECTED:
        rep.ledger.append(LedgerEntry("5.15-5.16", "dφ(Δ(f²)), dφ(Δ(ln f)), dφ(grad e(φ))", "reading (a)",
                                      "reading (b)", None, None, "only reading (b) matches the oracle"))
    return rep


def _corollary_report(cfg, pts) -> FieldReport:
    S = cfg.space
    tol = cfg.tolerances["classification"]
    m = S.m
    records = []
    disagree = 0
    counts: dict[str, int] = {}
    for k, p in enumerate(pts):
        x, y = p[:m], p[m:]
        row = []
        for side, bp, at in (("B", y, x), ("F", x, y)):
            c = Fm.classify_inclusion(S, side, bp, tol, at=at)
            counts[f"{side}:{c.kind.value}"] = counts.get(f"{side}:{c.kind.value}", 0) + 1
            if c.agrees is False:
                disagree += 1
            row.append(f"{side}:{c.kind.value}:{'-' if c.agrees is None else c.agrees}")
        records.append(PointRecord(k, [float(t) for t in p], None, None, None, None, None, ";".join(row)))
    verdict = MATCH if disagree == 0 else MISMATCH
    rep = FieldReport("corollaries", "oracle-classification", verdict, math.nan, math.nan, tol, "agreement", records)
    rep.notes.append("counts " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    rep.notes.append(f"disagreements with corollary conditions: {disagree}")
    return rep


def build_case(cfg: VerifyConfig, name: str, pts) -> Case:
    tol = cfg.tolerances
    if name == "connection":
        return _connection_case(cfg, pts, tol["connection"])
    if name == "curvature":
        return _curvature_case(cfg, pts, tol["curvature"])
    if name == "inclusion-b":
        return _inclusion_case(cfg, pts, tol["rel"], "B")
    if name == "inclusion-f":
        return _inclusion_case(cfg, pts, tol["rel"], "F")
    if name == "proj-first":
        return _projection_case(cfg, pts, tol["rel"], "B")
    if name == "proj-second":
        return _projection_case(cfg, pts, tol["rel"], "F")
    if name == "product-dom":
        return _product_case(cfg, pts, tol["rel"], "F")
    if name == "product-dom-mirror":
        return _product_case(cfg, pts, tol["rel"], "B")
    raise ValueError(f"no field case {name!r}")


@dataclass
class SuiteResult:
    config: str
    seed: int
    samples: int
    printed_forms: bool
    reports: list[FieldReport]
    timestamp: str

    @property
    def exit_code(self) -> int:
        return 0 if all(r.verdict != MISMATCH for r in self.reports) else 1

    def to_json(self) -> dict:
        return {
            "tool": "warpcheck",
            "version": __version__,
            "timestamp": self.timestamp,
            "config": self.config,
            "seed": self.seed,
            "samples": self.samples,
            "printed_forms": self.printed_forms,
            "exit_code": self.exit_code,
            "cases": [r.to_json() for r in self.reports],
        }


def run_suite(cfg: VerifyConfig, printed_forms: bool = False) -> SuiteResult:
    """Run every case selected in ``cfg``; exit code 0 iff no case is a mismatch."""
    pts = sample_points(cfg.space.chart, cfg.samples, cfg.seed)
    reports = []
    for name in cfg.cases:
        try:
            if name == "product-cod":
                rep = _codomain_report(cfg, pts)
            elif name == "corollaries":
                rep = _corollary_report(cfg, pts)
            else:
                rep = run_case(build_case(cfg, name, pts), printed_forms)
        except Exception as exc:
            rep = FieldReport(name, "-", MISMATCH, math.inf, math.inf, cfg.tolerances["rel"], "rel")
            rep.notes.append(f"case failed: {type(exc).__name__}: {exc}")
        reports.append(rep)
    ts = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return SuiteResult(cfg.name, cfg.seed, cfg.samples, printed_forms, reports, ts)


# -- rendering ------------------------------------------------------------------------------

def render(result: SuiteResult, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(result.to_json(), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "variant", "verdict", "index", "point", "component", "closed", "oracle", "abs_err",
                    "rel_err", "error"])
        for r in result.reports:
            for rec in r.points:
                comps = range(len(rec.closed)) if rec.closed else [None]
                for j in comps:
                    w.writerow([
                        r.case, r.variant, r.verdict, rec.index, " ".join(repr(t) for t in rec.point),
                        "" if j is None else j,
                        "" if j is None else repr(rec.closed[j]),
                        "" if j is None or rec.oracle is None or j >= len(rec.oracle) else repr(rec.oracle[j]),
                        "" if rec.abs_err is None else repr(rec.abs_err),
                        "" if rec.rel_err is None else repr(rec.rel_err),
                        rec.error or "",
                    ])
        return buf.getvalue()
    if fmt == "text":
        lines = [f"warpcheck {__version__}  config={result.config}  seed={result.seed}  samples={result.samples}"
                 f"  printed_forms={result.printed_forms}", f"timestamp: {result.timestamp}"]
        for r in result.reports:
            err = "" if r.metric in ("equivalence", "agreement") else (
                f"  max_abs={_fmt(r.max_abs_err)}  max_rel={_fmt(r.max_rel_err)}  ({r.metric} tol {r.tol:g})")
            lines.append(f"{r.case:<20} {r.verdict:<16} [{r.variant}]{err}")
            if r.verdict == MISMATCH and r.worst_component:
                lines.append(f"    worst component: {r.worst_component}")
            for n in r.notes:
                lines.append(f"    {n}")
            for e in r.ledger:
                lines.append(f"    ledger {e.equation} {e.term}: {e.printed}  ->  {e.corrected}"
                             f"  (err {_fmt(e.err_before)} -> {_fmt(e.err_after)})")
        lines.append(f"exit code {result.exit_code}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def _fmt(x) -> str:
    return "n/a" if x is None or (isinstance(x, float) and not math.isfinite(x)) else f"{x:.3e}"
