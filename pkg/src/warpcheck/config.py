"""Verifier configuration: a JSON document describing the space, the map and the run.

Schema::

    {
      "name": str,                                   optional
      "B": {"dim": int, "chart": [[lo, hi], ...],
            "vars": [str, ...],                      optional, default x1..xm
            "metric": "euclidean" | {"components": [[expr, ...], ...]}},
      "F": {...},                                    default vars y1..yn
      "b": expr over B  |  "b2": expr for b²,
      "f": expr over F  |  "f2": expr for f²,
      "phi": {"side": "B" | "F", "components": [expr, ...]},   optional
      "cases": [id, ...],                            optional, default ["all"]
      "samples": int, "seed": int, "jet_order": int,  optional
      "tolerances": {"rel": num, "connection": num, "curvature": num,
                     "classification": num, "harmonic": num, "zero": num}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .expr import ExprError, parse
from .geometry import GeometryError, MetricPatch
from .maps import SmoothMap
from .warped import DwpSpace

CASES = (
    "connection",
    "curvature",
    "inclusion-b",
    "inclusion-f",
    "proj-first",
    "proj-second",
    "product-dom",
    "product-dom-mirror",
    "product-cod",
    "corollaries",
)

DEFAULT_TOLERANCES = {
    "rel": 1e-6,
    "connection": 1e-9,
    "curvature": 1e-8,
    "classification": 1e-7,
    "harmonic": 1e-9,
    "zero": 1e-8,
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class VerifyConfig:
    name: str
    space: DwpSpace
    phi: SmoothMap | None = None
    phi_side: str | None = None
    cases: tuple[str, ...] = CASES
    samples: int = 100
    seed: int = 42
    jet_order: int = 4
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    source: dict = field(default_factory=dict, compare=False)

    def with_overrides(self, **kw) -> "VerifyConfig":
        tol = dict(self.tolerances)
        if kw.get("rel_tol") is not None:
            tol["rel"] = float(kw.pop("rel_tol"))
        kw.pop("rel_tol", None)
        if "cases" in kw and kw["cases"] is not None:
            kw["cases"] = expand_cases(kw["cases"], "cases")
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, tolerances=tol, **kw)


def expand_cases(cases, path: str) -> tuple[str, ...]:
    if isinstance(cases, str):
        cases = [cases]
    if not isinstance(cases, (list, tuple)) or not cases:
        raise ConfigError(path, "expected a non-empty list of case ids")
    out: list[str] = []
    for i, c in enumerate(cases):
        if c == "all":
            out.extend(CASES)
        elif c in CASES:
            out.append(c)
        else:
            raise ConfigError(f"{path}[{i}]", f"unknown case {c!r}; expected one of {', '.join(CASES + ('all',))}")
    return tuple(dict.fromkeys(out))


def _need(d: dict, key: str, path: str):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    if key not in d:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return d[key]


def _patch(d: Any, path: str, default_prefix: str) -> MetricPatch:
    dim = _need(d, "dim", path)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ConfigError(f"{path}.dim", "expected a positive integer")
    chart = _need(d, "chart", path)
    if not isinstance(chart, list) or len(chart) != dim:
        raise ConfigError(f"{path}.chart", f"expected {dim} [lo, hi] pairs")
    box = []
    for i, iv in enumerate(chart):
        if (
            not isinstance(iv, list)
            or len(iv) != 2
            or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in iv)
            or not iv[0] < iv[1]
        ):
            raise ConfigError(f"{path}.chart[{i}]", "expected [lo, hi] with lo < hi")
        box.append((float(iv[0]), float(iv[1])))
    names = d.get("vars", [f"{default_prefix}{i + 1}" for i in range(dim)])
    if not isinstance(names, list) or len(names) != dim or not all(isinstance(n, str) for n in names):
        raise ConfigError(f"{path}.vars", f"expected {dim} coordinate names")
    metric = d.get("metric", "euclidean")
    try:
        if metric == "euclidean":
            return MetricPatch.euclidean(names, box, name=path)
        comps = _need(metric, "components", f"{path}.metric")
        if (
            not isinstance(comps, list)
            or len(comps) != dim
            or not all(isinstance(r, list) and len(r) == dim for r in comps)
        ):
            raise ConfigError(f"{path}.metric.components", f"expected a {dim}x{dim} array of expressions")
        for i, row in enumerate(comps):
            for j, e in enumerate(row):
                if not isinstance(e, (str, int, float)) or isinstance(e, bool):
                    raise ConfigError(f"{path}.metric.components[{i}][{j}]", "expected an expression string")
        comps = [[str(e) for e in row] for row in comps]
        for i, row in enumerate(comps):
            for j, e in enumerate(row):
                try:
                    parse(e, names)
                except ExprError as exc:
                    raise ConfigError(f"{path}.metric.components[{i}][{j}]", str(exc)) from exc
        return MetricPatch.from_strings(names, box, comps, name=path)
    except (GeometryError, ExprError) as exc:
        raise ConfigError(f"{path}.metric", str(exc)) from exc


def _warping(d: dict, key: str, patch: MetricPatch) -> tuple[str, bool]:
    sq = f"{key}2"
    if (key in d) == (sq in d):
        raise ConfigError(f"$.{key}", f"give exactly one of {key!r} or {sq!r}")
    k = key if key in d else sq
    src = d[k]
    if isinstance(src, (int, float)) and not isinstance(src, bool):
        src = repr(float(src))
    if not isinstance(src, str):
        raise ConfigError(f"$.{k}", "expected an expression string")
    try:
        parse(src, patch.vars)
    except ExprError as exc:
        raise ConfigError(f"$.{k}", str(exc)) from exc
    return src, k == sq


def _int(d: dict, key: str, default: int, lo: int, hi: int | None = None) -> int:
    v = d.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo or (hi is not None and v > hi):
        rng = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        raise ConfigError(f"$.{key}", f"expected an integer {rng}")
    return v


def load_config(data: dict | str | Path) -> VerifyConfig:
    """Validate a config document (dict, JSON text, path or built-in name)."""
    if isinstance(data, Path) or (isinstance(data, str) and not data.lstrip().startswith("{")):
        key = str(data)
        if key.upper() in BUILTINS and not Path(key).exists():
            data = BUILTINS[key.upper()]
        else:
            try:
                data = json.loads(Path(key).read_text())
            except FileNotFoundError as exc:
                raise ConfigError("$", f"no such config file or built-in: {key}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError("$", f"invalid JSON: {exc}") from exc
    elif isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("$", "expected an object")
    B = _patch(_need(data, "B", "$"), "$.B", "x")
    F = _patch(_need(data, "F", "$"), "$.F", "y")
    if set(B.vars) & set(F.vars):
        raise ConfigError("$.F.vars", "coordinate names must differ from those of B")
    b, b_sq = _warping(data, "b", B)
    f, f_sq = _warping(data, "f", F)
    name = data.get("name", "config")
    if not isinstance(name, str):
        raise ConfigError("$.name", "expected a string")
    space = DwpSpace(B, F, b, f, b_squared=b_sq, f_squared=f_sq, name=name)

    phi = side = None
    if "phi" in data:
        pd = data["phi"]
        side = _need(pd, "side", "$.phi")
        if side not in ("B", "F"):
            raise ConfigError("$.phi.side", "expected 'B' or 'F'")
        patch = B if side == "B" else F
        comps = _need(pd, "components", "$.phi")
        if not isinstance(comps, list) or len(comps) != patch.dim:
            raise ConfigError("$.phi.components", f"expected {patch.dim} expressions")
        for i, c in enumerate(comps):
            try:
                parse(str(c), patch.vars)
            except ExprError as exc:
                raise ConfigError(f"$.phi.components[{i}]", str(exc)) from exc
        phi = SmoothMap.from_strings(patch, patch, [str(c) for c in comps], name="phi")

    tol = dict(DEFAULT_TOLERANCES)
    given = data.get("tolerances", {})
    if not isinstance(given, dict):
        raise ConfigError("$.tolerances", "expected an object")
    for k, v in given.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"$.tolerances.{k}", f"unknown tolerance; expected one of {', '.join(DEFAULT_TOLERANCES)}")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise ConfigError(f"$.tolerances.{k}", "expected a positive number")
        tol[k] = float(v)

    return VerifyConfig(
        name=name,
        space=space,
        phi=phi,
        phi_side=side,
        cases=expand_cases(data.get("cases", ["all"]), "$.cases"),
        samples=_int(data, "samples", 100, 1),
        seed=_int(data, "seed", 42, 0),
        jet_order=_int(data, "jet_order", 4, 0, 4),
        tolerances=tol,
        source=data,
    )


_I = [[-1.0, 1.0]]

BUILTINS: dict[str, dict] = {
    "CFG-A": {
        "name": "CFG-A",
        "B": {"dim": 1, "chart": _I, "metric": "euclidean"},
        "F": {"dim": 1, "chart": _I, "metric": "euclidean"},
        "b": "exp(x1)",
        "f": "exp(y1)",
    },
    "CFG-B": {
        "name": "CFG-B",
        "B": {"dim": 1, "chart": _I, "metric": "euclidean"},
        "F": {"dim": 1, "chart": _I, "metric": "euclidean"},
        "b": "1",
        "f2": "2+sin(y1)",
    },
    "CFG-C": {
        "name": "CFG-C",
        "B": {
            "dim": 2,
            "vars": ["th", "ph"],
            "chart": [[0.3, 2.8], [-3.0, 3.0]],
            "metric": {"components": [["1", "0"], ["0", "sin(th)^2"]]},
        },
        "F": {"dim": 1, "chart": _I, "metric": "euclidean"},
        "b": "2+cos(th)",
        "f": "exp(0.5*y1)",
    },
    "CFG-SWAP": {
        "name": "CFG-SWAP",
        "B": {"dim": 1, "vars": ["y1"], "chart": _I, "metric": "euclidean"},
        "F": {"dim": 1, "vars": ["x1"], "chart": _I, "metric": "euclidean"},
        "b": "exp(y1)",
        "f": "exp(x1)",
    },
    "CFG-POLY": {
        "name": "CFG-POLY",
        "B": {
            "dim": 2,
            "chart": [[-1.0, 1.0], [-1.0, 1.0]],
            "metric": {"components": [
                ["1.5+0.3*x1^2+0.2*x2", "0.1*x1*x2"],
                ["0.1*x1*x2", "1.2+0.25*x2^2-0.15*x1"],
            ]},
        },
        "F": {
            "dim": 2,
            "chart": [[-1.0, 1.0], [-1.0, 1.0]],
            "metric": {"components": [
                ["1.3+0.2*y2^2", "0.05*y1"],
                ["0.05*y1", "1.1+0.3*y1^2+0.1*y1*y2"],
            ]},
        },
        "b": "1.2+0.3*x1+0.2*x2^2",
        "f": "1.1+0.25*y1*y2+0.2*y2",
    },
}
