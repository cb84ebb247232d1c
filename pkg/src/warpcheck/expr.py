"""Smooth-expression language over chart coordinates.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | ident | func '(' expr ')' | '(' expr ')' | '-' factor

Identifiers match ``[A-Za-z][A-Za-z0-9]*`` and must be declared coordinates.
Builtin functions: ``sin cos exp log sqrt``.  Unary minus binds looser than
``^`` so ``-x^2`` is ``-(x^2)``; ``^`` is right-associative.

Expressions evaluate to floats or, through :func:`eval_jet`, to jets carrying
exact partial derivatives up to order 4.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from . import jets as J


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(ExprError):
    pass


class ArityError(ExprError):
    pass


# -- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]

BUILTINS = ("sin", "cos", "exp", "log", "sqrt")

_FLOAT_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}
_JET_FUNCS = {
    "sin": J.sin,
    "cos": J.cos,
    "exp": J.exp,
    "log": J.log,
    "sqrt": J.sqrt,
}

# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    raw = src.encode("utf-8")
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            offset = len(src[:pos].encode("utf-8"))
            raise ParseError(f"unexpected character {src[pos]!r}", offset)
        kind = m.lastgroup
        if kind != "ws":
            offset = len(src[:pos].encode("utf-8"))
            tokens.append((kind, m.group(), offset))
        pos = m.end()
    tokens.append(("end", "", len(raw)))
    return tokens


class _Parser:
    def __init__(self, src: str, names: set[str]):
        self.tokens = _tokenize(src)
        self.pos = 0
        self.names = names

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str):
        kind, val, off = self.take()
        if val != text or kind == "end":
            raise ParseError(f"expected {text!r}, found {val or 'end of input'!r}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        kind, val, off = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.factor())
        node = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def base(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if val in BUILTINS:
                self.expect("(")
                arg = self.expr()
                nxt = self.peek()
                if nxt[1] == ",":
                    raise ArityError(f"{val}() takes exactly one argument (offset {nxt[2]})")
                self.expect(")")
                return Call(val, arg)
            if val not in self.names:
                raise UnknownIdentifier(f"unknown identifier {val!r} at offset {off}")
            if self.peek()[1] == "(":
                raise UnknownIdentifier(f"{val!r} is not a function (offset {off})")
            return Var(val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", off)
        raise ParseError(f"unexpected token {val!r}", off)


# -- printing ----------------------------------------------------------------

def to_source(node: Node) -> str:
    """Fully parenthesized source text; parsing it reproduces ``node``."""
    if isinstance(node, Num):
        if node.value < 0 or math.isnan(node.value) or math.isinf(node.value):
            raise ExprError(f"constant {node.value!r} has no source form")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    return f"({to_source(node.left)}{node.op}{to_source(node.right)})"


# -- evaluation ----------------------------------------------------------------

def _free_vars(node: Node, acc: set[str]) -> set[str]:
    if isinstance(node, Var):
        acc.add(node.name)
    elif isinstance(node, Neg):
        _free_vars(node.arg, acc)
    elif isinstance(node, Call):
        _free_vars(node.arg, acc)
    elif isinstance(node, BinOp):
        _free_vars(node.left, acc)
        _free_vars(node.right, acc)
    return acc


def _eval_float(node: Node, env: Mapping[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval_float(node.arg, env)
    if isinstance(node, Call):
        x = _eval_float(node.arg, env)
        if node.func == "log" and x <= 0:
            raise J.DomainError(f"log of non-positive value {x!r}")
        if node.func == "sqrt" and x < 0:
            raise J.DomainError(f"sqrt of negative value {x!r}")
        return _FLOAT_FUNCS[node.func](x)
    a = _eval_float(node.left, env)
    b = _eval_float(node.right, env)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    if a <= 0 and not float(b).is_integer():
        raise J.DomainError(f"non-integer power of non-positive value {a!r}")
    return a**b


def _const_value(node: Node) -> float | None:
    """Value of a variable-free subtree (used for exponents)."""
    if _free_vars(node, set()):
        return None
    return _eval_float(node, {})


def _eval_jet(node: Node, env: Mapping[str, J.Jet], space: J.JetSpace, order: int):
    if isinstance(node, Num):
        return space.constant(node.value, order)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval_jet(node.arg, env, space, order)
    if isinstance(node, Call):
        return _JET_FUNCS[node.func](_eval_jet(node.arg, env, space, order))
    a = _eval_jet(node.left, env, space, order)
    op = node.op
    if op == "^":
        c = _const_value(node.right)
        if c is not None:
            return J.power(a, c)
        return J.power(a, _eval_jet(node.right, env, space, order))
    b = _eval_jet(node.right, env, space, order)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return a / b


# -- public type -----------------------------------------------------------------

@dataclass(frozen=True)
class ScalarFieldExpr:
    """A parsed expression over an ordered tuple of coordinate names."""

    ast: Node
    vars: tuple[str, ...]

    def __post_init__(self):
        unknown = _free_vars(self.ast, set()) - set(self.vars)
        if unknown:
            raise UnknownIdentifier(f"identifiers {sorted(unknown)} not among {list(self.vars)}")

    @property
    def arity(self) -> int:
        return len(self.vars)

    @property
    def free_vars(self) -> set[str]:
        return _free_vars(self.ast, set())

    def is_constant(self) -> bool:
        return not self.free_vars

    def source(self) -> str:
        return to_source(self.ast)

    def __str__(self) -> str:
        return self.source()

    def __call__(self, *point: float) -> float:
        return self.evaluate(point)

    def evaluate(self, point: Sequence[float]) -> float:
        if len(point) != self.arity:
            raise ExprError(f"expected {self.arity} coordinates, got {len(point)}")
        return float(_eval_float(self.ast, dict(zip(self.vars, map(float, point)))))

    def jet(self, env: Sequence[J.Jet]) -> J.Jet:
        """Evaluate with coordinate jets ``env`` (one per declared variable)."""
        if len(env) != self.arity:
            raise ExprError(f"expected {self.arity} coordinate jets, got {len(env)}")
        if self.arity == 0:
            raise ExprError("use a constant space for zero-arity expressions")
        space = env[0].space
        order = min(j.order for j in env)
        out = _eval_jet(self.ast, dict(zip(self.vars, env)), space, order)
        return out

    def jet_in(self, space: J.JetSpace, env: Mapping[str, J.Jet], order: int) -> J.Jet:
        """Evaluate in ``space`` with a name-to-jet environment (extra names allowed)."""
        missing = self.free_vars - set(env)
        if missing:
            raise ExprError(f"no jets supplied for {sorted(missing)}")
        return _eval_jet(self.ast, env, space, order)

    # -- composition helpers used to assemble derived fields -------------------
    def with_vars(self, names: Sequence[str]) -> "ScalarFieldExpr":
        return ScalarFieldExpr(self.ast, tuple(names))

    def rename(self, mapping: Mapping[str, str], names: Sequence[str]) -> "ScalarFieldExpr":
        return ScalarFieldExpr(_rename(self.ast, mapping), tuple(names))

    def _wrap(self, other) -> Node:
        if isinstance(other, ScalarFieldExpr):
            return other.ast
        if isinstance(other, (int, float)):
            v = float(other)
            return Num(v) if v >= 0 else Neg(Num(-v))
        raise TypeError(f"cannot combine expression with {type(other).__name__}")

    def _vars_with(self, other) -> tuple[str, ...]:
        if isinstance(other, ScalarFieldExpr) and other.vars != self.vars:
            return tuple(dict.fromkeys(self.vars + other.vars))
        return self.vars

    def _bin(self, op, other, reverse=False):
        a, b = self.ast, self._wrap(other)
        if reverse:
            a, b = b, a
        return ScalarFieldExpr(BinOp(op, a, b), self._vars_with(other))

    def __add__(self, other):
        return self._bin("+", other)

    def __radd__(self, other):
        return self._bin("+", other, True)

    def __sub__(self, other):
        return self._bin("-", other)

    def __rsub__(self, other):
        return self._bin("-", other, True)

    def __mul__(self, other):
        return self._bin("*", other)

    def __rmul__(self, other):
        return self._bin("*", other, True)

    def __truediv__(self, other):
        return self._bin("/", other)

    def __rtruediv__(self, other):
        return self._bin("/", other, True)

    def __pow__(self, other):
        return self._bin("^", other)

    def __neg__(self):
        return ScalarFieldExpr(Neg(self.ast), self.vars)

    def apply(self, func: str) -> "ScalarFieldExpr":
        if func not in BUILTINS:
            raise ArityError(f"unknown builtin {func!r}")
        return ScalarFieldExpr(Call(func, self.ast), self.vars)


def _rename(node: Node, mapping: Mapping[str, str]) -> Node:
    if isinstance(node, Var):
        return Var(mapping.get(node.name, node.name))
    if isinstance(node, Neg):
        return Neg(_rename(node.arg, mapping))
    if isinstance(node, Call):
        return Call(node.func, _rename(node.arg, mapping))
    if isinstance(node, BinOp):
        return BinOp(node.op, _rename(node.left, mapping), _rename(node.right, mapping))
    return node


def parse(src: str, vars: Sequence[str]) -> ScalarFieldExpr:
    """Parse ``src`` into an expression over the coordinates ``vars``."""
    names = tuple(vars)
    for v in names:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", v) or v in BUILTINS:
            raise ExprError(f"invalid coordinate name {v!r}")
    if len(set(names)) != len(names):
        raise ExprError(f"duplicate coordinate names in {list(names)}")
    ast = _Parser(src, set(names)).parse()
    return ScalarFieldExpr(ast, names)


def constant(value: float, vars: Sequence[str]) -> ScalarFieldExpr:
    v = float(value)
    return ScalarFieldExpr(Num(v) if v >= 0 else Neg(Num(-v)), tuple(vars))


def eval_jet(field: ScalarFieldExpr, point: Sequence[float], order: int) -> J.Jet:
    """All partials of ``field`` at ``point`` up to total degree ``order``."""
    if not 0 <= order <= J.MAX_ORDER:
        raise J.JetError(f"order must lie in [0, {J.MAX_ORDER}], got {order}")
    if len(point) != field.arity:
        raise ExprError(f"expected {field.arity} coordinates, got {len(point)}")
    space = J.jet_space(field.arity, order)
    env = space.variables(point)
    return field.jet(env)


def jet_array(fields, env: Sequence[J.Jet]) -> J.Jet:
    """Evaluate a nested list of expressions into one batched jet."""
    arr = np.asarray(fields, dtype=object)
    flat = [f.jet(env) for f in arr.ravel()]
    return J.stack(flat).reshape(*arr.shape)
