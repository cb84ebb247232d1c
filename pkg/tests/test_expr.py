import math

import pytest
from hypothesis import given, settings, strategies as st

from warpcheck.expr import (
    ArityError,
    BinOp,
    Neg,
    ParseError,
    UnknownIdentifier,
    constant,
    eval_jet,
    parse,
)


def test_evaluates_builtin():
    assert parse("2+sin(y1)", ["y1"]).evaluate([0.0]) == 2.0


def test_error_offset():
    with pytest.raises(ParseError) as exc:
        parse("2+*x1", ["x1"])
    assert exc.value.offset == 2


def test_offsets_are_bytes():
    # "θ" takes two bytes in UTF-8
    with pytest.raises(ParseError) as exc:
        parse("1+θ", ["x"])
    assert exc.value.offset == 2


def test_unknown_identifier_and_arity():
    with pytest.raises(UnknownIdentifier):
        parse("z+1", ["x"])
    with pytest.raises(UnknownIdentifier):
        parse("x(1)", ["x"])
    with pytest.raises(ArityError):
        parse("sin(x, x)", ["x"])
    with pytest.raises(ParseError):
        parse("sin(x", ["x"])
    with pytest.raises(ParseError):
        parse("", ["x"])


def test_precedence():
    x = ["x"]
    assert parse("-x^2", x).evaluate([3.0]) == -9.0
    assert parse("2^3^2", x).evaluate([0.0]) == 512.0
    assert parse("1-2-3", x).evaluate([0.0]) == -4.0
    assert parse("8/2/2", x).evaluate([0.0]) == 2.0
    assert parse("2*x^-1", x).evaluate([4.0]) == 0.5
    assert isinstance(parse("-x^2", x).ast, Neg)
    assert isinstance(parse("x-1", x).ast, BinOp)


def test_scientific_literals():
    assert parse("1e-3*x", ["x"]).evaluate([2.0]) == pytest.approx(2e-3)
    assert parse(".5+x", ["x"]).evaluate([1.0]) == 1.5


def test_variable_order_matters_for_evaluation():
    f = parse("x-y", ["y", "x"])
    assert f.evaluate([1.0, 3.0]) == 2.0
    assert f.free_vars == {"x", "y"}
    assert constant(2.5, ["x"]).is_constant()


def test_domain_errors_in_float_evaluation():
    from warpcheck.jets import DomainError

    with pytest.raises(DomainError):
        parse("log(x)", ["x"]).evaluate([-1.0])
    with pytest.raises(DomainError):
        parse("x^0.5", ["x"]).evaluate([-1.0])


def test_operators_build_expressions():
    f = parse("x", ["x"])
    g = (2 * f + 1) ** 2 / (f - 3)
    assert g.evaluate([1.0]) == pytest.approx(9 / -2)
    assert (-f).evaluate([2.0]) == -2.0
    assert f.apply("exp").evaluate([0.0]) == 1.0


_atoms = st.sampled_from(["x", "y", "0.5", "2", "3.25"])


def _expr(depth):
    if depth == 0:
        return _atoms
    sub = _expr(depth - 1)
    return st.one_of(
        _atoms,
        st.tuples(sub, st.sampled_from(["+", "-", "*"]), sub).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
        sub.map(lambda s: f"-{s}"),
        st.tuples(st.sampled_from(["sin", "cos", "exp"]), sub).map(lambda t: f"{t[0]}({t[1]})"),
        sub.map(lambda s: f"({s})^2"),
    )


@settings(max_examples=150, deadline=None)
@given(src=_expr(3), x=st.floats(-1, 1), y=st.floats(-1, 1))
def test_print_parse_roundtrip(src, x, y):
    names = ["x", "y"]
    f = parse(src, names)
    printed = f.source()
    again = parse(printed, names)
    assert again.ast == f.ast
    assert again.source() == printed
    a, b = f.evaluate([x, y]), again.evaluate([x, y])
    assert a == b or (math.isnan(a) and math.isnan(b))


@settings(max_examples=60, deadline=None)
@given(src=_expr(2), x=st.floats(-1, 1), y=st.floats(-1, 1))
def test_jet_value_equals_float_value(src, x, y):
    f = parse(src, ["x", "y"])
    assert float(eval_jet(f, [x, y], 2).value) == pytest.approx(f.evaluate([x, y]), rel=1e-12, abs=1e-12)
