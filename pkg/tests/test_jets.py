import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from warpcheck import jets as J
from warpcheck.expr import eval_jet, parse


def _all_partials(expr, syms, point, order):
    subs = dict(zip(syms, point))
    out = {}
    for alpha in J.jet_space(len(syms), order).monomials:
        d = expr
        for s, k in zip(syms, alpha):
            if k:
                d = sp.diff(d, s, k)
        out[alpha] = float(d.subs(subs))
    return out


@pytest.mark.parametrize(
    "src,point",
    [
        ("sin(x*y)+x^3", (0.3, 0.5)),
        ("exp(x-2*y)/(1+x^2)", (0.2, -0.4)),
        ("log(2+x*y)*sqrt(3+y)", (0.7, 0.1)),
        ("(1+x^2)^0.5*cos(y)", (-0.6, 1.1)),
        ("x^y", (1.3, 0.4)),
    ],
)
def test_partials_match_sympy(src, point):
    x, y = sp.symbols("x y")
    expr = sp.sympify(src.replace("^", "**"))
    ref = _all_partials(expr, (x, y), point, 4)
    jet = eval_jet(parse(src, ["x", "y"]), point, 4)
    for alpha, want in ref.items():
        assert jet.partial(alpha) == pytest.approx(want, rel=1e-11, abs=1e-11), alpha


def test_coefficients_are_normalized():
    s = J.jet_space(1, 4)
    (x,) = s.variables([0.0])
    e = J.exp(x)
    for k in range(5):
        assert e.coefficient((k,)) == pytest.approx(1 / math.factorial(k))
        assert e.partial((k,)) == pytest.approx(1.0)


def test_order_drops_with_differentiation():
    s = J.jet_space(2, 4)
    x, y = s.variables([0.1, 0.2])
    f = x * y
    assert f.order == 4
    assert f.d(0).order == 3
    assert f.d(0).d(1).order == 2
    assert (f.d(0) * f).order == 3


def test_batched_product_and_contract():
    s = J.jet_space(2, 3)
    x, y = s.variables([0.4, -0.3])
    a = J.stack([x, y, x * y])
    b = J.stack([y, 1 + x, x])
    dot = J.contract("i,i->", a, b)
    direct = x * y + y * (1 + x) + x * y * x
    np.testing.assert_allclose(dot.coeffs, direct.coeffs, atol=1e-15)


def test_matrix_inverse():
    s = J.jet_space(2, 4)
    x, y = s.variables([0.3, 0.5])
    m = J.stack([J.stack([1 + x * x, x * y]), J.stack([x * y, 2 + y])])
    inv = J.inverse(m)
    eye = J.contract("ij,jk->ik", m, inv)
    np.testing.assert_allclose(eye.coeffs[..., 0], np.eye(2), atol=1e-14)
    np.testing.assert_allclose(eye.coeffs[..., 1:], 0.0, atol=1e-13)


def test_composition_matches_direct_evaluation():
    s = J.jet_space(1, 4)
    (t,) = s.variables([0.2])
    inner = [J.sin(t), t * t + 1]
    outer_space = J.jet_space(2, 4)
    u, v = outer_space.variables([float(inner[0].value), float(inner[1].value)])
    outer = u * J.exp(v) - v**3
    composed = J.compose(outer, inner)
    direct = inner[0] * J.exp(inner[1]) - inner[1] ** 3
    np.testing.assert_allclose(composed.coeffs, direct.coeffs, rtol=1e-12, atol=1e-12)


def test_domain_errors():
    s = J.jet_space(1, 2)
    (x,) = s.variables([0.5])
    with pytest.raises(J.DomainError):
        J.log(x - 1)
    with pytest.raises(J.DomainError):
        J.power(x - 1, 0.5)


def test_eval_jet_order_bounds():
    f = parse("x", ["x"])
    with pytest.raises(J.JetError):
        eval_jet(f, [0.0], 5)
    with pytest.raises(J.JetError):
        eval_jet(f, [0.0], -1)


@settings(max_examples=200, deadline=None)
@given(
    a=st.floats(-1.0, 1.0),
    b=st.floats(-1.0, 1.0),
    x0=st.floats(-0.8, 0.8),
    y0=st.floats(-0.8, 0.8),
)
def test_first_and_second_partials_against_finite_differences(a, b, x0, y0):
    src = f"sin({a!r}*x+y)*exp({b!r}*x*y)+x^2*cos(y)"
    f = parse(src, ["x", "y"])
    jet = eval_jet(f, [x0, y0], 2)
    h = 1e-4

    def F(x, y):
        return f.evaluate([x, y])

    fx = (F(x0 + h, y0) - F(x0 - h, y0)) / (2 * h)
    fy = (F(x0, y0 + h) - F(x0, y0 - h)) / (2 * h)
    fxy = (F(x0 + h, y0 + h) - F(x0 + h, y0 - h) - F(x0 - h, y0 + h) + F(x0 - h, y0 - h)) / (4 * h * h)
    fxx = (F(x0 + h, y0) - 2 * F(x0, y0) + F(x0 - h, y0)) / (h * h)
    assert jet.partial((1, 0)) == pytest.approx(fx, abs=1e-6)
    assert jet.partial((0, 1)) == pytest.approx(fy, abs=1e-6)
    assert jet.partial((1, 1)) == pytest.approx(fxy, abs=1e-5)
    assert jet.partial((2, 0)) == pytest.approx(fxx, abs=1e-5)
