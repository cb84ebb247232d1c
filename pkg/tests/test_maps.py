import numpy as np
import pytest

from warpcheck.geometry import GeometryError, MetricPatch
from warpcheck.maps import (
    InsufficientOrder,
    SectionAlongMap,
    SmoothMap,
    bitension_oracle,
    differential,
    energy_density,
    jacobi,
    rough_laplacian,
    tension,
    tension_and_bitension,
    tension_section,
)

LINE = MetricPatch.euclidean(["y"], [(-5.0, 5.0)])
PLANE = MetricPatch.euclidean(["u", "v"], [(-2.0, 2.0)] * 2)
S2 = MetricPatch.diagonal(["th", "ph"], [(0.3, 2.8), (-3.0, 3.0)], ["1", "sin(th)^2"], name="S2")
# b ≡ 1, f² = 2 + sin y: the line with the product metric of B × F written out
BF = MetricPatch.diagonal(["x", "y"], [(-1.0, 1.0), (-1.0, 1.0)], ["2+sin(y)", "1"], name="BxF")
B = MetricPatch.euclidean(["x"], [(-1.0, 1.0)])


def inclusion(y0):
    return SmoothMap.from_strings(B, BF, ["x", repr(y0)], name="i")


def test_differential():
    ident = SmoothMap.identity(PLANE)
    np.testing.assert_allclose(differential(ident, [0.3, 0.1], [1.0, -2.0]), [1.0, -2.0])
    double = SmoothMap.from_strings(LINE, LINE, ["2*y"])
    assert differential(double, [0.7], [1.0])[0] == pytest.approx(2.0)


def test_proper_biharmonic_inclusion():
    tau, tau2 = tension_and_bitension(inclusion(0.0), [0.2])
    np.testing.assert_allclose(tau, [0.0, -0.5], atol=1e-14)
    assert np.max(np.abs(tau2)) <= 1e-10
    _, tau2 = tension_and_bitension(inclusion(0.5), [0.2])
    assert np.max(np.abs(tau2)) >= 1e-3


def test_rough_laplacian_and_jacobi_of_identity():
    ident = SmoothMap.identity(LINE)
    V = SectionAlongMap.from_strings(ident, ["y^2"])
    assert rough_laplacian(V, [0.4])[0] == pytest.approx(-2.0)
    assert jacobi(ident, V, [0.4])[0] == pytest.approx(-2.0)


def test_energy_density():
    assert energy_density(SmoothMap.identity(PLANE), [0.1, 0.2]) == pytest.approx(1.0)
    assert energy_density(SmoothMap.identity(S2), [1.1, 0.2]) == pytest.approx(1.0)
    assert energy_density(SmoothMap.from_strings(LINE, LINE, ["2*y"]), [0.1]) == pytest.approx(2.0)
    assert energy_density(SmoothMap.from_strings(PLANE, PLANE, ["1", "-1"]), [0.1, 0.2]) == 0.0


def test_jacobi_is_linear():
    phi = SmoothMap.from_strings(S2, S2, ["th", "ph+0.3*th"])
    V = SectionAlongMap.from_strings(phi, ["sin(ph)", "th^2"])
    W = SectionAlongMap.from_strings(phi, ["th*ph", "cos(th)"])
    p = [1.2, 0.4]
    lhs = jacobi(phi, V + W.scaled(-2.5), p)
    rhs = jacobi(phi, V, p) - 2.5 * jacobi(phi, W, p)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_bitension_is_minus_jacobi_of_tension():
    phi = SmoothMap.from_strings(S2, S2, ["th+0.1*sin(ph)", "ph+0.2*th^2"])
    p = [1.0, -0.5]
    tau2 = bitension_oracle(phi, p)
    np.testing.assert_allclose(tau2, -jacobi(phi, tension_section(phi), p), atol=1e-12)
    assert np.max(np.abs(tau2)) > 1e-3


def test_frame_and_contraction_bitension_agree():
    phi = SmoothMap.from_strings(S2, BF, ["0.3*th", "0.2*sin(ph)"])
    p = [1.4, 0.3]
    np.testing.assert_allclose(tension(phi, p, "frame"), tension(phi, p), atol=1e-12)
    np.testing.assert_allclose(bitension_oracle(phi, p, "frame"), bitension_oracle(phi, p), atol=1e-10)


def test_harmonic_maps_are_biharmonic():
    rng = np.random.default_rng(3)
    maps = [
        SmoothMap.identity(S2),
        SmoothMap.from_strings(S2, S2, ["th", "-ph"]),
        SmoothMap.from_strings(PLANE, PLANE, ["2*u+v", "u-3*v"]),
    ]
    for phi in maps:
        for p in [np.array([rng.uniform(0.4, 2.7), rng.uniform(-2.9, 2.9)]) for _ in range(5)]:
            if phi.source is PLANE:
                p = p - np.array([1.5, 0.0])
            assert np.max(np.abs(bitension_oracle(phi, p))) <= 1e-9


def test_bitension_needs_fourth_order_jets():
    with pytest.raises(InsufficientOrder):
        bitension_oracle(inclusion(0.0), [0.1], order=3)


def test_mismatched_components_rejected():
    with pytest.raises(GeometryError):
        SmoothMap.from_strings(LINE, PLANE, ["y"])
    with pytest.raises(GeometryError):
        jacobi(SmoothMap.identity(LINE), SectionAlongMap.from_strings(SmoothMap.identity(B), ["x"]), [0.0])
