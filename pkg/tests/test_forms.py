import numpy as np
import pytest

from warpcheck import forms as Fm
from warpcheck.config import load_config
from warpcheck.geometry import MetricPatch
from warpcheck.maps import SmoothMap
from warpcheck.verify import sample_points
from warpcheck.warped import DwpSpace

I = [(-1.0, 1.0)]


def line(v, chart=I):
    return MetricPatch.euclidean([v], chart)


def space(b, f, *, f_squared=False, fchart=I):
    return DwpSpace(line("x"), line("y", fchart), b, f, f_squared=f_squared)


WITNESS = space("1", "2+sin(y)", f_squared=True)


def close(a, b, rel=1e-6):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-3), initial=0.0) <= rel


def test_classify_thresholds():
    assert Fm.classify(1e-12, 0.0) is Fm.Kind.harmonic
    assert Fm.classify(0.5, 1e-12) is Fm.Kind.proper_biharmonic
    assert Fm.classify(0.5, 0.2) is Fm.Kind.not_biharmonic
    assert Fm.classify(0.5, 1e-7) is Fm.Kind.indeterminate
    with pytest.raises(ValueError):
        Fm.classify(0.1, 0.1, tol=0)


def test_inclusion_is_totally_geodesic_when_f_is_one():
    S = space("exp(x)", "1")
    tau, tau2 = Fm.inclusion_B_fields(S, [0.3])
    np.testing.assert_allclose(tau([0.2]).vector, 0.0, atol=1e-15)
    np.testing.assert_allclose(tau2([0.2]).vector, 0.0, atol=1e-15)


def test_witness_tension():
    tau, _ = Fm.inclusion_B_fields(WITNESS, [0.0])
    np.testing.assert_allclose(tau([0.4]).vector, [0.0, -0.5], atol=1e-15)


@pytest.mark.parametrize("name", ["CFG-A", "CFG-B", "CFG-SWAP", "CFG-C", "CFG-POLY"])
def test_inclusion_fields_match_oracle(name):
    S = load_config(name).space
    for p in sample_points(S.chart, 6, 1):
        x, y = S.split(p)
        for side, fields, base, at in (("B", Fm.inclusion_B_fields, y, x), ("F", Fm.inclusion_F_fields, x, y)):
            tau, tau2 = fields(S, base)
            o_tau, o_tau2 = Fm.inclusion_oracle(S, side, base)(at)
            assert close(tau(at).vector, o_tau.vector), (side, p)
            assert close(tau2(at).vector, o_tau2.vector), (side, p)


def test_printed_inclusion_forms_disagree_and_carry_notes():
    S = load_config("CFG-A").space
    at, base = [0.3], [0.6]
    _, printed = Fm.inclusion_F_fields(S, at, "printed")
    _, oracle = Fm.inclusion_oracle(S, "F", at)(base)
    assert not close(printed(base).vector, oracle.vector)
    _, corrected = Fm.inclusion_F_fields(S, at)
    eqs = {c.equation for c in corrected.correction_notes}
    assert "4.2" in eqs
    assert any("ln f" in c.corrected for c in corrected.correction_notes)


def test_classify_witness_and_constant_norm_family():
    c = Fm.classify_inclusion(WITNESS, "B", [0.0], at=[0.1])
    assert c.kind is Fm.Kind.proper_biharmonic and c.agrees is True
    assert c.tau_norm >= 0.4
    c = Fm.classify_inclusion(WITNESS, "B", [0.5], at=[0.1])
    assert c.kind is Fm.Kind.not_biharmonic and c.agrees is True
    S = space("1", "y", f_squared=True, fchart=[(1.0, 3.0)])
    for y0 in np.linspace(1.1, 2.9, 7):
        assert Fm.classify_inclusion(S, "B", [y0], at=[0.0]).kind is Fm.Kind.proper_biharmonic


def test_both_warpings_nonconstant_is_not_biharmonic():
    S = load_config("CFG-A").space
    for y0 in (-0.5, 0.2, 0.7):
        c = Fm.classify_inclusion(S, "B", [y0], at=[0.1])
        assert c.kind is Fm.Kind.not_biharmonic
        assert c.corollary.opposite_constant is False


def test_projection_examples():
    S = space("exp(x)", "1")
    p = [0.3, -0.2]
    np.testing.assert_allclose(Fm.projection_first_bitension(S, p), 0.0, atol=1e-14)
    np.testing.assert_allclose(Fm.projection_tension(S, p), [1.0])
    S = space("2", "exp(y)")
    np.testing.assert_allclose(Fm.projection_first_bitension(S, p), 0.0, atol=1e-14)
    np.testing.assert_allclose(Fm.projection_second_bitension(S, p), 0.0, atol=1e-14)
    np.testing.assert_allclose(Fm.projection_tension(S, p, "F"), [0.25])  # (m/b²) grad ln f


def test_second_projection_is_swapped_first():
    S = load_config("CFG-POLY").space
    p = np.array([0.1, 0.4, -0.3, 0.2])
    q = np.concatenate([p[2:], p[:2]])
    np.testing.assert_allclose(Fm.projection_second_bitension(S, p), Fm.projection_first_bitension(S.swapped(), q))


@pytest.mark.parametrize("name", ["CFG-A", "CFG-C", "CFG-POLY"])
def test_projection_closed_forms_match_oracle(name):
    S = load_config(name).space
    idF = SmoothMap.identity(S.fiber)
    idB = SmoothMap.identity(S.base)
    m = S.m
    for p in sample_points(S.chart, 5, 2):
        _, t2 = Fm.product_oracle(S, idF, "F")(p)
        assert close(Fm.projection_first_bitension(S, p), t2.vector[:m])
        _, t2 = Fm.product_oracle(S, idB, "B")(p)
        assert close(Fm.projection_second_bitension(S, p), t2.vector[m:])


def test_product_map_linear_phi():
    S = load_config("CFG-A").space
    phi = SmoothMap.from_strings(S.fiber, S.fiber, ["2*y1"])
    oracle = Fm.product_oracle(S, phi, "F")
    for p in sample_points(S.chart, 8, 4):
        pf = Fm.product_domain_warped(S, phi, p)
        o_tau, o_tau2 = oracle(p)
        assert close(pf.tau.vector, o_tau.vector)
        assert close(pf.tau2.vector, o_tau2.vector)
        assert pf.harmonic_residual == 0.0


def test_product_identity_matches_projections():
    S = load_config("CFG-A").space
    p = [0.2, -0.4]
    pf = Fm.product_domain_warped_mirror(S, SmoothMap.identity(S.base), p)
    expect = np.concatenate([Fm.projection_first_bitension(S, p), Fm.projection_second_bitension(S, p)])
    np.testing.assert_allclose(pf.tau2.vector, expect, atol=1e-9)
    _, o = Fm.product_oracle(S, SmoothMap.identity(S.base), "B")(p)
    np.testing.assert_allclose(o.vector, expect, atol=1e-9)


def test_product_rejects_non_harmonic_phi():
    S = load_config("CFG-A").space
    phi = SmoothMap.from_strings(S.fiber, S.fiber, ["y1^2"])
    with pytest.raises(Fm.PreconditionError):
        Fm.product_domain_warped(S, phi, [0.1, 0.2])


@pytest.mark.parametrize(
    "b,f2,phi",
    [
        ("2", "2.25", "y1"),
        ("exp(0.7*x1)", "1", "0"),
        ("1", "2+sin(y1)", "0"),
    ],
)
def test_codomain_conditions_on_biharmonic_configs(b, f2, phi):
    S = DwpSpace(line("x1"), line("y1"), b, f2, f_squared=True)
    ph = SmoothMap.from_strings(S.fiber, S.fiber, [phi])
    for p in sample_points(S.chart, 5, 6):
        c = Fm.codomain_warped_conditions(S, ph, p)
        assert c.oracle_zero(1e-8)
        assert c.holds("a", 1e-8) and c.holds("b", 1e-8)


def test_codomain_conditions_detect_non_biharmonic():
    S = DwpSpace(line("x1"), line("y1"), "exp(x1)", "2+sin(y1)", f_squared=True)
    ph = SmoothMap.from_strings(S.fiber, S.fiber, ["0"])
    c = Fm.codomain_warped_conditions(S, ph, [0.3, 0.2])
    assert not c.oracle_zero(1e-8)
    assert not c.holds("a", 1e-8)


def test_base_dimension_four_admits_proper_inclusion_with_both_warpings_varying():
    # m/2 - m²/8 vanishes at m = 4, leaving only terms that this pair kills
    B4 = MetricPatch.euclidean(["x1", "x2", "x3", "x4"], [(-1.0, 1.0)] * 4)
    S = DwpSpace(B4, line("y1", [(1.0, 3.0)]), "exp(x1)", "y1", f_squared=True)
    c = Fm.classify_inclusion(S, "B", [2.0], at=[0.1, -0.2, 0.3, 0.0])
    assert c.kind is Fm.Kind.proper_biharmonic
    assert c.corollary.opposite_constant is False
    assert c.agrees is False
