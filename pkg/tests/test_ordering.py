from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdmkit.ordering import (
    MM,
    NoRealOrderingError,
    OrderingParameters,
    catalog,
    compare_orderings,
    effective_potential_1d,
    effective_potential_radial,
    kinetic_coefficients,
    lookup,
    make_ordering,
    parse_ordering,
    solve_parameters_from_coefficients,
)
from pdmkit.profiles import make_constant, make_exponential, make_power_law, make_rational, parse_profile

fractions = st.fractions(min_value=-3, max_value=3, max_denominator=12)


def test_catalog_triples():
    got = {o.name: o.triple for o in catalog()}
    assert got == {
        "gora_williams": (-1, 0, 0),
        "ben_daniel_duke": (0, -1, 0),
        "zhu_kroemer": (F(-1, 2), 0, F(-1, 2)),
        "li_kuhn": (0, F(-1, 2), F(-1, 2)),
        "mm": (F(-1, 4), F(-1, 2), F(-1, 4)),
    }


def test_constraint_enforced():
    with pytest.raises(ValueError):
        OrderingParameters(F(0), F(0), F(0))
    with pytest.raises(ValueError):
        OrderingParameters(0.1, 0.2, 0.3)


def test_mm_coefficients():
    k = kinetic_coefficients(MM)
    assert (k.c_lap, k.c_grad) == (F(1, 4), F(7, 16))


def test_parameter_determination_is_exact():
    sols = solve_parameters_from_coefficients(F(1, 4), F(7, 16))
    assert [s.triple for s in sols] == [(F(-1, 4), F(-1, 2), F(-1, 4))]
    assert all(isinstance(v, F) for v in sols[0].triple)


def test_two_roots_are_mirror_images():
    zk = lookup("zhu_kroemer")
    sols = solve_parameters_from_coefficients(F(1, 2), F(1))
    assert {s.triple for s in sols} == {(-1, 0, 0), (0, 0, -1)}
    assert kinetic_coefficients(zk).c_grad == F(3, 4)


def test_no_real_ordering():
    with pytest.raises(NoRealOrderingError):
        solve_parameters_from_coefficients(F(1, 4), F(0))


def test_mm_sits_on_the_double_root():
    # below c_grad = 7/16 the discriminant at c_lap = 1/4 turns negative
    assert len(solve_parameters_from_coefficients(F(1, 4), F(7, 16))) == 1
    with pytest.raises(NoRealOrderingError):
        solve_parameters_from_coefficients(F(1, 4), F(7, 16) - F(1, 1000))


def test_float_coefficients_solve():
    sols = solve_parameters_from_coefficients(0.25, 0.4375)
    assert len(sols) == 1
    assert sols[0].alpha == pytest.approx(-0.25, abs=1e-12)


@given(fractions, fractions)
def test_roundtrip_recovers_ordering(alpha, beta):
    o = make_ordering(alpha, beta)
    k = kinetic_coefficients(o)
    sols = solve_parameters_from_coefficients(k.c_lap, k.c_grad)
    triples = {s.triple for s in sols}
    assert o.triple in triples or o.swapped().triple in triples
    for s in sols:
        assert kinetic_coefficients(s) == k


@given(fractions, fractions)
def test_mirror_symmetry(alpha, beta):
    o = make_ordering(alpha, beta)
    assert kinetic_coefficients(o) == kinetic_coefficients(o.swapped())
    k = kinetic_coefficients(o)
    assert k.c_grad == o.beta + 1 - o.alpha * o.gamma


def test_parse_ordering():
    assert parse_ordering("mm").same_triple(MM)
    assert parse_ordering("custom:-0.25,-0.5").same_triple(MM)
    assert parse_ordering("custom:-1/4, -1/2").same_triple(MM)
    with pytest.raises(KeyError):
        parse_ordering("weyl")
    with pytest.raises(ValueError):
        parse_ordering("custom:1")


def test_constant_mass_vtilde_equals_v():
    x = np.linspace(-3, 3, 13)
    V = parse_profile("x^2", kind="potential")
    for o in catalog():
        assert np.array_equal(effective_potential_1d(o, make_constant(1), V, x), V(x))


def test_mm_correspondence_pointwise():
    m = make_rational(1, 1, 0)
    V = parse_profile("x^2", kind="potential")
    x = np.linspace(-4, 4, 101)
    mv, m1, m2 = 1 + x**2, 2 * x, 2.0
    diff = effective_potential_1d(MM, m, V, x) - V(x)
    assert np.max(np.abs(diff - (0.25 * m2 / mv**2 - 7 / 16 * m1**2 / mv**3))) <= 1e-12


def test_difference_column_matches_coefficient_arithmetic():
    m = make_exponential(1.0, 2.0)
    V = make_constant(0.0, kind="potential")
    x = np.linspace(-1, 1, 21)
    zk = lookup("zhu_kroemer")
    table = compare_orderings([MM, zk], m, V, x)
    # mm - zk: (1/4 - 1/2) m''/m^2 - (7/16 - 3/4) m'^2/m^3 = -1/4*4/m + 5/16*4/m
    expected = (-1.0 + 1.25) / np.exp(2 * x)
    assert np.allclose(table.differences[("mm", "zhu_kroemer")], expected, rtol=1e-13)
    assert table.header() == ["r", "V", "Vtilde_mm", "Vtilde_zhu_kroemer", "diff_mm_zhu_kroemer"]
    assert table.rows().shape == (21, 5)


def test_radial_laplacian_modes():
    m = make_power_law(1, 2)
    V = make_constant(0.0, kind="potential")
    r = np.array([0.5, 1.0, 2.0])
    lit = effective_potential_radial(MM, m, V, r, 3, "literal_radial")
    full = effective_potential_radial(MM, m, V, r, 3, "full_laplacian")
    # literal: (1/4*2 - 7/16*4) / r^4 ; full adds 1/4 * (d-1) m'/r / m^2 = 1/r^4
    assert np.allclose(lit, (0.5 - 1.75) / r**4, rtol=1e-14)
    assert np.allclose(full - lit, 1.0 / r**4, rtol=1e-14)
    with pytest.raises(ValueError):
        effective_potential_radial(MM, m, V, r, 3, "cartesian")


def test_zhu_kroemer_is_a_double_root():
    sols = solve_parameters_from_coefficients(F(1, 2), F(3, 4))
    assert [s.triple for s in sols] == [(F(-1, 2), 0, F(-1, 2))]


def test_make_ordering_examples():
    assert make_ordering(0, 0).triple == (0, 0, -1)
    assert make_ordering(F(-1, 2), 0).triple == (F(-1, 2), 0, F(-1, 2))
    assert kinetic_coefficients(lookup("gora_williams")) == kinetic_coefficients(make_ordering(0, 0))


def test_mm_exponential_mass_value():
    x = np.linspace(-1, 1, 5)
    vt = effective_potential_1d(MM, make_exponential(1, 2), make_constant(0.0, kind="potential"), x)
    assert np.allclose(vt, -0.75 * np.exp(-2 * x), rtol=1e-14)


def test_radial_hand_values():
    m, V = make_power_law(1, 2), make_constant(0.0, kind="potential")
    assert effective_potential_radial(MM, m, V, 1.0, 3) == pytest.approx(-1.25, rel=1e-15)
    assert effective_potential_radial(MM, m, V, 1.0, 3, "full_laplacian") == pytest.approx(-0.25, rel=1e-15)


@given(fractions, fractions)
def test_swapped_triple_gives_same_vtilde(alpha, beta):
    o = make_ordering(alpha, beta)
    m, V = make_rational(1, 1, 0), parse_profile("x^2", kind="potential")
    x = np.linspace(-2, 2, 9)
    assert np.array_equal(effective_potential_1d(o, m, V, x), effective_potential_1d(o.swapped(), m, V, x))


def test_single_ordering_table_and_constant_mass_differences():
    x = np.linspace(0, 1, 4)
    V = make_constant(1.0, kind="potential")
    t = compare_orderings([MM], make_rational(1, 1, 0), V, x)
    assert t.header() == ["r", "V", "Vtilde"] and not t.differences
    t = compare_orderings(catalog(), make_constant(2.0), V, x)
    assert all(np.all(d == 0) for d in t.differences.values())
    assert len(t.differences) == 10
