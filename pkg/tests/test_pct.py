import math
from fractions import Fraction as F

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st
from scipy.linalg import eigvalsh_tridiagonal

from pdmkit.pct import (
    ComplexAngularMomentumError,
    InverseSquareMassError,
    MappingDomainError,
    build_mapping,
    coulomb,
    custom_numeric,
    lambda_eff,
    map_reference_to_target,
    oscillator,
    parse_reference,
    special_case_inverse_square,
    u_d,
    wavefunction_pullback,
)
from pdmkit.pdm_operator import GridFunction
from pdmkit.profiles import make_constant, make_power_law, make_rational, parse_profile


def fd_reference_levels(potential, L, z_max, n=6000, k=4):
    """Independent oracle: dense-free FD eigenvalues via scipy."""
    h = z_max / (n + 1)
    z = h * np.arange(1, n + 1)
    diag = 2 / h**2 + L * (L + 1) / z**2 + potential(z)
    off = np.full(n - 1, -1 / h**2)
    return eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))


@pytest.mark.parametrize("L", [0, 1, 2])
def test_oscillator_formula_against_numeric(L):
    ref = oscillator(1.0)
    num = fd_reference_levels(ref.potential, L, 10.0)
    assert np.allclose(num, [ref.spectrum(n, L) for n in range(4)], rtol=2e-4)


@pytest.mark.parametrize("L", [0, 1])
def test_coulomb_formula_against_numeric(L):
    ref = coulomb(2.0)
    num = fd_reference_levels(ref.potential, L, 80.0, n=20000, k=2)
    assert np.allclose(num, [ref.spectrum(n, L) for n in range(2)], rtol=2e-3)


def test_parse_reference():
    assert parse_reference("oscillator:k=4").spectrum(0, 0) == 6.0
    assert parse_reference("coulomb:e2=2").spectrum(0, 0) == -1.0
    assert parse_reference("oscillator").params == {"k": 1.0}
    for bad in ("morse:a=1", "oscillator:q=1", "coulomb:e2"):
        with pytest.raises(ValueError):
            parse_reference(bad)


@pytest.mark.parametrize("ld", range(6))
def test_lambda_at_constant_mass(ld):
    assert lambda_eff(0, ld, 3) == ld


def test_lambda_acceptance_problem_is_zero():
    lam = lambda_eff(2, 1, 3)
    assert lam == 0 and isinstance(lam, F)


@given(st.fractions(-6, 6, max_denominator=6).filter(lambda u: u != -2),
       st.integers(0, 5), st.integers(1, 6))
def test_lambda_identity_exact(u, ell, d):
    ld = F(2 * ell + d - 3, 2) if d > 1 else F(ell % 2 - 1)
    rad = (u / 2 + 1) ** 2 + 4 * ld * (ld + 1) + 2 * u * (1 - d)
    if rad < 0:
        with pytest.raises(ComplexAngularMomentumError):
            lambda_eff(u, ld, d)
        return
    lam = sympy.nsimplify(lambda_eff(u, ld, d, exact=True))
    lhs = lam * (lam + 1) * (sympy.Rational(u.numerator, u.denominator) / 2 + 1) ** 2
    rhs = sympy.Rational((ld * (ld + 1) - u * (d - 1) / 2).numerator,
                         (ld * (ld + 1) - u * (d - 1) / 2).denominator)
    assert sympy.simplify(lhs - rhs) == 0


def test_complex_lambda_error():
    with pytest.raises(ComplexAngularMomentumError, match="complex effective angular momentum"):
        lambda_eff(2, 0, 3)


def test_inverse_square_has_no_lambda():
    with pytest.raises(InverseSquareMassError):
        lambda_eff(-2, 0, 3)


def test_closed_form_mapping():
    m = make_power_law(1, 2)
    mp = build_mapping(m, (1e-6, 4.0))
    assert mp.closed_form
    r = np.array([0.5, 1.0, 2.0])
    assert np.allclose(mp.forward(r), r**2 / 2)
    assert np.allclose(mp.inverse(mp.forward(r)), r)
    # (upsilon + 2)/2 * Z = r sqrt(m)
    assert np.allclose(2 * mp.forward(r), r * np.sqrt(m(r)))
    with pytest.raises(MappingDomainError):
        mp.forward(5.0)


def test_log_mapping():
    mp = build_mapping(make_power_law(4, -2), (0.5, 10.0))
    assert mp.forward(1.0) == pytest.approx(0.0, abs=1e-15)
    assert mp.forward(math.e) == pytest.approx(2.0)


def test_numeric_mapping_matches_quadrature():
    m = make_rational(1, 1, 0)
    mp = build_mapping(m, (0.0, 3.0))
    assert not mp.closed_form
    r = np.linspace(0.1, 3.0, 7)
    # Z = integral of sqrt(1 + r^2) from 0
    exact = 0.5 * (r * np.sqrt(1 + r**2) + np.arcsinh(r))
    assert np.allclose(mp.forward(r), exact, rtol=1e-12)
    assert np.allclose(mp.inverse(exact), r, rtol=1e-10)


def test_u_d_power_law():
    m = make_power_law(2, 3)
    r = np.array([0.5, 1.5])
    # upsilon (d-1) / (2 r^2 m)
    assert np.allclose(u_d(m, r, 4), 3 * 3 / (2 * r**2 * 2 * r**3))


def test_inverse_square_shift():
    case = special_case_inverse_square(make_power_law(1, -2), None, 3, 0)
    assert case.shift == 2.0
    case = special_case_inverse_square(make_power_law(2, -2), None, 3, 1)
    assert case.shift == pytest.approx((2 + 2) / 2)
    with pytest.raises(InverseSquareMassError):
        special_case_inverse_square(make_power_law(1, 2), None, 3)


def test_target_for_acceptance_problem():
    t = map_reference_to_target(oscillator(1.0), make_power_law(1, 2), 3, 1, n_max=3)
    assert t.lam == 0
    assert t.predicted.energies.tolist() == [3.0, 7.0, 11.0, 15.0]
    r = np.array([0.5, 1.0, 2.0])
    assert np.allclose(t.potential(r), r**4 / 4)


def test_inverse_square_target():
    t = map_reference_to_target(oscillator(1.0), make_power_law(1, -2), 3, 0, n_max=3)
    assert t.shift == 2.0
    assert t.predicted.energies.tolist() == [3.0, 5.0, 7.0, 9.0]
    assert t.potential(math.e) == pytest.approx(1.0)
    odd = map_reference_to_target(oscillator(1.0), make_power_law(1, -2), 3, 0, 2, reference_l=0)
    assert odd.predicted.energies.tolist() == [5.0, 9.0, 13.0]
    with pytest.raises(ValueError, match="only s-states"):
        map_reference_to_target(oscillator(1.0), make_power_law(1, -2), 3, 0, reference_l=1)
    with pytest.raises(ValueError, match="whole-line"):
        map_reference_to_target(coulomb(2.0), make_power_law(1, -2), 3, 0)


def test_constant_mass_target_is_reference():
    t = map_reference_to_target(coulomb(2.0), make_constant(1.0), 3, 0, n_max=1)
    assert t.predicted.energies.tolist() == [-1.0, -0.25]


def test_custom_numeric_reference():
    ref = custom_numeric(lambda z: z**2, z_max=10.0)
    assert ref.spectrum(1, 0) == pytest.approx(7.0, rel=1e-4)


def test_pullback_normalization_carries_over():
    m = make_power_law(1, 2)
    mp = build_mapping(m, (1e-3, 4.0))
    z = np.linspace(mp.z_domain[0], mp.z_domain[1], 4001)
    phi = GridFunction(z, z * np.exp(-z**2 / 2))
    R = wavefunction_pullback(mp, m, phi)
    # R^2 dr = m^{1/2} phi^2 dr = phi^2 dZ
    assert np.trapezoid(R.values**2, R.x) == pytest.approx(np.trapezoid(phi.values**2, z), rel=1e-5)
    on_r = wavefunction_pullback(mp, m, phi, np.linspace(0.01, 3.9, 50))
    assert np.allclose(on_r.values, m(on_r.x) ** 0.25 * (on_r.x**2 / 2) * np.exp(-(on_r.x**2 / 2) ** 2 / 2),
                       atol=1e-8)
