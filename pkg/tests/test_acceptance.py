"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line; the lines are repeated in the
pytest terminal summary.  Run this file directly for the lines alone.
"""

import math
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest
import sympy

sys.path.insert(0, str(Path(__file__).parent))
from conftest import ACCEPTANCE_LINES  # noqa: E402

from pdmkit.ordering import MM, effective_potential_1d, solve_parameters_from_coefficients  # noqa: E402
from pdmkit.pct import (  # noqa: E402
    ComplexAngularMomentumError,
    lambda_eff,
    map_reference_to_target,
    oscillator,
    special_case_inverse_square,
)
from pdmkit.pdm_operator import (  # noqa: E402
    GridFunction,
    apply_factorized,
    apply_pi_squared,
    apply_von_roos_kinetic,
    hermiticity_defect,
    observed_order,
    scaling_pair,
    uniform_grid,
)
from pdmkit.profiles import make_constant, make_exponential, make_power_law, make_rational, parse_profile  # noqa: E402
from pdmkit.radial import RadialProblem, cross_validate, solve_fd_z, solve_shooting  # noqa: E402

HALF = (0.0, math.inf)


def report(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def gaussian(x):
    return np.exp(-x**2)


def test_01_parameter_determination():
    solve_parameters_from_coefficients(F(1, 4), F(7, 16))
    best = math.inf
    for _ in range(20):
        t0 = time.perf_counter()
        sols = solve_parameters_from_coefficients(F(1, 4), F(7, 16))
        best = min(best, time.perf_counter() - t0)
    triples = [s.triple for s in sols]
    exact = all(isinstance(v, F) for t in triples for v in t)
    ok = triples == [(F(-1, 4), F(-1, 2), F(-1, 4))] and exact and best < 1e-3
    report(1, ok, f"solutions {triples}, exact={exact}, runtime {best * 1e6:.0f} us")


def test_02_operator_identity():
    x = uniform_grid(-4, 4, 2000)
    psi = GridFunction.sample(gaussian, x)
    worst = 0.0
    for m in (make_rational(1, 1, 0), make_exponential(1, 2)):
        a = apply_pi_squared(m, psi).values
        b = apply_von_roos_kinetic(MM, m, psi).values
        worst = max(worst, np.max(np.abs(a - b)) / np.max(np.abs(a)))
    report(2, worst <= 1e-12, f"max relative residual {worst:.2e} (<= 1e-12)")


def test_03_factorization_order():
    m = make_rational(1, 1, 0)
    V = parse_profile("x^2", kind="potential")
    t0 = time.perf_counter()
    errs, hs = [], []
    for n in (500, 1000, 2000, 4000):
        x = uniform_grid(-8, 8, n)
        psi = GridFunction.sample(gaussian, x)
        ref = apply_pi_squared(m, psi).values + V(x) * psi.values
        errs.append(np.max(np.abs(apply_factorized(m, V, psi).values - ref)[2:-2]))
        hs.append(x[1] - x[0])
    elapsed = time.perf_counter() - t0
    orders = observed_order(errs, hs)
    ok = bool(np.all(np.abs(orders - 2) <= 0.2)) and elapsed < 1.0
    report(3, ok, f"orders {np.round(orders, 3).tolist()}, runtime {elapsed:.3f} s")


def test_04_hermiticity():
    x = uniform_grid(-8, 8, 4000)
    worst = 0.0
    for m in (make_rational(1, 1, 0), make_exponential(1, 0.5)):
        sp = scaling_pair(m, x)
        phi = GridFunction.sample(lambda t: np.exp(-((t - 0.7) / 0.9) ** 2) * np.exp(2j * t), x)
        psi = GridFunction.sample(gaussian, x)
        worst = max(worst, hermiticity_defect(sp, phi, psi, relative=True))
    report(4, worst <= 1e-8, f"relative defect {worst:.2e} (<= 1e-8)")


def test_05_constant_mass_reduction():
    osc = RadialProblem(3, make_constant(1.0), make_power_law(1, 2, kind="potential"), r_max=8.0)
    fd, sh, _ = cross_validate(osc, 4)
    exact = np.array([3, 7, 11, 15, 19.0])
    dev_osc = max(np.max(np.abs(fd.energies - exact) / exact), np.max(np.abs(sh.energies - exact) / exact))
    cou = RadialProblem(3, make_constant(1.0), make_power_law(-2, -1, kind="potential"), r_max=60.0)
    cfd, csh, _ = cross_validate(cou, 0)
    dev_cou = max(abs(cfd.energies[0] + 1), abs(csh.energies[0] + 1))
    ok = len(fd) == len(sh) == 5 and dev_osc <= 1e-3 and dev_cou <= 5e-3
    report(5, ok, f"oscillator max rel dev {dev_osc:.2e} (<= 1e-3), coulomb E0 rel dev {dev_cou:.2e} (<= 5e-3)")


def test_06_pct_end_to_end():
    t0 = time.perf_counter()
    m = make_power_law(1, 2)
    target = map_reference_to_target(oscillator(1.0), m, 3, 1, n_max=3)
    p = RadialProblem(3, m, target.potential, ell=1)
    fd, sh, cross = cross_validate(p, 3)
    elapsed = time.perf_counter() - t0
    pred = np.array([4 * n + 3.0 for n in range(4)])
    v_ok = np.allclose(target.potential(np.array([0.5, 2.0])), np.array([0.5, 2.0]) ** 4 / 4)
    dev = max(np.max(np.abs(fd.energies - pred) / pred), np.max(np.abs(sh.energies - pred) / pred))
    ok = (target.lam == 0 and isinstance(target.lam, F) and v_ok and len(fd) == len(sh) == 4
          and dev <= 5e-3 and cross <= 1e-3 and elapsed < 10)
    report(6, ok, f"lambda={target.lam}, dev vs 4n+3 {dev:.2e} (<= 5e-3), "
                  f"cross-solver {cross:.2e} (<= 1e-3), runtime {elapsed:.2f} s")


def test_07_lambda_identities():
    const_ok = all(lambda_eff(0, ld, 3) == ld for ld in range(6))
    lattice_ok = True
    for u in (F(k, 2) for k in range(-8, 13) if k != -4):
        for ell in range(4):
            for d in (2, 3, 4, 5):
                ld = F(2 * ell + d - 3, 2)
                rhs = ld * (ld + 1) - u * (d - 1) / 2
                try:
                    lam = lambda_eff(u, ld, d, exact=True)
                except ComplexAngularMomentumError:
                    lattice_ok &= (u / 2 + 1) ** 2 / 4 + rhs < 0
                    continue
                lhs = lam * (lam + 1) * sympy.Rational(u / 2 + 1) ** 2
                lattice_ok &= sympy.simplify(lhs - sympy.Rational(rhs)) == 0
    try:
        lambda_eff(2, 0, 3)
        raised = False
    except ComplexAngularMomentumError as exc:
        raised = "complex effective angular momentum" in str(exc)
    ok = const_ok and bool(lattice_ok) and raised
    report(7, ok, f"constant-mass {const_ok}, rational lattice {bool(lattice_ok)}, complex error {raised}")


def test_08_inverse_square_mass():
    m = make_power_law(1, -2)
    V = parse_profile("ln(r)^2", "r", kind="potential", domain=HALF)
    case = special_case_inverse_square(m, V, 3, 0)
    p = RadialProblem(3, m, V)
    fd, sh, cross = cross_validate(p, 4)
    pred = np.array([2 * n + 1 + 2.0 for n in range(5)])
    dev = max(np.max(np.abs(fd.energies - pred) / pred), np.max(np.abs(sh.energies - pred) / pred))
    ok = case.shift == 2 and len(fd) == len(sh) == 5 and dev <= 5e-3
    report(8, ok, f"U_tilde_d={case.shift}, dev vs (2n+1)+2 {dev:.2e} (<= 5e-3)")


def test_09_interdimensional_degeneracy():
    V = make_power_law(1, 2, kind="potential")
    one = make_constant(1.0)
    devs = []
    for solver in (solve_fd_z, solve_shooting):
        a = solver(RadialProblem(5, one, V, ell=0, r_max=8.0), 3).energies
        b = solver(RadialProblem(3, one, V, ell=1, r_max=8.0), 3).energies
        devs.append(np.max(np.abs(a - b) / np.abs(b)))
    # upsilon = 6: (d=3, l=2) and (d=5, l=2) both give lambda = 0
    m = make_power_law(1, 6)
    W = parse_profile("r^8/16", "r", kind="potential", domain=HALF)
    same_lam = lambda_eff(6, 2, 3) == lambda_eff(6, 3, 5) == 0
    for solver in (solve_fd_z, solve_shooting):
        a = solver(RadialProblem(3, m, W, ell=2), 3).energies
        b = solver(RadialProblem(5, m, W, ell=2), 3).energies
        devs.append(np.max(np.abs(a - b) / np.abs(b)))
    ok = same_lam and max(devs) <= 1e-3
    report(9, ok, f"max relative splitting {max(devs):.2e} (<= 1e-3), equal lambda {same_lam}")


def test_10_mm_correspondence():
    x = np.linspace(-4, 4, 201)
    V = make_constant(0.5, kind="potential")
    worst = 0.0
    for m in (make_rational(1, 1, 0), make_exponential(1, 2), make_rational(2, 3, 1)):
        mv, m1, m2 = m.derivatives(x)
        got = effective_potential_1d(MM, m, V, x) - V(x)
        want = 0.25 * m2 / mv**2 - 7 / 16 * m1**2 / mv**3
        worst = max(worst, np.max(np.abs(got - want)))
    report(10, worst <= 1e-12, f"max pointwise difference {worst:.2e} (<= 1e-12)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
