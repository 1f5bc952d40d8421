"""Point canonical transformation between PDM radial problems and constant-mass ones.

The map ``Z(r) = int sqrt(m) dr`` together with ``R = m^(1/4) phi(Z)``
removes the first-derivative term of the radial PDM equation and leaves

    -phi'' + [l_d(l_d+1)/(r^2 m) + V - U_d] phi = E phi,
    U_d = m' (d-1) / (2 r m^2).

For power-law masses ``m = sigma r^upsilon`` the centrifugal and U_d terms
combine into ``lambda(lambda+1)/Z^2``, so a solvable constant-mass
reference potential V_ref(Z) yields a solvable target ``V(r) = V_ref(Z(r))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .pdm_operator import GridFunction
from .profiles import MassProfile, PotentialProfile
from .spectrum import Level, Spectrum

__all__ = [
    "PCTMapping",
    "MappingDomainError",
    "ComplexAngularMomentumError",
    "InverseSquareMassError",
    "build_mapping",
    "u_d",
    "lambda_eff",
    "ReferenceModel",
    "oscillator",
    "coulomb",
    "custom_numeric",
    "parse_reference",
    "TargetModel",
    "map_reference_to_target",
    "InverseSquareCase",
    "special_case_inverse_square",
    "wavefunction_pullback",
    "power_law_params",
]

_GL16 = np.polynomial.legendre.leggauss(16)
_GL8 = np.polynomial.legendre.leggauss(8)


class MappingDomainError(ValueError):
    pass


class ComplexAngularMomentumError(ValueError):
    """Negative radicand in the effective angular momentum: the mapping does not apply."""


class InverseSquareMassError(ValueError):
    """upsilon = -2 has no lambda; use special_case_inverse_square."""


def power_law_params(m: MassProfile) -> tuple[float, float] | None:
    """``(sigma, upsilon)`` when ``m`` is a power law (constants count as upsilon = 0)."""
    if m.family == "power_law":
        return m.params["sigma"], m.params["upsilon"]
    if m.family == "constant":
        return m.params["value"], 0.0
    return None


def _gl(f, a, b, rule):
    x, w = rule
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    t = 0.5 * (a + b) + half * x
    return np.sum(w * f(t), axis=-1) * half[..., 0]


def _adaptive_panels(f, nodes, rtol=1e-13, atol=1e-15, max_depth=50):
    """Split ``nodes`` until 8- and 16-point Gauss-Legendre agree; return leaf edges and integrals."""
    a, b = nodes[:-1], nodes[1:]
    leaves_a, leaves_b, leaves_i = [], [], []
    for _ in range(max_depth):
        if a.size == 0:
            break
        i16 = _gl(f, a, b, _GL16)
        i8 = _gl(f, a, b, _GL8)
        ok = np.abs(i16 - i8) <= rtol * np.abs(i16) + atol * (b - a)
        leaves_a.append(a[ok])
        leaves_b.append(b[ok])
        leaves_i.append(i16[ok])
        mid = 0.5 * (a[~ok] + b[~ok])
        a, b = np.concatenate([a[~ok], mid]), np.concatenate([mid, b[~ok]])
    else:
        if a.size:
            raise RuntimeError("adaptive quadrature did not converge")
    la = np.concatenate(leaves_a)
    order = np.argsort(la)
    return la[order], np.concatenate(leaves_b)[order], np.concatenate(leaves_i)[order]


@dataclass(frozen=True)
class PCTMapping:
    """``Z(r)`` on ``r_domain`` with its inverse and jacobian ``sqrt(m)``."""

    mass: MassProfile
    r_domain: tuple[float, float]
    closed_form: bool
    _forward: Callable = field(repr=False)
    _inverse: Callable = field(repr=False)

    @property
    def z_domain(self) -> tuple[float, float]:
        lo, hi = self.r_domain
        return (self._forward(np.float64(lo)), self._forward(np.float64(hi)))

    def _check_r(self, r):
        r = np.asarray(r, dtype=float)
        lo, hi = self.r_domain
        slack = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(r < lo - slack) or np.any(r > hi + slack):
            raise MappingDomainError(f"r outside mapping domain [{lo}, {hi}]")
        return np.clip(r, lo, hi)

    def forward(self, r):
        r = self._check_r(r)
        out = self._forward(r)
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, z):
        z = np.asarray(z, dtype=float)
        z0, z1 = self.z_domain
        slack = 1e-12 * max(1.0, abs(z0), abs(z1))
        if np.any(z < z0 - slack) or np.any(z > z1 + slack):
            raise MappingDomainError(f"Z outside mapping range [{z0}, {z1}]")
        out = self._inverse(np.clip(z, z0, z1))
        return float(out) if np.ndim(out) == 0 else out

    def jacobian(self, r):
        return np.sqrt(self.mass(self._check_r(r)))


def _closed_form(m: MassProfile, sigma: float, upsilon: float, domain) -> PCTMapping:
    rs = math.sqrt(sigma)
    if upsilon == -2:
        fwd = lambda r: rs * np.log(r)  # noqa: E731
        inv = lambda z: np.exp(z / rs)  # noqa: E731
    elif upsilon == 0:
        fwd = lambda r: rs * r  # noqa: E731
        inv = lambda z: z / rs  # noqa: E731
    else:
        p = (upsilon + 2) / 2
        c = 2 * rs / (upsilon + 2)
        fwd = lambda r: c * np.power(r, p)  # noqa: E731
        inv = lambda z: np.power(z / c, 1 / p)  # noqa: E731
    return PCTMapping(m, tuple(domain), True, fwd, inv)


def _numeric(m: MassProfile, domain) -> PCTMapping:
    lo, hi = domain
    sqrt_m = lambda r: np.sqrt(m(r))  # noqa: E731
    seeds = np.linspace(lo, hi, 65)
    if lo > 0 and hi / lo > 10:
        seeds = np.union1d(seeds, np.geomspace(lo, hi, 65))
    a, b, integrals = _adaptive_panels(sqrt_m, seeds)
    edges = np.append(a, b[-1])
    table = np.concatenate([[0.0], np.cumsum(integrals)])

    def fwd(r):
        r = np.asarray(r, dtype=float)
        k = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, a.size - 1)
        return table[k] + _gl(sqrt_m, edges[k], r, _GL16)

    def inv(z):
        z = np.asarray(z, dtype=float)
        k = np.clip(np.searchsorted(table, z, side="right") - 1, 0, a.size - 1)
        left, right = edges[k], edges[k + 1]
        r = np.interp(z, table, edges)
        for _ in range(50):
            step = (fwd(r) - z) / sqrt_m(r)
            r_new = np.clip(r - step, left, right)
            done = np.all(np.abs(r_new - r) <= 1e-15 * np.maximum(1.0, np.abs(r)))
            r = r_new
            if done:
                break
        return r

    return PCTMapping(m, (lo, hi), False, fwd, inv)


def build_mapping(m: MassProfile, domain: tuple[float, float]) -> PCTMapping:
    """Coordinate map for ``m`` on ``domain = (r_min, r_max)``.

    Power laws use closed forms anchored at ``Z(0+) = 0`` (``Z(1) = 0`` when
    upsilon = -2); constants map to ``Z = sqrt(m) r``.  Other masses use
    adaptive Gauss-Legendre quadrature anchored at ``Z(r_min) = 0``.
    """
    lo, hi = map(float, domain)
    if not hi > lo:
        raise MappingDomainError(f"empty mapping domain ({lo}, {hi})")
    probe = np.linspace(lo, hi, 257)
    try:
        values = m(probe)
    except ValueError as exc:
        raise MappingDomainError(f"mass not evaluable on [{lo}, {hi}]: {exc}") from exc
    if np.any(values <= 0):
        raise MappingDomainError("mass must be positive on the mapping domain")
    pl = power_law_params(m)
    if pl is not None:
        return _closed_form(m, pl[0], pl[1], (lo, hi))
    return _numeric(m, (lo, hi))


def u_d(m: MassProfile, r, d: int):
    """``m'(r) (d-1) / (2 r m(r)^2)``."""
    mv, m1 = m(r), m.d1(r)
    return m1 * (d - 1) / (2 * r * mv**2)


def _exact_sqrt(q: Fraction):
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def lambda_eff(upsilon, ell_d, d: int, exact: bool = False):
    """Effective angular momentum of the mapped power-law problem.

    ``lambda = -1/2 + sqrt((upsilon/2+1)^2 + 4 l_d(l_d+1) + 2 upsilon (1-d)) / |upsilon+2|``.

    Rational inputs with a perfect-square radicand give a ``Fraction``.
    With ``exact=True`` an irrational root is returned as a sympy expression.
    """
    rational = all(isinstance(v, Rational) for v in (upsilon, ell_d))
    u = Fraction(upsilon) if rational else float(upsilon)
    ld = Fraction(ell_d) if rational else float(ell_d)
    if u == -2:
        raise InverseSquareMassError("upsilon = -2 has no effective lambda; use the inverse-square special case")
    radicand = (u / 2 + 1) ** 2 + 4 * ld * (ld + 1) + 2 * u * (1 - d)
    if radicand < 0:
        raise ComplexAngularMomentumError(
            f"complex effective angular momentum: radicand {radicand} < 0 "
            f"(upsilon={upsilon}, l_d={ell_d}, d={d})"
        )
    if rational:
        root = _exact_sqrt(radicand)
        if root is not None:
            return Fraction(-1, 2) + root / abs(u + 2)
        if exact:
            import sympy

            q = abs(u + 2)
            return sympy.Rational(-1, 2) + sympy.sqrt(
                sympy.Rational(radicand.numerator, radicand.denominator)
            ) / sympy.Rational(q.numerator, q.denominator)
    return -0.5 + math.sqrt(radicand) / abs(float(u) + 2)


@dataclass(frozen=True)
class ReferenceModel:
    """Constant-mass reference ``-phi'' + L(L+1)/Z^2 phi + V(Z) phi = eps phi``."""

    family: str
    params: dict
    potential: Callable = field(repr=False)
    _spectrum: Callable = field(repr=False)
    full_line_spectrum: Callable | None = field(default=None, repr=False)

    def spectrum(self, n_r: int, L: float) -> float:
        """Energy of level ``n_r`` at (real) angular momentum ``L >= -1``."""
        return float(self._spectrum(n_r, L))


def oscillator(k: float = 1.0) -> ReferenceModel:
    """``V = k Z^2``; ``eps = sqrt(k) (4 n_r + 2 L + 3)``."""
    if not k > 0:
        raise ValueError("oscillator needs k > 0")
    sk = math.sqrt(k)
    return ReferenceModel(
        "oscillator",
        {"k": k},
        lambda z: k * np.asarray(z) ** 2,
        lambda n, L: sk * (4 * n + 2 * L + 3),
        lambda n: sk * (2 * n + 1),
    )


def coulomb(e2: float = 2.0) -> ReferenceModel:
    """``V = -e2 / Z``; ``eps = -e2^2 / (4 (n_r + L + 1)^2)``."""
    if not e2 > 0:
        raise ValueError("coulomb needs e2 > 0")
    return ReferenceModel(
        "coulomb",
        {"e2": e2},
        lambda z: -e2 / np.asarray(z),
        lambda n, L: -(e2**2) / (4 * (n + L + 1) ** 2),
    )


def custom_numeric(potential: Callable, z_max: float = 20.0, n: int = 4000) -> ReferenceModel:
    """Reference whose spectrum is computed by finite differences on ``(0, z_max)``."""
    from .tridiag import eigenvalues_below

    def spec(n_r, L):
        h = z_max / (n + 1)
        z = h * np.arange(1, n + 1)
        w = L * (L + 1) / z**2 + potential(z)
        diag = 2 / h**2 + w
        off = np.full(n - 1, -1 / h**2)
        levels = eigenvalues_below(diag, off, np.inf, n_r + 1)
        if len(levels) <= n_r:
            raise ValueError(f"custom reference has no level n_r={n_r}")
        return levels[n_r][0]

    return ReferenceModel("custom_numeric", {"z_max": z_max}, potential, spec)


def parse_reference(text: str) -> ReferenceModel:
    """``oscillator:k=<k>`` or ``coulomb:e2=<e2>`` (parameters optional)."""
    family, _, rest = text.strip().partition(":")
    params: dict[str, float] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"reference parameter must be key=value, got {item!r}")
        params[key.strip()] = float(val)
    if family == "oscillator":
        unknown = set(params) - {"k"}
        if unknown:
            raise ValueError(f"unknown oscillator parameter(s): {sorted(unknown)}")
        return oscillator(params.get("k", 1.0))
    if family == "coulomb":
        unknown = set(params) - {"e2"}
        if unknown:
            raise ValueError(f"unknown coulomb parameter(s): {sorted(unknown)}")
        return coulomb(params.get("e2", 2.0))
    raise ValueError(f"unknown reference family {family!r}; use oscillator:k=.. or coulomb:e2=..")


@dataclass(frozen=True)
class TargetModel:
    potential: PotentialProfile
    predicted: Spectrum
    mapping: PCTMapping
    lam: float | Fraction | None
    shift: float = 0.0


@dataclass(frozen=True)
class InverseSquareCase:
    """upsilon = -2: the mapped problem lives on the whole Z line, shifted by ``shift``."""

    shift: float
    mapping: PCTMapping
    ell_d: Fraction
    reference_potential: Callable = field(repr=False)


def _ell_d(d: int, ell: int, parity: str | None) -> Fraction:
    from .radial import l_d

    return l_d(ell, d, parity)


def special_case_inverse_square(m: MassProfile, V: PotentialProfile | None, d: int, ell: int = 0,
                                parity: str | None = None) -> InverseSquareCase:
    """Constant shift ``[l_d(l_d+1) + d - 1] / sigma`` for ``m = sigma r^-2``.

    The reference coordinate is ``Z = sqrt(sigma) ln r`` on the whole line and
    the reference potential is ``V(r(Z))``.
    """
    pl = power_law_params(m)
    if pl is None or m.family != "power_law" or pl[1] != -2:
        raise InverseSquareMassError("inverse-square special case needs a power-law mass with upsilon = -2")
    sigma = pl[0]
    ld = _ell_d(d, ell, parity)
    shift = (float(ld * (ld + 1)) + d - 1) / sigma
    mapping = _closed_form(m, sigma, -2.0, (0.0, math.inf))
    rs = math.sqrt(sigma)
    ref_v = (lambda z: V(np.exp(np.asarray(z) / rs))) if V is not None else (lambda z: 0 * z)
    return InverseSquareCase(shift, mapping, ld, ref_v)


def map_reference_to_target(
    ref: ReferenceModel,
    m: MassProfile,
    d: int,
    ell: int = 0,
    n_max: int = 3,
    parity: str | None = None,
    reference_l: int | None = None,
) -> TargetModel:
    """Target potential ``V(r) = V_ref(|Z(r)|)`` and its predicted spectrum.

    For upsilon != -2 the predicted energies are ``eps(n_r, L = lambda)``.
    For upsilon = -2 the reference lives on the whole Z line and the
    prediction is ``eps_line(n) + shift``; ``reference_l`` in {0, -1} keeps
    only odd / even states, and any other value is rejected.
    """
    pl = power_law_params(m)
    if pl is None:
        raise ValueError("reference-to-target mapping needs a power-law (or constant) mass")
    sigma, upsilon = pl
    ld = _ell_d(d, ell, parity)

    if upsilon == -2:
        if reference_l not in (None, 0, -1):
            raise ValueError(
                "for upsilon = -2 only s-states and/or d=1 states are available from the "
                f"reference (reference L must be 0 or -1, got {reference_l})"
            )
        if ref.full_line_spectrum is None:
            raise ValueError(f"{ref.family} reference has no whole-line spectrum for the upsilon = -2 case")
        case = special_case_inverse_square(m, None, d, ell, parity)
        rs = math.sqrt(sigma)
        target = PotentialProfile(
            "pct_target", {"sigma": sigma, "upsilon": -2.0}, (0.0, math.inf),
            lambda r: ref.potential(rs * np.log(r)),
            formula=f"{ref.family}(Z=sqrt({sigma})*ln r)",
        )
        if reference_l is None:
            eps = [ref.full_line_spectrum(n) for n in range(n_max + 1)]
        else:
            # odd states (L=0) are n = 1, 3, ...; even (L=-1) are n = 0, 2, ...
            first = 1 if reference_l == 0 else 0
            eps = [ref.full_line_spectrum(first + 2 * n) for n in range(n_max + 1)]
        levels = [Level(n, e + case.shift, n) for n, e in enumerate(eps)]
        return TargetModel(target, Spectrum(levels, "pct"), case.mapping, None, case.shift)

    # Fraction(float) is exact, so integral exponents give an exact lambda
    lam = lambda_eff(Fraction(upsilon), ld, d)
    L = float(lam)
    if d == 1 and parity == "even":
        # Neumann branch: the other root of L(L+1) = lambda(lambda+1)
        L = -1.0 - L
    mapping = _closed_form(m, sigma, upsilon, (0.0, math.inf))
    fwd = mapping._forward
    target = PotentialProfile(
        "pct_target", {"sigma": sigma, "upsilon": upsilon}, (0.0, math.inf),
        lambda r: ref.potential(np.abs(fwd(r))),
        formula=f"{ref.family}(Z(r))",
    )
    levels = [Level(n, ref.spectrum(n, L), n) for n in range(n_max + 1)]
    return TargetModel(target, Spectrum(levels, "pct"), mapping, lam)


def wavefunction_pullback(mapping: PCTMapping, m: MassProfile, phi: GridFunction, r_grid=None) -> GridFunction:
    """``R(r) = m(r)^(1/4) phi(Z(r))``.

    Without ``r_grid`` the result lives on ``r = Z^-1(phi.x)``; otherwise
    ``phi`` is interpolated with a cubic spline at ``Z(r_grid)``.
    """
    if r_grid is None:
        r = mapping.inverse(phi.x)
        values = phi.values
    else:
        r = np.asarray(r_grid, dtype=float)
        z = mapping.forward(r)
        slack = 1e-12 * max(1.0, np.max(np.abs(phi.x)))
        if np.min(z) < phi.x[0] - slack or np.max(z) > phi.x[-1] + slack:
            raise MappingDomainError("r grid maps outside the Z grid of phi")
        values = CubicSpline(phi.x, phi.values)(np.clip(z, phi.x[0], phi.x[-1]))
    return GridFunction(r, m(r) ** 0.25 * values)
