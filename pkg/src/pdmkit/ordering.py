"""von Roos ambiguity parameters and ordering-dependent effective potentials.

With hbar = 2 m0 = 1, every von Roos ordering (alpha, beta, gamma) with
alpha + beta + gamma = -1 reduces the kinetic operator to
``-d (1/m) d + c_lap m''/m^2 - c_grad m'^2/m^3`` where

    c_lap  = (1 + beta) / 2
    c_grad = alpha (alpha + beta + 1) + beta + 1 = beta + 1 - alpha gamma

The second form makes the alpha <-> gamma symmetry explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real

import numpy as np

from .profiles import MassProfile, PotentialProfile

__all__ = [
    "OrderingParameters",
    "KineticCoefficients",
    "NoRealOrderingError",
    "make_ordering",
    "catalog",
    "lookup",
    "parse_ordering",
    "kinetic_coefficients",
    "solve_parameters_from_coefficients",
    "effective_potential_1d",
    "effective_potential_radial",
    "compare_orderings",
    "OrderingTable",
    "MM",
    "LAPLACIAN_MODES",
]

LAPLACIAN_MODES = ("literal_radial", "full_laplacian")


class NoRealOrderingError(ValueError):
    """The coefficient pair admits no real (alpha, beta, gamma)."""


def _num(x):
    """Keep ints/Fractions exact, everything else becomes float."""
    if isinstance(x, bool):
        raise TypeError("ordering parameter cannot be bool")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Real):
        return float(x)
    raise TypeError(f"ordering parameter must be real, got {type(x).__name__}")


@dataclass(frozen=True)
class OrderingParameters:
    alpha: Fraction | float
    beta: Fraction | float
    gamma: Fraction | float
    name: str | None = None

    def __post_init__(self):
        total = self.alpha + self.beta + self.gamma
        exact = all(isinstance(v, Fraction) for v in (self.alpha, self.beta, self.gamma))
        if exact and total != -1:
            raise ValueError(f"alpha + beta + gamma = {total}, must be -1")
        if not exact and abs(float(total) + 1) > 1e-12:
            raise ValueError(f"alpha + beta + gamma = {float(total)!r}, must be -1")

    @property
    def triple(self):
        return (self.alpha, self.beta, self.gamma)

    def swapped(self) -> "OrderingParameters":
        """The alpha <-> gamma mirror; it has the same effective potential."""
        return OrderingParameters(self.gamma, self.beta, self.alpha, None)

    def same_triple(self, other: "OrderingParameters") -> bool:
        return self.triple == other.triple

    def __str__(self):
        tag = f"{self.name}: " if self.name else ""
        return f"{tag}({self.alpha}, {self.beta}, {self.gamma})"


@dataclass(frozen=True)
class KineticCoefficients:
    c_lap: Fraction | float
    c_grad: Fraction | float


def make_ordering(alpha, beta, name: str | None = None) -> OrderingParameters:
    """Ordering with ``gamma = -1 - alpha - beta``.

    Integer, Fraction and string ("-1/4") inputs stay exact rationals.
    """
    a, b = _num(alpha), _num(beta)
    return OrderingParameters(a, b, -1 - a - b, name)


_F = Fraction
_CATALOG = (
    ("gora_williams", _F(-1), _F(0)),
    ("ben_daniel_duke", _F(0), _F(-1)),
    ("zhu_kroemer", _F(-1, 2), _F(0)),
    ("li_kuhn", _F(0), _F(-1, 2)),
    ("mm", _F(-1, 4), _F(-1, 2)),
)


def catalog() -> list[OrderingParameters]:
    """The named orderings, in a fixed order."""
    return [make_ordering(a, b, name) for name, a, b in _CATALOG]


MM = make_ordering(_F(-1, 4), _F(-1, 2), "mm")


def lookup(name: str) -> OrderingParameters:
    for o in catalog():
        if o.name == name:
            return o
    raise KeyError(f"unknown ordering {name!r}; known: {', '.join(n for n, *_ in _CATALOG)}")


def parse_ordering(text: str) -> OrderingParameters:
    """Catalog name or ``custom:<alpha>,<beta>``.

    Custom values are read as exact decimals/fractions, so
    ``custom:-0.25,-0.5`` is the same triple as ``mm``.
    """
    text = text.strip()
    if text.startswith("custom:"):
        body = text[len("custom:"):]
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"custom ordering needs 'custom:<alpha>,<beta>', got {text!r}")
        try:
            alpha, beta = (Fraction(p) for p in parts)
        except ValueError:
            raise ValueError(f"custom ordering values must be numbers, got {text!r}") from None
        return make_ordering(alpha, beta, f"custom:{parts[0]},{parts[1]}")
    return lookup(text)


def kinetic_coefficients(o: OrderingParameters) -> KineticCoefficients:
    a, b = o.alpha, o.beta
    return KineticCoefficients((1 + b) / 2, a * (a + b + 1) + b + 1)


def _exact_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def solve_parameters_from_coefficients(c_lap, c_grad) -> list[OrderingParameters]:
    """All real orderings whose kinetic coefficients equal ``(c_lap, c_grad)``.

    beta is fixed by ``c_lap``; alpha solves
    ``alpha^2 + (beta + 1) alpha + (beta + 1 - c_grad) = 0``.  A double root
    yields a single ordering.  Rational inputs with a rational discriminant
    root are solved exactly.
    """
    cl, cg = _num(c_lap), _num(c_grad)
    beta = 2 * cl - 1
    p = beta + 1
    disc = p * p - 4 * (p - cg)
    if isinstance(disc, float) and abs(disc) < 1e-14:
        disc = 0.0
    if disc < 0:
        raise NoRealOrderingError(
            f"no real ordering for c_lap={c_lap}, c_grad={c_grad} (discriminant {disc})"
        )
    root = _exact_sqrt(disc) if isinstance(disc, Fraction) else None
    if root is None:
        root = math.sqrt(disc)
        p, beta = float(p), float(beta)
    if root == 0:
        alphas = [-p / 2]
    else:
        alphas = [(-p + root) / 2, (-p - root) / 2]
    return [make_ordering(a, beta) for a in alphas]


def _coeffs_float(o: OrderingParameters):
    k = kinetic_coefficients(o)
    return float(k.c_lap), float(k.c_grad)


def effective_potential_1d(o: OrderingParameters, m: MassProfile, V: PotentialProfile, x):
    """``c_lap m''/m^2 - c_grad m'^2/m^3 + V`` at ``x``."""
    c_lap, c_grad = _coeffs_float(o)
    mv, m1, m2 = m.derivatives(x)
    return c_lap * m2 / mv**2 - c_grad * m1**2 / mv**3 + V(x)


def effective_potential_radial(
    o: OrderingParameters,
    m: MassProfile,
    V: PotentialProfile,
    r,
    d: int,
    laplacian_mode: str = "literal_radial",
):
    """Radial effective potential in ``d`` dimensions.

    ``literal_radial`` uses ``m''`` as-is.  ``full_laplacian`` replaces it by
    the radial Laplacian ``m'' + (d-1) m'/r``.
    """
    if laplacian_mode not in LAPLACIAN_MODES:
        raise ValueError(f"laplacian_mode must be one of {LAPLACIAN_MODES}, got {laplacian_mode!r}")
    if d < 1:
        raise ValueError("dimension d must be >= 1")
    r = np.asarray(r, dtype=float) if np.ndim(r) else float(r)
    if np.any(np.asarray(r) <= 0):
        raise ValueError("radial effective potential needs r > 0")
    c_lap, c_grad = _coeffs_float(o)
    mv, m1, m2 = m.derivatives(r)
    lap = m2 if laplacian_mode == "literal_radial" else m2 + (d - 1) * m1 / r
    return c_lap * lap / mv**2 - c_grad * m1**2 / mv**3 + V(r)


@dataclass
class OrderingTable:
    """Effective potentials per ordering on a common grid.

    ``values[name]`` holds Vtilde for that ordering; ``differences[(a, b)]``
    holds ``values[a] - values[b]`` for every ordered pair a before b.
    """

    grid: np.ndarray
    potential: np.ndarray
    values: dict[str, np.ndarray]
    differences: dict[tuple[str, str], np.ndarray]

    def header(self) -> list[str]:
        cols = ["r", "V"]
        if len(self.values) == 1:
            cols.append("Vtilde")
        else:
            cols += [f"Vtilde_{n}" for n in self.values]
            cols += [f"diff_{a}_{b}" for a, b in self.differences]
        return cols

    def rows(self):
        cols = [self.grid, self.potential, *self.values.values(), *self.differences.values()]
        return np.column_stack(cols)


def compare_orderings(orderings, m: MassProfile, V: PotentialProfile, grid) -> OrderingTable:
    if not orderings:
        raise ValueError("compare_orderings needs at least one ordering")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("compare_orderings needs a non-empty grid")
    values: dict[str, np.ndarray] = {}
    for i, o in enumerate(orderings):
        name = o.name or f"ordering{i}"
        values[name] = np.asarray(effective_potential_1d(o, m, V, grid), dtype=float)
    names = list(values)
    diffs = {
        (a, b): values[a] - values[b]
        for i, a in enumerate(names)
        for b in names[i + 1:]
    }
    return OrderingTable(grid, np.asarray(V(grid), dtype=float), values, diffs)
