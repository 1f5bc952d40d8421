"""Discrete pseudo-momentum, kinetic and factorized PDM operators on uniform grids.

The pseudo-momentum operator is ``Pi = -i (F d/dx + F'/2)`` with
``F = 1/sqrt(m)``.  First derivatives of grid functions use second-order
central differences with second-order one-sided stencils at the endpoints.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ordering import MM, OrderingParameters, kinetic_coefficients
from .profiles import MassProfile, PotentialProfile

__all__ = [
    "GridFunction",
    "ScalingPair",
    "GridMismatchError",
    "uniform_grid",
    "d1",
    "d2",
    "scaling_pair",
    "apply_pi",
    "apply_pi_squared",
    "apply_von_roos_kinetic",
    "apply_factorized",
    "inner",
    "hermiticity_defect",
    "observed_order",
    "verification_report",
    "VerificationRow",
    "PI_SCHEMES",
]

PI_SCHEMES = ("symmetric", "direct")


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GridFunction:
    """Samples ``values`` on grid points ``x``.

    The operators in this module need a uniform grid; radial eigenfunctions
    may live on a non-uniform one.
    """

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)
        if x.ndim != 1 or x.size < 5:
            raise ValueError("grid needs at least 5 points")
        if v.shape != x.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {x.shape}")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")

    @property
    def uniform(self) -> bool:
        dx = np.diff(self.x)
        return bool(np.allclose(dx, dx[0], rtol=1e-9, atol=0))

    @property
    def h(self) -> float:
        if not self.uniform:
            raise ValueError("grid is not uniform")
        return float((self.x[-1] - self.x[0]) / (self.x.size - 1))

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self).real))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.x, values)

    @classmethod
    def sample(cls, fn: Callable, x) -> "GridFunction":
        x = np.asarray(x, dtype=float)
        return cls(x, np.asarray(fn(x)))


def uniform_grid(a: float, b: float, n: int) -> np.ndarray:
    return np.linspace(a, b, n)


def d1(f: np.ndarray, h: float) -> np.ndarray:
    """Second-order first derivative (central inside, one-sided at the ends)."""
    return np.gradient(f, h, edge_order=2)


def d2(f: np.ndarray, h: float) -> np.ndarray:
    """Second-order second derivative (central inside, 4-point one-sided at the ends)."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return out


@dataclass(frozen=True)
class ScalingPair:
    """``F = 1/sqrt(m)`` and ``G = F'/2`` sampled on ``x`` (positive branch)."""

    x: np.ndarray
    F: np.ndarray
    G: np.ndarray


def scaling_pair(m: MassProfile, grid) -> ScalingPair:
    x = np.asarray(grid, dtype=float)
    mv, m1 = m(x), m.d1(x)
    if np.any(mv <= 0):
        raise ValueError("scaling pair needs a positive mass")
    F = mv**-0.5
    dF = -m1 / (2 * mv**1.5)
    return ScalingPair(x, F, dF / 2)


def _check_same_grid(x, psi: GridFunction):
    if x.shape != psi.x.shape or not np.array_equal(x, psi.x):
        raise GridMismatchError("operator coefficients and grid function live on different grids")


def apply_pi(sp: ScalingPair, psi: GridFunction, scheme: str = "symmetric") -> GridFunction:
    """Apply ``Pi`` to ``psi``.

    ``direct`` evaluates ``-i (F psi' + G psi)`` term by term.  ``symmetric``
    evaluates the algebraically equal ``-(i/2) (F psi' + (F psi)')``; with a
    skew-symmetric central difference it stays Hermitian on the grid, while
    ``direct`` is Hermitian only up to O(h^2).
    """
    _check_same_grid(sp.x, psi)
    h = psi.h
    v = psi.values
    if scheme == "direct":
        out = -1j * (sp.F * d1(v, h) + sp.G * v)
    elif scheme == "symmetric":
        out = -0.5j * (sp.F * d1(v, h) + d1(sp.F * v, h))
    else:
        raise ValueError(f"scheme must be one of {PI_SCHEMES}")
    return psi.with_values(out)


def _mass_on(m: MassProfile, psi: GridFunction):
    return m.derivatives(psi.x)


def apply_pi_squared(m: MassProfile, psi: GridFunction) -> GridFunction:
    """Closed form of ``Pi^2`` built from F and its derivatives.

    ``Pi^2 psi = -[F^2 psi'' + 2 F F' psi' + (F F''/2 + F'^2/4) psi]``.
    """
    h = psi.h
    mv, m1, m2 = _mass_on(m, psi)
    F = mv**-0.5
    dF = -m1 / (2 * mv**1.5)
    ddF = -m2 / (2 * mv**1.5) + 0.75 * m1**2 / mv**2.5
    v = psi.values
    out = -(F**2 * d2(v, h) + 2 * F * dF * d1(v, h) + (0.5 * F * ddF + 0.25 * dF**2) * v)
    return psi.with_values(out)


def apply_von_roos_kinetic(o: OrderingParameters, m: MassProfile, psi: GridFunction) -> GridFunction:
    """``-(1/m) psi'' + (m'/m^2) psi' + (c_lap m''/m^2 - c_grad m'^2/m^3) psi``."""
    h = psi.h
    k = kinetic_coefficients(o)
    c_lap, c_grad = float(k.c_lap), float(k.c_grad)
    mv, m1, m2 = _mass_on(m, psi)
    v = psi.values
    out = -d2(v, h) / mv + (m1 / mv**2) * d1(v, h) + (c_lap * m2 / mv**2 - c_grad * m1**2 / mv**3) * v
    return psi.with_values(out)


def apply_factorized(m: MassProfile, V: PotentialProfile | None, psi: GridFunction) -> GridFunction:
    """``-m^(-1/4) d[ m^(-1/2) d( m^(-1/4) psi ) ] + V psi`` by nested differences."""
    h = psi.h
    mv = m(psi.x)
    q = mv**-0.25
    inner_d = d1(q * psi.values, h)
    out = -q * d1(mv**-0.5 * inner_d, h)
    if V is not None:
        out = out + V(psi.x) * psi.values
    return psi.with_values(out)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def inner(f: GridFunction, g: GridFunction) -> complex:
    """Trapezoid-rule ``<f, g> = sum w conj(f) g``."""
    if not np.array_equal(f.x, g.x):
        raise GridMismatchError("inner product of functions on different grids")
    return complex(np.sum(_trapezoid_weights(f.x) * np.conj(f.values) * g.values))


def hermiticity_defect(
    sp: ScalingPair,
    phi: GridFunction,
    psi: GridFunction,
    scheme: str = "symmetric",
    relative: bool = False,
) -> float:
    """``|<Pi phi, psi> - <phi, Pi psi>|``, optionally divided by ``|phi| |psi|``.

    Warns when either function is not negligible at the grid ends, since the
    boundary term then spoils the comparison.
    """
    for f in (phi, psi):
        amp = np.max(np.abs(f.values))
        edge = max(abs(f.values[0]), abs(f.values[-1]))
        if amp > 0 and edge > 1e-8 * amp:
            warnings.warn(
                "grid function does not vanish at the boundary; "
                "Hermiticity defect includes a boundary term",
                RuntimeWarning,
                stacklevel=2,
            )
            break
    lhs = inner(apply_pi(sp, phi, scheme), psi)
    rhs = inner(phi, apply_pi(sp, psi, scheme))
    defect = abs(lhs - rhs)
    if relative:
        defect /= phi.norm() * psi.norm()
    return float(defect)


def observed_order(residuals, hs) -> np.ndarray:
    """Pairwise convergence orders ``log(e_i/e_{i+1}) / log(h_i/h_{i+1})``."""
    e = np.asarray(residuals, dtype=float)
    h = np.asarray(hs, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


@dataclass(frozen=True)
class VerificationRow:
    test_name: str
    grid_n: int
    residual_inf: float
    observed_order: float
    passed: bool


def _interior(a: np.ndarray, k: int = 2) -> np.ndarray:
    return a[k:-k]


def verification_report(
    m: MassProfile,
    V: PotentialProfile | None,
    interval: tuple[float, float],
    base_n: int = 500,
    levels: int = 4,
    psi: Callable | None = None,
) -> list[VerificationRow]:
    """Operator consistency checks under grid refinement.

    Grid sizes are ``base_n * 2**k``.  Residuals are max-norms over interior
    points (two dropped at each end), relative to the max of the reference
    operator output.  Rows:

    * ``pi_squared_vs_von_roos_mm``: identical operator, must agree to 1e-12.
    * ``factorized_vs_pi_squared``: nested differences vs closed form, O(h^2).
    * ``pi_twice_vs_pi_squared``: two applications of Pi vs closed form, O(h^2).
    * ``hermiticity_direct``: defect of the term-by-term stencil, O(h^2).
    * ``hermiticity_symmetric``: defect of the symmetric stencil, roundoff.
    """
    a, b = interval
    if psi is None:
        c, w = 0.5 * (a + b), (b - a) / 10
        psi = lambda x: np.exp(-(((x - c) / w) ** 2))  # noqa: E731
        c2 = c + 0.3 * w
        phi = lambda x: np.exp(-(((x - c2) / (0.8 * w)) ** 2)) * np.exp(1j * x / w)  # noqa: E731
    else:
        phi = psi
    sizes = [base_n * 2**k for k in range(levels)]
    hs = [(b - a) / (n - 1) for n in sizes]
    res: dict[str, list[float]] = {k: [] for k in (
        "pi_squared_vs_von_roos_mm", "factorized_vs_pi_squared",
        "pi_twice_vs_pi_squared", "hermiticity_direct", "hermiticity_symmetric")}
    for n in sizes:
        x = uniform_grid(a, b, n)
        g = GridFunction.sample(psi, x)
        f = GridFunction.sample(phi, x)
        sp = scaling_pair(m, x)
        p2 = apply_pi_squared(m, g).values
        scale = np.max(np.abs(_interior(p2)))
        vr = apply_von_roos_kinetic(MM, m, g).values
        res["pi_squared_vs_von_roos_mm"].append(np.max(np.abs(vr - p2)) / np.max(np.abs(p2)))
        fac = apply_factorized(m, V, g).values
        ref = p2 + (V(x) * g.values if V is not None else 0)
        res["factorized_vs_pi_squared"].append(
            np.max(np.abs(_interior(fac - ref))) / np.max(np.abs(_interior(ref))))
        twice = apply_pi(sp, apply_pi(sp, g, "direct"), "direct").values
        res["pi_twice_vs_pi_squared"].append(np.max(np.abs(_interior(twice - p2))) / scale)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res["hermiticity_direct"].append(hermiticity_defect(sp, f, g, "direct", relative=True))
            res["hermiticity_symmetric"].append(hermiticity_defect(sp, f, g, "symmetric", relative=True))

    rows: list[VerificationRow] = []
    refined = ("factorized_vs_pi_squared", "pi_twice_vs_pi_squared", "hermiticity_direct")
    for name, errs in res.items():
        orders = np.concatenate([[np.nan], observed_order(errs, hs)])
        if name not in refined:
            orders[:] = np.nan
        for i, n in enumerate(sizes):
            if name == "pi_squared_vs_von_roos_mm":
                ok = errs[i] <= 1e-12
            elif name == "hermiticity_symmetric":
                ok = errs[i] <= 1e-8
            else:
                # refinement rows: only the final pair's order is judged
                ok = i < len(sizes) - 1 or abs(orders[i] - 2.0) <= 0.3
            rows.append(VerificationRow(name, n, float(errs[i]), float(orders[i]), bool(ok)))
    return rows
