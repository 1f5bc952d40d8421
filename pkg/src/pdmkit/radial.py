"""Bound states of the d-dimensional radial PDM Schroedinger equation.

The radial equation (hbar = 2 m0 = 1) reads

    R'' - l_d(l_d+1)/r^2 R + (m'/m) ((d-1)/(2r) R - R') - m (Vt - E) R = 0

with ``l_d = l + (d-3)/2`` and Vt the ordering-dependent effective
potential.  Two independent solvers are provided:

* ``solve_shooting`` integrates the equation in r with RK4 on a graded mesh
  and brackets eigenvalues by node counting;
* ``solve_fd_z`` discretizes the equivalent constant-mass problem in the
  PCT coordinate Z and bisects Sturm sequences of the tridiagonal matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np
from numba import njit

from .ordering import MM, LAPLACIAN_MODES, OrderingParameters, kinetic_coefficients
from .pct import PCTMapping, build_mapping, power_law_params, wavefunction_pullback
from .pdm_operator import GridFunction
from .profiles import MassProfile, PotentialProfile
from .spectrum import Level, Spectrum
from .tridiag import eigenvalue_bisect, eigenvector, gershgorin_bounds, sturm_count

__all__ = [
    "RadialProblem",
    "l_d",
    "z_potential",
    "solve_shooting",
    "solve_fd_z",
    "eigenfunction",
    "suggest_r_max",
    "cross_validate",
    "node_count",
    "LevelNotFoundError",
]

log = logging.getLogger(__name__)

# fewer Z-grid points than this per local wavelength marks a level unreliable
MIN_POINTS_PER_WAVELENGTH = 20


class LevelNotFoundError(LookupError):
    pass


def l_d(ell: int, d: int, parity: str | None = None) -> Fraction:
    """Dimension-shifted angular momentum ``l + (d-3)/2``.

    For ``d = 1`` the value encodes parity: -1 for even, 0 for odd states.
    """
    if d <= 0:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if d == 1:
        if parity not in ("even", "odd"):
            raise ValueError("d = 1 needs parity 'even' or 'odd'")
        return Fraction(-1) if parity == "even" else Fraction(0)
    if ell < 0:
        raise ValueError(f"angular momentum must be >= 0, got {ell}")
    return Fraction(2 * ell + d - 3, 2)


@dataclass(frozen=True)
class RadialProblem:
    d: int
    mass: MassProfile
    potential: PotentialProfile
    ell: int = 0
    parity: str | None = None
    ordering: OrderingParameters = MM
    r_min: float = 1e-6
    r_max: float | None = None
    grid_n: int = 2000
    laplacian_mode: str = "literal_radial"

    def __post_init__(self):
        l_d(self.ell, self.d, self.parity)
        if not self.r_min > 0:
            raise ValueError("r_min must be > 0")
        if self.r_max is not None and not self.r_max > self.r_min:
            raise ValueError("r_max must exceed r_min")
        if self.grid_n < 50:
            raise ValueError("grid_n must be >= 50")
        if self.laplacian_mode not in LAPLACIAN_MODES:
            raise ValueError(f"laplacian_mode must be one of {LAPLACIAN_MODES}")

    @property
    def ell_d(self) -> Fraction:
        return l_d(self.ell, self.d, self.parity)

    @property
    def neumann(self) -> bool:
        """Even states in d = 1 need R'(0) = 0 instead of R(0) = 0."""
        return self.d == 1 and self.parity == "even"

    def with_r_max(self, n_max: int) -> "RadialProblem":
        if self.r_max is not None:
            return self
        return replace(self, r_max=suggest_r_max(self, n_max))


def _mass_terms(p: RadialProblem, r):
    mv, m1, m2 = p.mass.derivatives(r)
    lap = m2 if p.laplacian_mode == "literal_radial" else m2 + (p.d - 1) * m1 / r
    return mv, m1, m2, lap


def z_potential(p: RadialProblem, r):
    """Potential of the constant-mass equation in Z, as a function of r.

    ``l_d(l_d+1)/(r^2 m) + V - U_d`` plus whatever part of the ordering's
    mass terms the transformation does not absorb (zero for the mm ordering
    with the literal radial Laplacian).
    """
    r = np.asarray(r, dtype=float)
    ld = float(p.ell_d)
    k = kinetic_coefficients(p.ordering)
    c_lap, c_grad = float(k.c_lap), float(k.c_grad)
    pl = power_law_params(p.mass)
    if pl is not None:
        # all mass terms scale as r^-(u+2); summing coefficients first avoids
        # cancelling huge numbers near the origin
        s, u = pl
        lap_c = u * (u - 1) + (0.0 if p.laplacian_mode == "literal_radial" else (p.d - 1) * u)
        coef = (ld * (ld + 1) - u * (p.d - 1) / 2
                + c_lap * lap_c - 0.25 * u * (u - 1) - (c_grad - 0.4375) * u * u)
        return coef / (s * np.power(r, u + 2)) + p.potential(r)
    mv, m1, m2, lap = _mass_terms(p, r)
    residual = (c_lap * lap - 0.25 * m2) / mv**2 - (c_grad - 0.4375) * m1**2 / mv**3
    ud = m1 * (p.d - 1) / (2 * r * mv**2)
    return ld * (ld + 1) / (r * r * mv) + p.potential(r) - ud + residual


def _shooting_coefficients(p: RadialProblem, r):
    """``R'' = (A - M E) R + B R'`` coefficient arrays."""
    ld = float(p.ell_d)
    mv, m1, m2, lap = _mass_terms(p, r)
    k = kinetic_coefficients(p.ordering)
    vt = float(k.c_lap) * lap / mv**2 - float(k.c_grad) * m1**2 / mv**3 + p.potential(r)
    B = m1 / mv
    A = ld * (ld + 1) / (r * r) + mv * vt - B * (p.d - 1) / (2 * r)
    return A, B, mv


# ---------------------------------------------------------------- shooting


def _shooting_mesh(r_min: float, r_max: float, grid_n: int) -> np.ndarray:
    """Quarter-point mesh: coarse nodes graded geometrically near the origin.

    Fine RK4 steps use every other point as nodes and the points between as
    midpoints; coarse steps (twice as long) use every fourth.
    """
    q = 20.0 / grid_n  # fine step / r in the geometric part
    h_max = (r_max - r_min) / grid_n
    r_switch = min(max(h_max / q, r_min), r_max)
    coarse = [np.array([r_min])]
    if r_switch > r_min:
        n_geo = max(1, math.ceil(math.log(r_switch / r_min) / math.log1p(2 * q)))
        coarse.append(np.geomspace(r_min, r_switch, n_geo + 1)[1:])
    if r_max > r_switch:
        n_uni = max(1, math.ceil((r_max - r_switch) / (2 * h_max)))
        coarse.append(np.linspace(r_switch, r_max, n_uni + 1)[1:])
    c = np.concatenate(coarse)
    frac = np.arange(4) / 4
    s = (c[:-1, None] + np.diff(c)[:, None] * frac).ravel()
    return np.append(s, c[-1])


@njit(cache=True)
def _shoot(s, A, B, M, stride, E, y0, dy0):
    """RK4 over nodes ``s[::2*stride]``; returns (sign changes, y_end, dy_end)."""
    y = y0
    dy = dy0
    nodes = 0
    last = 1.0 if y0 > 0 else (-1.0 if y0 < 0 else (1.0 if dy0 >= 0 else -1.0))
    step = 2 * stride
    n = s.shape[0]
    i = 0
    while i + step < n:
        h = s[i + step] - s[i]
        j = i + stride
        k = i + step
        a0 = A[i] - M[i] * E
        a1 = A[j] - M[j] * E
        a2 = A[k] - M[k] * E
        k1y = dy
        k1d = a0 * y + B[i] * dy
        y2 = y + 0.5 * h * k1y
        d2 = dy + 0.5 * h * k1d
        k2y = d2
        k2d = a1 * y2 + B[j] * d2
        y3 = y + 0.5 * h * k2y
        d3 = dy + 0.5 * h * k2d
        k3y = d3
        k3d = a1 * y3 + B[j] * d3
        y4 = y + h * k3y
        d4 = dy + h * k3d
        k4y = d4
        k4d = a2 * y4 + B[k] * d4
        y = y + h * (k1y + 2 * k2y + 2 * k3y + k4y) / 6
        dy = dy + h * (k1d + 2 * k2d + 2 * k3d + k4d) / 6
        if y != 0.0:
            sgn = 1.0 if y > 0 else -1.0
            if sgn != last:
                nodes += 1
                last = sgn
        big = max(abs(y), abs(dy))
        if big > 1e100:
            y *= 1e-100
            dy *= 1e-100
        i = k
    return nodes, y, dy


class _Shooter:
    def __init__(self, p: RadialProblem):
        self.p = p
        self.s = _shooting_mesh(p.r_min, p.r_max, p.grid_n)
        self.A, self.B, self.M = _shooting_coefficients(p, self.s)
        self.y0, self.dy0 = (1.0, 0.0) if p.neumann else (0.0, 1.0)

    def count(self, E: float, stride: int = 1) -> int:
        n, _, _ = _shoot(self.s, self.A, self.B, self.M, stride, float(E), self.y0, self.dy0)
        return int(n)

    def bisect(self, k: int, lo: float, hi: float, tol: float, stride: int = 1):
        # invariant: count(lo) <= k < count(hi)
        while hi - lo > max(tol, 4e-16 * max(abs(lo), abs(hi))):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if self.count(mid, stride) > k:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi), hi - lo


def _window(p: RadialProblem, r_samples) -> tuple[float, float]:
    """Bound states sit between min of the Z-form potential and its value at r_max."""
    w = z_potential(p, r_samples)
    return float(np.min(w)), float(z_potential(p, np.array([p.r_max]))[0])


def _reliable(p: RadialProblem, energy: float, r, dz) -> bool:
    w = z_potential(p, r)
    k = np.sqrt(np.maximum(energy - w, 0.0))
    kmax = float(np.max(k * dz))
    return kmax == 0 or 2 * math.pi / kmax >= MIN_POINTS_PER_WAVELENGTH


def solve_shooting(p: RadialProblem, n_max: int = 4, tol: float = 1e-12) -> Spectrum:
    """Levels ``n_r = 0..n_max`` by RK4 shooting from ``r_min`` to ``r_max``.

    Starts from ``R = 0, R' = 1`` (``R = 1, R' = 0`` for even d = 1 states).
    ``est_error`` compares against a shoot with doubled steps (RK4: /15).
    """
    p = p.with_r_max(n_max)
    sh = _Shooter(p)
    nodes_r = sh.s[::2]
    e_lo, e_top = _window(p, nodes_r)
    available = sh.count(e_top) if e_top > e_lo else 0
    levels: list[Level] = []
    missing: list[str] = []
    lo = e_lo
    dz = np.sqrt(sh.M[::2][:-1]) * np.diff(nodes_r)
    for k in range(n_max + 1):
        if k >= available:
            missing.append(
                f"shooting: no level n_r={k} below E={e_top:.6g} "
                f"(node count {available} at top of window [{e_lo:.6g}, {e_top:.6g}])"
            )
            continue
        e, width = sh.bisect(k, lo, e_top, tol)
        if sh.count(e_top, stride=2) > k:
            e_coarse, _ = sh.bisect(k, e_lo, e_top, tol, stride=2)
        else:
            e_coarse = math.nan
        est = abs(e - e_coarse) / 15 + width
        levels.append(Level(k, e, k, est, _reliable(p, e, nodes_r[:-1], dz)))
        lo = e - 2 * width
    for msg in missing:
        log.info(msg)
    return Spectrum(levels, "shooting", missing)


# ------------------------------------------------------- finite differences


@dataclass(frozen=True)
class _ZSystem:
    z: np.ndarray
    r: np.ndarray
    h: float
    diag: np.ndarray
    off: np.ndarray
    mapping: PCTMapping


def _z_system(p: RadialProblem, n: int) -> _ZSystem:
    mapping = build_mapping(p.mass, (p.r_min, p.r_max))
    z0, z1 = mapping.z_domain
    if p.neumann:
        # cell-centred: ghost point mirrors phi_0, Dirichlet lands on z1
        h = (z1 - z0) / (n + 0.5)
        z = z0 + (np.arange(n) + 0.5) * h
    else:
        h = (z1 - z0) / (n + 1)
        z = z0 + np.arange(1, n + 1) * h
    r = mapping.inverse(z)
    diag = 2.0 / h**2 + z_potential(p, r)
    if p.neumann:
        diag[0] -= 1.0 / h**2
    off = np.full(n - 1, -1.0 / h**2)
    return _ZSystem(z, r, h, diag, off, mapping)


def _fd_levels(sys: _ZSystem, e_top: float, n_max: int, tol: float):
    lo, hi = gershgorin_bounds(sys.diag, sys.off)
    top = min(e_top, hi)
    available = sturm_count(sys.diag, sys.off, top)
    out = []
    for k in range(min(available, n_max + 1)):
        start = out[-1][0] - tol if out else lo
        out.append(eigenvalue_bisect(sys.diag, sys.off, k, start, top, tol))
    return out, available


def solve_fd_z(p: RadialProblem, n_max: int = 4, tol: float = 1e-12) -> Spectrum:
    """Levels ``n_r = 0..n_max`` from the tridiagonal FD operator in Z.

    ``est_error`` is the Richardson estimate ``|E_N - E_{N/2}| / 3``.
    """
    p = p.with_r_max(n_max)
    sys = _z_system(p, p.grid_n)
    e_top = float(z_potential(p, np.array([p.r_max]))[0])
    found, available = _fd_levels(sys, e_top, n_max, tol)
    coarse, _ = _fd_levels(_z_system(p, p.grid_n // 2), e_top, n_max, tol)
    levels = []
    for k, (e, width) in enumerate(found):
        est = abs(e - coarse[k][0]) / 3 if k < len(coarse) else math.nan
        reliable = _reliable(p, e, sys.r, sys.h)
        levels.append(Level(k, e, k, est + width, reliable))
    missing = [
        f"fd_z: no level n_r={k} below E={e_top:.6g} ({available} eigenvalues in window)"
        for k in range(len(found), n_max + 1)
    ]
    for msg in missing:
        log.info(msg)
    return Spectrum(levels, "fd_z", missing)


def _count_nodes(values: np.ndarray, rel_floor: float = 1e-8) -> int:
    v = values[np.abs(values) > rel_floor * np.max(np.abs(values))]
    return int(np.count_nonzero(np.sign(v[1:]) != np.sign(v[:-1])))


def eigenfunction(p: RadialProblem, n_r: int, tol: float = 1e-12) -> GridFunction:
    """Normalized ``R_{n_r}(r)`` on the FD nodes mapped back to r.

    ``R = m^(1/4) phi(Z)`` with ``int |R|^2 dr = 1`` (trapezoid in r).
    """
    p = p.with_r_max(n_r)
    sys = _z_system(p, p.grid_n)
    e_top = float(z_potential(p, np.array([p.r_max]))[0])
    found, _ = _fd_levels(sys, e_top, n_r, tol)
    if len(found) <= n_r:
        raise LevelNotFoundError(f"level n_r={n_r} not found below E={e_top:.6g}")
    phi = eigenvector(sys.diag, sys.off, found[n_r][0])
    # fix the overall sign: positive just off the origin
    first = phi[np.argmax(np.abs(phi) > 1e-3 * np.max(np.abs(phi)))]
    phi = phi * np.sign(first)
    R = wavefunction_pullback(sys.mapping, p.mass, GridFunction(sys.z, phi))
    norm = math.sqrt(np.trapezoid(R.values**2, R.x))
    return GridFunction(R.x, R.values / norm)


def node_count(R: GridFunction) -> int:
    """Interior sign changes, ignoring the numerically negligible tails."""
    return _count_nodes(np.asarray(R.values, dtype=float))


# ------------------------------------------------------------- utilities


def suggest_r_max(p: RadialProblem, n_max: int, start: float = 5.0, growth: float = 1.5,
                  decay: float = 20.0, max_iter: int = 40) -> float:
    """Smallest tried ``r_max`` whose top level decays by ``e^-decay`` past its turning point.

    Candidates grow (or shrink, when ``start`` already suffices) by
    ``growth`` and each is checked with a coarse FD solve.  For potentials
    whose window closes (no bound states), the last candidate is returned.
    """
    coarse_n = max(200, min(p.grid_n, 600))
    floor = 10 * p.r_min

    def deep_enough(r_max):
        trial = replace(p, r_max=r_max, grid_n=coarse_n)
        try:
            sys = _z_system(trial, coarse_n)
        except ValueError:
            return None
        e_top = float(z_potential(trial, np.array([r_max]))[0])
        found, _ = _fd_levels(sys, e_top, n_max, 1e-8)
        if len(found) < n_max + 1:
            return False
        e = found[-1][0]
        w = sys.diag - 2.0 / sys.h**2
        # integrate sqrt(W - E) outwards from the last classically allowed point
        allowed = np.nonzero(w <= e)[0]
        if not allowed.size:
            return False
        tail = w[allowed[-1]:] - e
        return float(np.sum(np.sqrt(np.maximum(tail, 0))) * sys.h) >= decay

    r_max = max(start, floor)
    ok = deep_enough(r_max)
    if ok:
        for _ in range(max_iter):
            smaller = r_max / growth
            if smaller <= floor or not deep_enough(smaller):
                break
            r_max = smaller
        return float(r_max)
    for _ in range(max_iter):
        if ok is None:
            break
        r_max *= growth
        ok = deep_enough(r_max)
        if ok:
            return float(r_max)
    log.info("suggest_r_max: using r_max=%.6g without meeting the decay target", r_max)
    return float(r_max)


def cross_validate(p: RadialProblem, n_max: int = 4, tol: float = 1e-12):
    """Both spectra and the largest relative deviation over common levels."""
    p = p.with_r_max(n_max)
    fd = solve_fd_z(p, n_max, tol)
    sh = solve_shooting(p, n_max, tol)
    common = min(len(fd), len(sh))
    if common == 0:
        return fd, sh, math.nan
    a, b = fd.energies[:common], sh.energies[:common]
    dev = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
    return fd, sh, dev
