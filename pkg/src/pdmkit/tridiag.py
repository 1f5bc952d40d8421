"""Symmetric tridiagonal eigenvalues by Sturm-sequence bisection."""

from __future__ import annotations

import numpy as np
from numba import njit
from scipy.linalg import solve_banded

__all__ = ["sturm_count", "gershgorin_bounds", "eigenvalue_bisect", "eigenvalues_below", "eigenvector"]


@njit(cache=True)
def _sturm_count(diag, off_sq, x):
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if q < 0.0:
        count += 1
    for i in range(1, n):
        if q == 0.0:
            q = 1e-300
        q = diag[i] - x - off_sq[i - 1] / q
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _bisect(diag, off_sq, k, lo, hi, abs_tol):
    # invariant: count(lo) <= k < count(hi)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        width = hi - lo
        if width <= abs_tol or width <= 4e-16 * max(abs(lo), abs(hi)) or mid == lo or mid == hi:
            break
        if _sturm_count(diag, off_sq, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), hi - lo


def sturm_count(diag, off, x: float) -> int:
    """Number of eigenvalues strictly below ``x``."""
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    return int(_sturm_count(diag, np.ascontiguousarray(off * off), float(x)))


def gershgorin_bounds(diag, off) -> tuple[float, float]:
    diag = np.asarray(diag, dtype=float)
    a = np.abs(np.asarray(off, dtype=float))
    rad = np.zeros_like(diag)
    rad[:-1] += a
    rad[1:] += a
    return float(np.min(diag - rad)), float(np.max(diag + rad))


def eigenvalue_bisect(diag, off, k: int, lo: float, hi: float, abs_tol: float = 1e-12):
    """The ``k``-th (0-based) eigenvalue inside ``[lo, hi]``; returns ``(value, bracket width)``."""
    diag = np.ascontiguousarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    value, width = _bisect(diag, np.ascontiguousarray(off * off), int(k), float(lo), float(hi), float(abs_tol))
    return float(value), float(width)


def eigenvalues_below(diag, off, upper: float, k_max: int, abs_tol: float = 1e-12):
    """Eigenvalues below ``upper``, at most ``k_max`` of them, ascending."""
    lo, hi = gershgorin_bounds(diag, off)
    upper = min(float(upper), hi)
    n_below = sturm_count(diag, off, upper)
    out = []
    for k in range(min(n_below, k_max)):
        lo_k = out[-1][0] if out else lo
        out.append(eigenvalue_bisect(diag, off, k, lo_k - abs_tol, upper, abs_tol))
    return out


def eigenvector(diag, off, value: float, iterations: int = 3) -> np.ndarray:
    """Unit eigenvector for an isolated eigenvalue by shifted inverse iteration."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    n = diag.size
    shift = value + 1e-10 * max(1.0, abs(value))
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag - shift
    ab[2, :-1] = off
    v = np.ones(n) / np.sqrt(n)
    for _ in range(iterations):
        v = solve_banded((1, 1), ab, v)
        v /= np.linalg.norm(v)
    return v
