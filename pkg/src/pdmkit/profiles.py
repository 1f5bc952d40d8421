"""Mass and potential profiles with first and second derivatives.

A profile is an immutable scalar field on an open interval.  Built-in
families carry closed-form derivatives; parsed expressions fall back to
Richardson-extrapolated central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .expr import Expression, ExpressionEvalError, parse_expression

__all__ = [
    "DomainError",
    "Profile",
    "MassProfile",
    "PotentialProfile",
    "ValidationReport",
    "make_power_law",
    "make_constant",
    "make_exponential",
    "make_rational",
    "make_profile",
    "parse_profile",
    "validate_profile",
    "richardson_d1",
    "richardson_d2",
]

FULL_LINE = (-math.inf, math.inf)
HALF_LINE = (0.0, math.inf)

# base steps for numeric derivatives; see richardson_d2 for why d2 differs
D1_STEP = 1e-5
D2_STEP = 1e-3


class DomainError(ValueError):
    """Evaluation point outside the open domain of a profile."""


def _step(r, base, lo, hi):
    h = np.maximum(base, base * np.abs(r))
    # keep the stencil inside the open domain
    if math.isfinite(lo):
        h = np.minimum(h, 0.25 * (r - lo))
    if math.isfinite(hi):
        h = np.minimum(h, 0.25 * (hi - r))
    return h


def richardson_d1(f: Callable, r, domain=FULL_LINE):
    """Central difference with one Richardson level, O(h^4)."""
    r = np.asarray(r, dtype=float)
    h = _step(r, D1_STEP, *domain)
    d_h = (f(r + h) - f(r - h)) / (2 * h)
    d_h2 = (f(r + h / 2) - f(r - h / 2)) / h
    return (4 * d_h2 - d_h) / 3


def richardson_d2(f: Callable, r, domain=FULL_LINE):
    """Second central difference with one Richardson level.

    The base step is 1e-3 rather than 1e-5: a 1e-5 step leaves roughly 1e-6
    relative roundoff in a second difference.
    """
    r = np.asarray(r, dtype=float)
    h = _step(r, D2_STEP, *domain)
    f0 = f(r)
    s_h = (f(r + h) - 2 * f0 + f(r - h)) / h**2
    s_h2 = (f(r + h / 2) - 2 * f0 + f(r - h / 2)) / (h / 2) ** 2
    return (4 * s_h2 - s_h) / 3


@dataclass(frozen=True)
class Profile:
    """Scalar field on the open interval ``domain``.

    ``value`` must accept numpy arrays.  ``d1``/``d2`` default to numeric
    differentiation of ``value``.
    """

    family: str
    params: Mapping[str, float]
    domain: tuple[float, float]
    value: Callable = field(repr=False)
    d1_fn: Callable | None = field(default=None, repr=False)
    d2_fn: Callable | None = field(default=None, repr=False)
    formula: str = ""

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        lo, hi = self.domain
        if np.any(~(r > lo)) or np.any(~(r < hi)):
            bad = r[~((r > lo) & (r < hi))] if r.ndim else r
            raise DomainError(
                f"{self.family} profile evaluated at {np.ravel(bad)[0]!r}, "
                f"outside open domain ({lo}, {hi})"
            )
        return r

    @staticmethod
    def _out(r, y):
        y = np.asarray(y, dtype=float)
        if np.ndim(r) == 0:
            return float(y)
        return np.broadcast_to(y, np.shape(r)).copy() if y.shape != np.shape(r) else y

    def __call__(self, r):
        r = self._check(r)
        return self._out(r, self.value(r))

    def d1(self, r):
        r = self._check(r)
        if self.d1_fn is not None:
            return self._out(r, self.d1_fn(r))
        return self._out(r, richardson_d1(self.value, r, self.domain))

    def d2(self, r):
        r = self._check(r)
        if self.d2_fn is not None:
            return self._out(r, self.d2_fn(r))
        return self._out(r, richardson_d2(self.value, r, self.domain))

    def derivatives(self, r):
        """Return ``(f, f', f'')`` at ``r``."""
        return self(r), self.d1(r), self.d2(r)

    def with_domain(self, lo: float, hi: float):
        return type(self)(self.family, self.params, (lo, hi), self.value,
                          self.d1_fn, self.d2_fn, self.formula)

    @property
    def is_constant(self) -> bool:
        return self.family == "constant" or (
            self.family == "power_law" and self.params.get("upsilon") == 0
        )


class MassProfile(Profile):
    """Dimensionless mass m(r); positivity is checked where it is evaluated."""

    def __call__(self, r):
        out = super().__call__(r)
        if np.any(np.asarray(out) <= 0):
            raise DomainError(f"non-positive mass in {self.family} profile")
        return out


class PotentialProfile(Profile):
    """Potential V(r); no sign constraint."""


def _kind(kind: str):
    if kind == "mass":
        return MassProfile
    if kind == "potential":
        return PotentialProfile
    raise ValueError(f"profile kind must be 'mass' or 'potential', got {kind!r}")


def make_power_law(sigma: float, upsilon: float, kind: str = "mass", domain=HALF_LINE):
    """``sigma * r**upsilon`` with closed-form derivatives.

    For a mass profile ``sigma`` must be positive.
    """
    cls = _kind(kind)
    if cls is MassProfile and not sigma > 0:
        raise ValueError(f"power-law mass needs sigma > 0, got {sigma}")
    s, u = float(sigma), float(upsilon)
    return cls(
        "power_law",
        {"sigma": s, "upsilon": u},
        tuple(domain),
        lambda r: s * np.power(r, u),
        lambda r: s * u * np.power(r, u - 1),
        lambda r: s * u * (u - 1) * np.power(r, u - 2),
        formula=f"{s!r}*r^({u!r})",
    )


def make_constant(value: float, kind: str = "mass", domain=FULL_LINE):
    cls = _kind(kind)
    if cls is MassProfile and not value > 0:
        raise ValueError(f"constant mass must be positive, got {value}")
    c = float(value)
    return cls(
        "constant",
        {"value": c},
        tuple(domain),
        lambda r: c + 0.0 * r,
        lambda r: 0.0 * r,
        lambda r: 0.0 * r,
        formula=repr(c),
    )


def make_exponential(scale: float, rate: float, kind: str = "mass", domain=FULL_LINE):
    """``scale * exp(rate * r)``."""
    cls = _kind(kind)
    if cls is MassProfile and not scale > 0:
        raise ValueError(f"exponential mass needs scale > 0, got {scale}")
    a, b = float(scale), float(rate)
    return cls(
        "exponential",
        {"scale": a, "rate": b},
        tuple(domain),
        lambda r: a * np.exp(b * r),
        lambda r: a * b * np.exp(b * r),
        lambda r: a * b * b * np.exp(b * r),
        formula=f"{a!r}*exp({b!r}*r)",
    )


def make_rational(scale: float, a: float, b: float, kind: str = "mass", domain=FULL_LINE):
    """``scale * (1 + a r^2) / (1 + b r^2)``."""
    cls = _kind(kind)
    if cls is MassProfile and not (scale > 0 and a >= 0 and b >= 0):
        raise ValueError("rational mass needs scale > 0 and a, b >= 0")
    c, a, b = float(scale), float(a), float(b)

    def f(r):
        return c * (1 + a * r * r) / (1 + b * r * r)

    def f1(r):
        return c * 2 * (a - b) * r / (1 + b * r * r) ** 2

    def f2(r):
        q = 1 + b * r * r
        return c * 2 * (a - b) * (1 - 3 * b * r * r) / q**3

    return cls("rational", {"scale": c, "a": a, "b": b}, tuple(domain), f, f1, f2,
               formula=f"{c!r}*(1+{a!r}*r^2)/(1+{b!r}*r^2)")


def parse_profile(expr: str, var_name: str = "x", kind: str = "mass", domain=FULL_LINE):
    """Profile backed by a parsed arithmetic expression.

    Syntax errors surface immediately as ``ExpressionSyntaxError``; domain
    violations (``ln`` of a non-positive value, ...) surface when evaluated.
    """
    cls = _kind(kind)
    parsed: Expression = parse_expression(expr, var_name)
    return cls("expression", {}, tuple(domain), parsed, formula=expr)


_BUILDERS = {
    "power_law": (make_power_law, ("sigma", "upsilon")),
    "constant": (make_constant, ("value",)),
    "exponential": (make_exponential, ("scale", "rate")),
    "rational": (make_rational, ("scale", "a", "b")),
}


def make_profile(family: str, params: Mapping[str, float], kind: str = "mass", domain=None):
    """Build a profile by family name; ``expression`` takes ``expr`` and ``var``."""
    if family == "expression":
        return parse_profile(params["expr"], params.get("var", "r"), kind,
                             domain if domain is not None else FULL_LINE)
    try:
        builder, names = _BUILDERS[family]
    except KeyError:
        raise ValueError(f"unknown profile family {family!r}") from None
    missing = [n for n in names if n not in params]
    if missing:
        raise ValueError(f"{family} profile is missing parameter(s): {', '.join(missing)}")
    args = [float(params[n]) for n in names]
    if domain is None:
        return builder(*args, kind=kind)
    return builder(*args, kind=kind, domain=domain)


@dataclass
class ValidationReport:
    samples: np.ndarray
    positivity_violations: np.ndarray
    max_d1_residual: float
    max_d2_residual: float
    errors: list[str] = field(default_factory=list)
    tolerance: float = 1e-5

    @property
    def passed(self) -> bool:
        return (
            not self.errors
            and self.positivity_violations.size == 0
            and self.max_d1_residual <= self.tolerance
            and self.max_d2_residual <= self.tolerance
        )


def validate_profile(p: Profile, samples: int = 100, window=None, tolerance: float = 1e-5) -> ValidationReport:
    """Check positivity (mass profiles) and derivative consistency on a sample.

    Samples are evenly spaced strictly inside ``window`` (default: the
    profile's domain, clipped to (-10, 10) or (0, 10] where infinite).
    Derivative residuals are ``|f' - FD(f)| / max(1, |f'|)`` against plain
    central differences with step ``1e-4 * max(1, |r|)``; same for ``f''``.
    """
    if samples < 3:
        raise ValueError("validate_profile needs at least 3 samples")
    lo, hi = window if window is not None else p.domain
    if not math.isfinite(lo):
        lo = -10.0
    if not math.isfinite(hi):
        hi = 10.0
    r = lo + (hi - lo) * np.arange(1, samples + 1) / (samples + 1)
    errors: list[str] = []
    try:
        f = np.asarray(Profile.__call__(p, r))
    except (ExpressionEvalError, DomainError) as exc:
        return ValidationReport(r, np.empty(0), math.inf, math.inf, [str(exc)], tolerance)
    bad = r[f <= 0] if isinstance(p, MassProfile) else np.empty(0)

    h = 1e-4 * np.maximum(1.0, np.abs(r))
    h = np.minimum(h, 0.25 * np.minimum(r - p.domain[0], p.domain[1] - r))
    try:
        fp, fm = p.value(r + h), p.value(r - h)
        fd1 = (fp - fm) / (2 * h)
        fd2 = (fp - 2 * f + fm) / h**2
        d1, d2 = p.d1(r), p.d2(r)
    except (ExpressionEvalError, DomainError) as exc:
        return ValidationReport(r, bad, math.inf, math.inf, [str(exc)], tolerance)
    res1 = float(np.max(np.abs(d1 - fd1) / np.maximum(1.0, np.abs(d1))))
    res2 = float(np.max(np.abs(d2 - fd2) / np.maximum(1.0, np.abs(d2))))
    return ValidationReport(r, bad, res1, res2, errors, tolerance)
