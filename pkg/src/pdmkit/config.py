"""INI problem files for the command line.

A problem file has ``key = value`` lines under ``[section]`` headers::

    [mass]
    family = power_law
    sigma = 1
    upsilon = 2

    [potential]
    expr = r^4/4

    [problem]
    d = 3
    ell = 1

    [solver]
    n_max = 3

Every value is text-parsed; unknown sections and keys are rejected.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .expr import ExpressionSyntaxError
from .ordering import LAPLACIAN_MODES, MM, OrderingParameters, parse_ordering
from .profiles import FULL_LINE, HALF_LINE, MassProfile, PotentialProfile, make_profile

__all__ = ["ConfigError", "ProblemConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Malformed or incomplete problem file."""


_PROFILE_KEYS = {"family", "expr", "var", "sigma", "upsilon", "value", "scale", "rate", "a", "b"}
_ALLOWED = {
    "mass": _PROFILE_KEYS,
    "potential": _PROFILE_KEYS,
    "problem": {"d", "ell", "parity", "ordering", "laplacian_mode"},
    "solver": {"r_min", "r_max", "grid_n", "n_max", "tolerance"},
    "grid": {"start", "stop", "points"},
}


@dataclass
class ProblemConfig:
    """Parsed problem file; profiles are built on demand by ``mass``/``potential``."""

    sections: dict[str, dict[str, str]]
    d: int = 3
    ell: int = 0
    parity: str | None = None
    ordering: OrderingParameters = MM
    laplacian_mode: str = "literal_radial"
    r_min: float = 1e-6
    r_max: float | None = None
    grid_n: int = 2000
    n_max: int = 4
    tolerance: float = 1e-12
    grid: tuple[float, float, int] | None = None
    source: str = field(default="<string>", repr=False)

    def has(self, section: str) -> bool:
        return section in self.sections

    def _profile(self, section: str, kind: str, radial: bool):
        if section not in self.sections:
            raise ConfigError(f"missing [{section}] section")
        keys = dict(self.sections[section])
        family = keys.pop("family", None)
        if family is None:
            if "expr" not in keys:
                raise ConfigError(f"[{section}] needs 'family' or 'expr'")
            family = "expression"
        params: dict = {}
        for k, v in keys.items():
            if k in ("expr", "var"):
                params[k] = v
            else:
                params[k] = _float(section, k, v)
        if family == "expression":
            if "expr" not in params:
                raise ConfigError(f"[{section}] family = expression needs 'expr'")
            params.setdefault("var", "r" if radial else "x")
            domain = HALF_LINE if radial else FULL_LINE
        else:
            domain = None
        try:
            return make_profile(family, params, kind=kind, domain=domain)
        except ExpressionSyntaxError as exc:
            raise ConfigError(f"[{section}] expr: {exc}") from None
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"[{section}] {exc}") from None

    def mass(self, radial: bool = True) -> MassProfile:
        return self._profile("mass", "mass", radial)

    def potential(self, radial: bool = True) -> PotentialProfile:
        return self._profile("potential", "potential", radial)


def _float(section, key, text) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {text!r}") from None


def _int(section, key, text) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {text!r}") from None


def parse_config(text: str, source: str = "<string>") -> ProblemConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    sections = {s: dict(cp.items(s)) for s in cp.sections()}
    for name, keys in sections.items():
        if name not in _ALLOWED:
            raise ConfigError(f"unknown section [{name}]")
        unknown = sorted(set(keys) - _ALLOWED[name])
        if unknown:
            raise ConfigError(f"[{name}] unknown key(s): {', '.join(unknown)}")

    cfg = ProblemConfig(sections, source=source)
    prob = sections.get("problem", {})
    if "d" in prob:
        cfg.d = _int("problem", "d", prob["d"])
        if cfg.d < 1:
            raise ConfigError("[problem] d must be >= 1")
    if "ell" in prob:
        cfg.ell = _int("problem", "ell", prob["ell"])
        if cfg.ell < 0:
            raise ConfigError("[problem] ell must be >= 0")
    if "parity" in prob:
        cfg.parity = prob["parity"].strip().lower()
        if cfg.parity not in ("even", "odd"):
            raise ConfigError("[problem] parity must be 'even' or 'odd'")
    if cfg.d == 1:
        if cfg.parity is None:
            raise ConfigError("[problem] d = 1 needs parity = even|odd")
        if "ell" in prob:
            raise ConfigError("[problem] d = 1 takes parity, not ell")
    elif cfg.parity is not None:
        raise ConfigError("[problem] parity only applies to d = 1")
    if "ordering" in prob:
        try:
            cfg.ordering = parse_ordering(prob["ordering"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"[problem] ordering: {exc}") from None
    if "laplacian_mode" in prob:
        cfg.laplacian_mode = prob["laplacian_mode"].strip()
        if cfg.laplacian_mode not in LAPLACIAN_MODES:
            raise ConfigError(f"[problem] laplacian_mode must be one of {', '.join(LAPLACIAN_MODES)}")

    sol = sections.get("solver", {})
    if "r_min" in sol:
        cfg.r_min = _float("solver", "r_min", sol["r_min"])
        if not cfg.r_min > 0:
            raise ConfigError("[solver] r_min must be > 0")
    if "r_max" in sol and sol["r_max"].strip().lower() != "auto":
        cfg.r_max = _float("solver", "r_max", sol["r_max"])
        if not (math.isfinite(cfg.r_max) and cfg.r_max > cfg.r_min):
            raise ConfigError("[solver] r_max must be finite and > r_min")
    if "grid_n" in sol:
        cfg.grid_n = _int("solver", "grid_n", sol["grid_n"])
        if cfg.grid_n < 50:
            raise ConfigError("[solver] grid_n must be >= 50")
    if "n_max" in sol:
        cfg.n_max = _int("solver", "n_max", sol["n_max"])
        if cfg.n_max < 0:
            raise ConfigError("[solver] n_max must be >= 0")
    if "tolerance" in sol:
        cfg.tolerance = _float("solver", "tolerance", sol["tolerance"])
        if not cfg.tolerance > 0:
            raise ConfigError("[solver] tolerance must be > 0")

    if "grid" in sections:
        g = sections["grid"]
        missing = [k for k in ("start", "stop", "points") if k not in g]
        if missing:
            raise ConfigError(f"[grid] missing key(s): {', '.join(missing)}")
        start, stop = _float("grid", "start", g["start"]), _float("grid", "stop", g["stop"])
        points = _int("grid", "points", g["points"])
        if not stop > start or points < 2:
            raise ConfigError("[grid] needs stop > start and points >= 2")
        cfg.grid = (start, stop, points)
    return cfg


def load_config(path: str) -> ProblemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return parse_config(text, source=path)
