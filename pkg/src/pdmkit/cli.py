"""Command-line front end: ``pdmkit <subcommand> [config] [flags]``.

Exit codes: 0 success, 2 configuration error, 3 solver or mapping failure.
Diagnostics go to stderr; ``PDM_LOG=debug|info`` raises their verbosity.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import ConfigError, ProblemConfig, load_config, parse_config
from .expr import ExpressionEvalError
from .ordering import catalog, compare_orderings, kinetic_coefficients, parse_ordering
from .pct import (
    ComplexAngularMomentumError,
    MappingDomainError,
    map_reference_to_target,
    parse_reference,
    power_law_params,
    special_case_inverse_square,
    u_d,
)
from .pdm_operator import verification_report
from .profiles import DomainError
from .radial import RadialProblem, solve_fd_z, solve_shooting

log = logging.getLogger("pdmkit")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

DEFAULT_VERIFY_CONFIG = """\
[mass]
expr = 1 + x^2

[potential]
expr = x^2

[grid]
start = -8
stop = 8
points = 500
"""


# errors raised while evaluating profiles or solving count as solver failures
_SOLVER_ERRORS = (ComplexAngularMomentumError, MappingDomainError,
                  DomainError, ExpressionEvalError, ArithmeticError, ValueError, RuntimeError)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _write_csv(path: str | None, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _problem(cfg: ProblemConfig, potential, args) -> RadialProblem:
    r_max = args.r_max if getattr(args, "r_max", None) is not None else cfg.r_max
    grid_n = args.grid_n if getattr(args, "grid_n", None) is not None else cfg.grid_n
    try:
        return RadialProblem(
            cfg.d, cfg.mass(radial=True), potential, ell=cfg.ell, parity=cfg.parity,
            ordering=cfg.ordering, r_min=cfg.r_min, r_max=r_max, grid_n=grid_n,
            laplacian_mode=cfg.laplacian_mode,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _n_max(cfg, args) -> int:
    return args.n_max if getattr(args, "n_max", None) is not None else cfg.n_max


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    p = _problem(cfg, cfg.potential(radial=True), args)
    n_max = _n_max(cfg, args)
    p = p.with_r_max(n_max)
    log.info("solve: r_max = %.6g, grid_n = %d", p.r_max, p.grid_n)
    spectra = []
    if args.solver in ("fd", "both"):
        spectra.append(solve_fd_z(p, n_max, cfg.tolerance))
    if args.solver in ("shoot", "both"):
        spectra.append(solve_shooting(p, n_max, cfg.tolerance))
    rows = []
    for spec in spectra:
        for msg in spec.missing:
            print(msg, file=sys.stderr)
        for lv in spec:
            if not lv.reliable:
                print(f"{spec.solver}: level n_r={lv.n_r} is under-resolved", file=sys.stderr)
            rows.append((lv.n_r, lv.energy, spec.solver, lv.node_count, lv.est_error))
    _write_csv(args.out, ("n_r", "E", "solver", "node_count", "est_error"), rows)
    return EXIT_OK


def _grid(cfg: ProblemConfig, lo_domain: float):
    if cfg.grid is not None:
        start, stop, points = cfg.grid
        return np.linspace(start, stop, points)
    start = -5.0 if not math.isfinite(lo_domain) else lo_domain + 0.05
    return np.linspace(start, 5.0, 101)


def cmd_effpot(args) -> int:
    cfg = load_config(args.config)
    m = cfg.mass(radial=False)
    V = cfg.potential(radial=False)
    try:
        orderings = [parse_ordering(o) for o in args.ordering] if args.ordering else [cfg.ordering]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"--ordering: {exc}") from None
    grid = _grid(cfg, max(m.domain[0], V.domain[0]))
    table = compare_orderings(orderings, m, V, grid)
    _write_csv(args.out, table.header(), table.rows().tolist())
    return EXIT_OK


def _mapping_path(args) -> str | None:
    if args.mapping_out:
        return args.mapping_out
    if args.out and args.out != "-":
        out = Path(args.out)
        return str(out.with_name(out.stem + "_mapping" + (out.suffix or ".csv")))
    return None


def cmd_pct(args) -> int:
    cfg = load_config(args.config)
    m = cfg.mass(radial=True)
    try:
        ref = parse_reference(args.reference)
    except ValueError as exc:
        raise ConfigError(f"--reference: {exc}") from None
    if cfg.has("potential"):
        log.warning("pct: [potential] is ignored; the target potential comes from the reference")
    pl = power_law_params(m)
    if pl is None:
        raise ConfigError("pct needs a power_law or constant [mass]")
    if cfg.ordering.triple != parse_ordering("mm").triple or cfg.laplacian_mode != "literal_radial":
        log.warning("pct: the mapping is exact only for the mm ordering with literal_radial")
    if args.reference_l is not None and pl[1] != -2:
        raise ConfigError("--reference-l applies only to an inverse-square mass (upsilon = -2)")
    n_max = _n_max(cfg, args)
    target = map_reference_to_target(ref, m, cfg.d, cfg.ell, n_max, cfg.parity, args.reference_l)
    if pl[1] == -2:
        case = special_case_inverse_square(m, None, cfg.d, cfg.ell, cfg.parity)
        print(f"inverse-square mass: constant shift U_tilde_d = {_fmt(float(case.shift))}",
              file=sys.stderr)
    else:
        print(f"effective angular momentum lambda = {target.lam}", file=sys.stderr)

    p = _problem(cfg, target.potential, args).with_r_max(n_max)
    fd = solve_fd_z(p, n_max, cfg.tolerance)
    sh = solve_shooting(p, n_max, cfg.tolerance)
    for msg in fd.missing + sh.missing:
        print(msg, file=sys.stderr)

    def energy(spec, n):
        return spec.levels[n].energy if n < len(spec) else math.nan

    rows = []
    for lv in target.predicted:
        e_sh, e_fd = energy(sh, lv.n_r), energy(fd, lv.n_r)
        rel = max(abs(e_sh - lv.energy), abs(e_fd - lv.energy)) / abs(lv.energy)
        rows.append((lv.n_r, lv.energy, e_sh, e_fd, rel))
    _write_csv(args.out, ("n_r", "E_predicted", "E_shooting", "E_fd", "rel_dev"), rows)

    if cfg.grid is not None:
        r = np.linspace(max(cfg.grid[0], p.r_min), min(cfg.grid[1], p.r_max), cfg.grid[2])
    else:
        r = np.linspace(p.r_max / 200, p.r_max, 200)
    ud = u_d(m, r, cfg.d)
    mapping_rows = np.column_stack([r, target.mapping.forward(r), ud, target.potential(r) - ud]).tolist()
    path = _mapping_path(args)
    if path is not None:
        _write_csv(path, ("r", "Z", "U_d", "V_eff"), mapping_rows)
    return EXIT_OK


def cmd_verify_operator(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = parse_config(DEFAULT_VERIFY_CONFIG, "<default>")
    m = cfg.mass(radial=False)
    V = cfg.potential(radial=False) if cfg.has("potential") else None
    start, stop, points = cfg.grid if cfg.grid is not None else (-8.0, 8.0, 500)
    if points < 10:
        raise ConfigError("[grid] points must be >= 10 for operator verification")
    rows = verification_report(m, V, (start, stop), base_n=points)
    _write_csv(args.out, ("test_name", "grid_N", "residual_inf", "observed_order"),
               [(r.test_name, r.grid_n, r.residual_inf, r.observed_order) for r in rows])
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"verify-operator: {r.test_name} at N={r.grid_n} failed "
              f"(residual {r.residual_inf:.3g}, order {r.observed_order:.3g})", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def _frac(v) -> str:
    return str(v) if isinstance(v, Fraction) else _fmt(v)


def cmd_orderings(args) -> int:
    rows = []
    for o in catalog():
        k = kinetic_coefficients(o)
        rows.append((o.name, *(_frac(v) for v in (o.alpha, o.beta, o.gamma, k.c_lap, k.c_grad))))
    _write_csv(args.out, ("name", "alpha", "beta", "gamma", "c_lap", "c_grad"), rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdmkit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def overrides(sp):
        sp.add_argument("--r-max", type=float, help="outer radius (default: from config or automatic)")
        sp.add_argument("--grid-n", type=int, help="grid points (default: from config)")
        sp.add_argument("--n-max", type=int, help="highest radial quantum number")

    s = sub.add_parser("solve", help="bound-state spectrum of a radial problem")
    s.add_argument("config")
    s.add_argument("--solver", choices=("fd", "shoot", "both"), default="both")
    s.add_argument("--out", help="CSV path (default: stdout)")
    overrides(s)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("effpot", help="tabulate effective potentials per ordering")
    e.add_argument("config")
    e.add_argument("--ordering", action="append",
                   help="catalog name or custom:<alpha>,<beta>; repeatable")
    e.add_argument("--out")
    e.set_defaults(func=cmd_effpot)

    p = sub.add_parser("pct", help="map a reference problem onto a power-law mass target")
    p.add_argument("config")
    p.add_argument("--reference", default="oscillator:k=1", help="oscillator:k=.. or coulomb:e2=..")
    p.add_argument("--reference-l", type=int,
                   help="upsilon = -2 only: reference angular momentum (0 odd, -1 even states)")
    p.add_argument("--out")
    p.add_argument("--mapping-out", help="CSV for (r, Z, U_d, V_eff); default <out stem>_mapping.csv")
    overrides(p)
    p.set_defaults(func=cmd_pct)

    v = sub.add_parser("verify-operator", help="operator identity, convergence and hermiticity checks")
    v.add_argument("config", nargs="?")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify_operator)

    o = sub.add_parser("orderings", help="list the ordering catalog")
    o.add_argument("--out")
    o.set_defaults(func=cmd_orderings)
    return ap


def _setup_logging() -> None:
    level = os.environ.get("PDM_LOG", "").strip().lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _SOLVER_ERRORS as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
