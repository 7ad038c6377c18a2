"""Command line front end: ``cfheat solve <config>`` and ``cfheat validate <config>``.

Exit status: 0 when every check passes, 1 for configuration or I/O errors,
2 when a residual tolerance fails or (with ``--strict``) a hypothesis check
fails. Reports are written before a status-2 exit.
"""
from __future__ import annotations

import argparse
import os
import sys
from importlib.metadata import PackageNotFoundError, version

from cfheat.config import ConfigError, RunConfig, load_config
from cfheat.ode_reduction import ProblemSpec
from cfheat.pipeline import (
    compatibility_dict,
    initial_consistency,
    modal_forcing,
    solve_problem,
    write_outputs,
)
from cfheat.spectral import validate_compatibility
from cfheat.verifier import MIN_INTERIOR_X

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VALIDATION = 2

OUT_ENV = "CFHEAT_OUT"
DEFAULT_OUT = "cfheat-out"
CONSISTENCY_TOL = 1e-10


def _package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfheat",
        description="Multi-term time-fractional heat equation with Caputo-Fabrizio derivatives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a configured problem and write reports")
    solve.add_argument("config")
    solve.add_argument("--strict", action="store_true", help="hypothesis failures are errors")
    solve.add_argument("--jobs", type=_positive, default=None, help="parallel mode solves")
    solve.add_argument(
        "--cross-check", action="store_true", help="run both third-order solvers and compare"
    )
    solve.add_argument("--out", default=None, help=f"output directory (overrides ${OUT_ENV})")

    validate = sub.add_parser("validate", help="check hypotheses without solving")
    validate.add_argument("config")
    return parser


def _load(path: str) -> tuple[RunConfig, ProblemSpec]:
    cfg = load_config(path)
    spec = cfg.problem()
    if spec.nx - 1 < MIN_INTERIOR_X:
        raise ConfigError(f"nx={spec.nx} leaves fewer than {MIN_INTERIOR_X} interior x nodes")
    return cfg, spec


def _hypotheses(cfg: RunConfig, spec: ProblemSpec) -> tuple[list[tuple[str, float, bool]], dict]:
    """Compatibility conditions and initial consistency as ``(name, violation, passed)``."""
    compat = validate_compatibility(spec.forcing, cfg.tolerances.compatibility)
    rows = [(c.name, c.max_violation, c.passed) for c in compat.conditions]
    try:
        forcing = modal_forcing(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for m, gap in initial_consistency(spec, forcing).items():
        rows.append((f"initial consistency m={m}", gap, gap <= CONSISTENCY_TOL))
    return rows, compatibility_dict(compat)


def _print_rows(rows, stream) -> None:
    for name, violation, passed in rows:
        print(f"{'PASS' if passed else 'FAIL'}  {name:<28} {violation:.3e}", file=stream)


def cmd_validate(args) -> int:
    cfg, spec = _load(args.config)
    rows, _ = _hypotheses(cfg, spec)
    _print_rows(rows, sys.stdout)
    ok = all(passed for _, _, passed in rows)
    print("all checks passed" if ok else "validation failed")
    return EXIT_OK if ok else EXIT_VALIDATION


def _output_dir(args, cfg: RunConfig) -> str:
    return args.out or cfg.output or os.environ.get(OUT_ENV) or DEFAULT_OUT


def cmd_solve(args) -> int:
    cfg, spec = _load(args.config)
    rows, _ = _hypotheses(cfg, spec)
    failed = [row for row in rows if not row[2]]
    for name, violation, _ in failed:
        print(f"warning: hypothesis {name} violated by {violation:.3e}", file=sys.stderr)

    try:
        result = solve_problem(
            spec,
            solver=cfg.solver,
            jobs=args.jobs,
            cross_check=args.cross_check,
            nodes=cfg.tolerances.quadrature_nodes,
            compatibility_tol=cfg.tolerances.compatibility,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    tol = cfg.tolerances
    residual_ok = result.residual.passed(tol.mode_residual, tol.grid_residual)
    hypotheses_ok = not failed
    status = {
        "residual_passed": residual_ok,
        "hypotheses_passed": hypotheses_ok,
        "strict": args.strict,
        "failed_hypotheses": [name for name, _, _ in failed],
    }
    provenance = {
        "config_sha256": cfg.sha256,
        "package_version": _package_version(),
        "solver_choice": cfg.solver,
        "cross_check": args.cross_check,
    }
    paths = write_outputs(_output_dir(args, cfg), result, provenance, status=status)
    for path in paths:
        print(f"wrote {path}")

    report = result.residual
    print(
        f"mode residual {report.mode_sup:.3e} (tol {tol.mode_residual:g}), "
        f"grid residual {report.grid_relative:.3e} relative (tol {tol.grid_residual:g})"
    )
    if result.cross_check is not None:
        print(f"cross-check difference {result.cross_check:.3e}")
    if not residual_ok:
        print("error: residual tolerance not met", file=sys.stderr)
        return EXIT_VALIDATION
    if args.strict and not hypotheses_ok:
        print("error: hypothesis checks failed under --strict", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = cmd_solve if args.command == "solve" else cmd_validate
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
