"""Solve a full problem mode by mode, synthesize the field and write reports."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cfheat.cf_operator import DEFAULT_NODES
from cfheat.ode_reduction import ProblemSpec, reduce_mode
from cfheat.spectral import (
    DEFAULT_T_TABLE,
    DEFAULT_X_NODES,
    CompatibilityReport,
    ModalCoefficients,
    max_modes,
    project_forcing,
    synthesize,
    validate_compatibility,
)
from cfheat.temporal_solver import (
    DEFAULT_MOMENT_INTERVALS,
    DEFAULT_RK_STEPS,
    TemporalSolution,
    solve_mode,
)
from cfheat.verifier import (
    DecayReport,
    InsufficientModesError,
    ResidualReport,
    decay_check,
    modal_operator,
    pde_residual,
)

__all__ = [
    "SolutionGrid",
    "SolveResult",
    "modal_forcing",
    "initial_consistency",
    "solve_problem",
    "write_outputs",
]

# projected coefficients below this fraction of the largest one are Simpson
# round-off of modes the forcing does not contain
NEGLIGIBLE_MODE = 1e-13
CROSS_CHECK_SAMPLES = 1025


@dataclass
class SolutionGrid:
    """``u[i, j] = u(t_i, x_j)`` on uniform nodes with per-mode traces."""

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    solutions: list[TemporalSolution]
    forcing_modes: dict[int, ModalCoefficients | None] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def traces(self) -> dict[int, np.ndarray]:
        return {sol.m: sol(self.t) for sol in self.solutions}


@dataclass
class SolveResult:
    grid: SolutionGrid
    residual: ResidualReport
    decay: DecayReport | None
    compatibility: CompatibilityReport | None
    diagnostics: list[dict]
    cross_check: float | None = None

    def residuals_pass(self, mode_tol: float, grid_tol: float) -> bool:
        return self.residual.passed(mode_tol, grid_tol)


def modal_forcing(
    spec: ProblemSpec, *, t_intervals: int = DEFAULT_T_TABLE, x_nodes: int = DEFAULT_X_NODES
) -> dict[int, ModalCoefficients | None]:
    """Projected forcing per mode; ``None`` for modes the forcing does not excite."""
    if spec.modes > max_modes(x_nodes):
        raise ValueError(
            f"{spec.modes} modes exceed the {max_modes(x_nodes)} resolvable with "
            f"{x_nodes} x-nodes"
        )
    if spec.forcing is None:
        return {m: None for m in range(1, spec.modes + 1)}
    traces = project_forcing(spec.forcing, spec.modes, t_intervals=t_intervals, x_nodes=x_nodes)
    table = np.linspace(0.0, spec.q, 257)
    peaks = [
        max(float(np.max(np.abs(fm.derivative(r)(table)))) for r in (0, 1)) for fm in traces
    ]
    top = max(peaks)
    return {
        fm.m: (fm if top > 0.0 and peak > NEGLIGIBLE_MODE * top else None)
        for fm, peak in zip(traces, peaks)
    }


def initial_consistency(
    spec: ProblemSpec, forcing: dict[int, ModalCoefficients | None]
) -> dict[int, float]:
    """``|(m pi)^2 T_m(0) - f_m(0)|`` per mode.

    Every CF derivative vanishes at ``t = 0``, so the modal equation there
    reduces to ``(m pi)^2 T_m(0) = f_m(0)``. The reduced ODE loses this
    constraint when it is differentiated, so it has to be checked separately.
    """
    out = {}
    for m in range(1, spec.modes + 1):
        fm = forcing.get(m)
        f0 = 0.0 if fm is None else float(fm.derivative(0)(np.zeros(1))[0])
        out[m] = abs((m * math.pi) ** 2 * spec.initial_for(m)[0] - f0)
    return out


def _solve_one(spec, m, fm, solver, t, nodes, cross_check):
    ode = reduce_mode(spec, m, fm)
    sol = solve_mode(ode, solver)
    if fm is None and not any(spec.initial_for(m)):
        # the solution is identically zero, and so is every CF derivative
        values = np.zeros_like(t)
    else:
        values = modal_operator(sol, spec, t, nodes=nodes)
    diff = None
    if cross_check and ode.order == 3:
        other = "companion" if sol.provenance == "closed-form" else "closed-form"
        alt = solve_mode(ode, other)
        dense = np.linspace(0.0, spec.q, CROSS_CHECK_SAMPLES)
        diff = float(np.max(np.abs(sol(dense) - alt(dense))))
    return sol, values, diff


def _diagnostic(sol: TemporalSolution, values, fm, t, diff) -> dict:
    ode = sol.ode
    target = np.zeros_like(values) if fm is None else fm.derivative(0)(t)
    entry = {
        "m": sol.m,
        "solver": sol.provenance,
        "coefficients": [float(c) for c in ode.coefficients],
        "sup_abs": sol.sup_norm(),
        "residual": float(np.max(np.abs(values - target))),
        "forced": fm is not None,
    }
    cls = sol.classification
    if cls is not None:
        entry["discriminant"] = cls.discriminant
        entry["case"] = cls.case.value
        roots = cls.roots
    else:
        entry["discriminant"] = None
        entry["case"] = None
        roots = np.roots(ode.coefficients)
    entry["roots"] = [[float(r.real), float(r.imag)] for r in np.asarray(roots, dtype=complex)]
    entry["constants"] = None if sol.constants is None else [float(c) for c in sol.constants]
    if diff is not None:
        entry["cross_check"] = diff
    return entry


def solve_problem(
    spec: ProblemSpec,
    *,
    solver: str = "auto",
    jobs: int | None = None,
    cross_check: bool = False,
    nodes: int = DEFAULT_NODES,
    compatibility_tol: float = 1e-10,
) -> SolveResult:
    t = np.linspace(0.0, spec.q, spec.nt + 1)
    x = np.linspace(0.0, 1.0, spec.nx + 1)
    forcing = modal_forcing(spec)
    modes = list(range(1, spec.modes + 1))

    jobs = jobs or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(
            pool.map(
                lambda m: _solve_one(spec, m, forcing[m], solver, t, nodes, cross_check),
                modes,
            )
        )

    solutions = [r[0] for r in results]
    operator_values = {sol.m: r[1] for sol, r in zip(solutions, results)}
    diffs = [r[2] for r in results if r[2] is not None]
    u = synthesize({sol.m: sol(t) for sol in solutions}, x)
    provenance = {
        "solvers": sorted({sol.provenance for sol in solutions}),
        "quadrature_nodes": nodes,
        "moment_intervals": DEFAULT_MOMENT_INTERVALS,
        "rk4_steps": DEFAULT_RK_STEPS,
        "x_quadrature_nodes": DEFAULT_X_NODES,
        "t_table_intervals": DEFAULT_T_TABLE,
    }
    grid = SolutionGrid(t, x, u, solutions, forcing, provenance)
    residual = pde_residual(grid, spec, nodes=nodes, operator_values=operator_values)

    decay = None
    if spec.modes >= 8:
        try:
            decay = decay_check(solutions, spec, nodes=nodes)
        except InsufficientModesError:
            decay = None

    compatibility = None
    if spec.forcing is not None:
        compatibility = validate_compatibility(spec.forcing, compatibility_tol)

    diagnostics = [
        _diagnostic(sol, operator_values[sol.m], forcing[sol.m], t, r[2])
        for sol, r in zip(solutions, results)
    ]
    return SolveResult(
        grid=grid,
        residual=residual,
        decay=decay,
        compatibility=compatibility,
        diagnostics=diagnostics,
        cross_check=max(diffs) if diffs else None,
    )


# {{{ output


def _finite(value):
    """JSON has no infinities; map them (and NaN) to null."""
    if isinstance(value, float):
        # also folds -0.0 into 0.0
        return value + 0.0 if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return _finite(value.item())
    return value


def _dump(path: Path, document: dict) -> None:
    text = json.dumps(_finite(document), sort_keys=True, indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def _header(provenance: dict) -> list[str]:
    return [f"# {key}={json.dumps(provenance[key], sort_keys=True)}" for key in sorted(provenance)]


def write_csv(path: Path, grid: SolutionGrid, provenance: dict) -> None:
    lines = _header(provenance)
    lines.append(",".join(["t/x"] + [repr(float(v)) for v in grid.x]))
    for ti, row in zip(grid.t, grid.u):
        lines.append(",".join([repr(float(ti))] + [repr(float(v)) for v in row]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def compatibility_dict(report: CompatibilityReport | None) -> dict | None:
    if report is None:
        return None
    return {
        "passed": report.passed,
        "tol": report.tol,
        "conditions": [
            {"name": c.name, "max_violation": c.max_violation, "passed": c.passed}
            for c in report.conditions
        ],
    }


def write_outputs(
    out_dir: str | Path,
    result: SolveResult,
    provenance: dict,
    *,
    status: dict,
) -> list[Path]:
    """Write ``solution.csv``, ``diagnostics.json`` and ``verification.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    provenance = {**provenance, **result.grid.provenance}
    paths = [out / "solution.csv", out / "diagnostics.json", out / "verification.json"]
    write_csv(paths[0], result.grid, provenance)
    _dump(paths[1], {"provenance": provenance, "modes": result.diagnostics})
    _dump(
        paths[2],
        {
            "provenance": provenance,
            "residual": result.residual.as_dict(),
            "decay": None if result.decay is None else result.decay.as_dict(),
            "compatibility": compatibility_dict(result.compatibility),
            "cross_check": result.cross_check,
            "status": status,
        },
    )
    return paths


# }}}
