"""Independent checks of computed modal solutions.

Residuals are formed with the direct kernel quadrature of the
Caputo-Fabrizio operator (:func:`cf_derivative_higher`), never with the
integration-by-parts expansion the reduction is built on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from cfheat.cf_operator import (
    DEFAULT_NODES,
    SampledFunction,
    cf_derivative,
    cf_derivative_higher,
)
from cfheat.ode_reduction import ProblemSpec
from cfheat.spectral import ModalCoefficients, sine_coefficients

if TYPE_CHECKING:
    from cfheat.pipeline import SolutionGrid
    from cfheat.temporal_solver import TemporalSolution

__all__ = [
    "ResidualReport",
    "DecayReport",
    "InsufficientModesError",
    "as_sampled",
    "modal_operator",
    "mode_residual",
    "pde_residual",
    "decay_check",
]

MODE_RESIDUAL_TOL = 1e-4
GRID_RESIDUAL_TOL = 1e-3
DECAY_TARGET = -4.0
DECAY_SLACK = 0.3
MIN_INTERIOR_X = 5


class InsufficientModesError(ValueError):
    pass


def as_sampled(sol, *, nodes: int = DEFAULT_NODES, richardson: bool = True) -> SampledFunction:
    """Wrap a modal solution (anything with ``derivative(t, r)``) for quadrature."""
    derivatives = [
        (lambda t, r=r: sol.derivative(t, r)) for r in range(1, sol.order + 1)
    ]
    return SampledFunction(
        func=lambda t: sol.derivative(t, 0),
        derivatives=derivatives,
        nodes=nodes,
        richardson=richardson,
    )


def modal_operator(
    sol,
    spec: ProblemSpec,
    t_nodes: Sequence[float],
    *,
    nodes: int = DEFAULT_NODES,
    richardson: bool = True,
) -> np.ndarray:
    """``sum_n lambda_n D^{alpha+n} T_m + (m pi)^2 T_m`` at each node."""
    g = as_sampled(sol, nodes=nodes, richardson=richardson)
    t_nodes = np.asarray(t_nodes, dtype=float)
    out = (sol.m * math.pi) ** 2 * np.asarray(sol.derivative(t_nodes, 0), dtype=float)
    out = out.copy()
    for i, t in enumerate(t_nodes):
        out[i] += sum(
            lam * cf_derivative_higher(g, spec.order, n, float(t))
            for n, lam in enumerate(spec.lambdas)
            if lam != 0.0
        )
    return out


def mode_residual(
    sol,
    spec: ProblemSpec,
    fm: ModalCoefficients | None,
    t_nodes: Sequence[float],
    *,
    nodes: int = DEFAULT_NODES,
    richardson: bool = True,
) -> float:
    """Sup over ``t_nodes`` of the modal equation residual."""
    t_nodes = np.asarray(t_nodes, dtype=float)
    lhs = modal_operator(sol, spec, t_nodes, nodes=nodes, richardson=richardson)
    rhs = np.zeros_like(lhs) if fm is None else fm.derivative(0)(t_nodes)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class ResidualReport:
    mode_residuals: dict[int, float]
    grid_sup: float
    grid_rms: float
    grid_relative: float
    boundary_violation: float
    initial_violation: float
    modes: int
    quadrature_nodes: int

    @property
    def mode_sup(self) -> float:
        return max(self.mode_residuals.values(), default=0.0)

    def passed(
        self, mode_tol: float = MODE_RESIDUAL_TOL, grid_tol: float = GRID_RESIDUAL_TOL
    ) -> bool:
        return (
            self.mode_sup <= mode_tol
            and self.grid_relative <= grid_tol
            and self.boundary_violation == 0.0
            and self.initial_violation <= 1e-8
        )

    def as_dict(self) -> dict:
        return {
            "mode_residuals": {str(m): v for m, v in sorted(self.mode_residuals.items())},
            "mode_residual_sup": self.mode_sup,
            "grid_residual_sup": self.grid_sup,
            "grid_residual_rms": self.grid_rms,
            "grid_residual_relative": self.grid_relative,
            "boundary_violation": self.boundary_violation,
            "initial_violation": self.initial_violation,
            "modes": self.modes,
            "quadrature_nodes": self.quadrature_nodes,
        }


def pde_residual(
    grid: "SolutionGrid",
    spec: ProblemSpec,
    *,
    nodes: int = DEFAULT_NODES,
    operator_values: Mapping[int, np.ndarray] | None = None,
) -> ResidualReport:
    """Residual of the full equation on the grid's interior nodes.

    The fractional part is assembled mode by mode and re-synthesized; since
    ``sin(m pi x)`` diagonalizes ``d^2/dx^2`` the field residual is
    ``sum_m [L_m T_m](t) sin(m pi x) - f(t, x)``.
    """
    t, x = grid.t, grid.x
    interior = (x > 0.0) & (x < 1.0)
    if interior.sum() < MIN_INTERIOR_X:
        raise ValueError(
            f"grid too coarse: {interior.sum()} interior x nodes, need {MIN_INTERIOR_X}"
        )

    lhs = np.zeros((t.size, x.size))
    mode_residuals = {}
    initial_violation = 0.0
    for sol in grid.solutions:
        if operator_values is not None and sol.m in operator_values:
            values = np.asarray(operator_values[sol.m])
        else:
            values = modal_operator(sol, spec, t, nodes=nodes)
        lhs += np.outer(values, np.sin(sol.m * np.pi * x))
        fm = grid.forcing_modes.get(sol.m)
        target = np.zeros_like(values) if fm is None else fm.derivative(0)(t)
        mode_residuals[sol.m] = float(np.max(np.abs(values - target)))

        start = np.asarray(sol.derivatives(np.zeros(1), spec.k)[:, 0])
        wanted = np.asarray(spec.initial_for(sol.m))
        initial_violation = max(initial_violation, float(np.max(np.abs(start - wanted))))

    if spec.forcing is not None:
        f = spec.forcing(t[:, None], x[None, :])
    else:
        f = np.zeros_like(lhs)
    residual = (lhs - f)[1:, interior]
    scale = float(np.max(np.abs(f[1:, interior]))) if f.size else 0.0
    grid_sup = float(np.max(np.abs(residual)))
    edges = (x == 0.0) | (x == 1.0)
    boundary = float(np.max(np.abs(grid.u[:, edges]))) if edges.any() else 0.0
    return ResidualReport(
        mode_residuals=mode_residuals,
        grid_sup=grid_sup,
        grid_rms=float(np.sqrt(np.mean(residual**2))),
        grid_relative=grid_sup / scale if scale > 0 else grid_sup,
        boundary_violation=boundary,
        initial_violation=initial_violation,
        modes=len(grid.solutions),
        quadrature_nodes=nodes,
    )


@dataclass(frozen=True)
class DecayReport:
    """Empirical decay of the modal solutions against ``M / (m pi)^4`` bounds.

    ``solution_bound``, ``curvature_bound`` and ``cf_bound`` are the smallest
    constants making ``sup|T_m|``, ``(m pi)^2 sup|T_m|`` and
    ``sup|D^alpha T_m|`` respect ``M/(m pi)^4``, ``M/(m pi)^2`` and
    ``M/(m pi)^4`` over the computed modes.
    """

    magnitudes: dict[int, float]
    slope: float
    intercept: float
    fitted_modes: tuple[int, ...]
    solution_bound: float
    curvature_bound: float
    cf_bound: float
    bounded: bool
    forcing_slope: float | None = None

    @property
    def certified(self) -> bool:
        threshold = DECAY_TARGET + DECAY_SLACK
        forcing_ok = self.forcing_slope is None or self.forcing_slope <= threshold
        return self.slope <= threshold and self.bounded and forcing_ok

    def as_dict(self) -> dict:
        return {
            "magnitudes": {str(m): v for m, v in sorted(self.magnitudes.items())},
            "slope": self.slope,
            "intercept": self.intercept,
            "fitted_modes": list(self.fitted_modes),
            "forcing_slope": self.forcing_slope,
            "solution_bound": self.solution_bound,
            "curvature_bound": self.curvature_bound,
            "cf_bound": self.cf_bound,
            "bounded": self.bounded,
            "certified": self.certified,
        }


def _fit_slope(magnitudes: Mapping[int, float], m_lo: int) -> tuple[float, float, tuple]:
    """Least-squares line through ``(log m, log v)`` for the non-negligible tail.

    A tail with fewer than 5 measurable modes (e.g. single-mode forcing) has
    nothing to fit and decays trivially: the slope is reported as ``-inf``.
    """
    peak = max(magnitudes.values())
    # modes killed by symmetry sit at round-off level and carry no decay information
    usable = sorted(
        m for m, v in magnitudes.items() if m >= m_lo and v > 1e-10 * peak and v > 0
    )
    if len(usable) < 5:
        return -math.inf, -math.inf, ()
    logm = np.log(usable)
    logv = np.log([magnitudes[m] for m in usable])
    slope, intercept = np.polyfit(logm, logv, 1)
    return float(slope), float(intercept), tuple(usable)


def decay_check(
    solutions: Sequence["TemporalSolution"],
    spec: ProblemSpec,
    *,
    m_lo: int = 4,
    samples: int = 1025,
    cf_samples: int = 9,
    nodes: int = DEFAULT_NODES,
) -> DecayReport:
    """Fit ``log sup|T_m|`` against ``log m`` and report empirical bound constants."""
    if len(solutions) < 8:
        raise InsufficientModesError(f"decay check needs at least 8 modes, got {len(solutions)}")
    t = np.linspace(0.0, spec.q, samples)
    t_cf = np.linspace(0.0, spec.q, cf_samples)
    magnitudes, cf_peaks = {}, {}
    for sol in solutions:
        magnitudes[sol.m] = float(np.max(np.abs(sol(t))))
        g = as_sampled(sol, nodes=nodes)
        cf_peaks[sol.m] = max(abs(cf_derivative(g, spec.order, float(tt))) for tt in t_cf)

    peak = max(magnitudes.values())
    if peak == 0.0:
        slope, intercept, fitted = -math.inf, -math.inf, ()
    else:
        slope, intercept, fitted = _fit_slope(magnitudes, m_lo)
    scaled = {m: v * (m * math.pi) ** 4 for m, v in magnitudes.items()}

    modes = sorted(scaled)
    half = len(modes) // 2
    head = max(scaled[m] for m in modes[:half])
    tail = max(scaled[m] for m in modes[half:])

    forcing_slope = None
    if spec.forcing is not None and peak > 0.0:
        coeffs = np.array(
            [sine_coefficients(spec.forcing, len(modes), float(tt)) for tt in t_cf]
        )
        forcing_peaks = dict(zip(range(1, len(modes) + 1), np.max(np.abs(coeffs), axis=0)))
        forcing_slope = _fit_slope(forcing_peaks, m_lo)[0]

    return DecayReport(
        magnitudes=magnitudes,
        slope=slope,
        intercept=intercept,
        fitted_modes=fitted,
        solution_bound=max(scaled.values()),
        curvature_bound=max(
            (m * math.pi) ** 2 * v * (m * math.pi) ** 2 for m, v in magnitudes.items()
        ),
        cf_bound=max(v * (m * math.pi) ** 4 for m, v in cf_peaks.items()),
        bounded=bool(tail <= head * (1 + 1e-9)),
        forcing_slope=forcing_slope,
    )
