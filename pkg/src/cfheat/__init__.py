"""Spectral solver for the multi-term time-fractional heat equation with
Caputo-Fabrizio derivatives."""
from __future__ import annotations

from cfheat.cf_operator import (
    FractionalOrder,
    SampledFunction,
    cf_derivative,
    cf_derivative_higher,
    cf_expansion,
)
from cfheat.ode_reduction import ModeODE, ProblemSpec, reduce_mode, transform_coefficients
from cfheat.pipeline import SolutionGrid, solve_problem
from cfheat.spectral import (
    ForcingField,
    project_forcing,
    sine_coefficients,
    synthesize,
    validate_compatibility,
)
from cfheat.temporal_solver import (
    RootCase,
    classify_cubic,
    solve_mode,
    solve_mode_closed_form,
    solve_mode_companion,
)
from cfheat.verifier import decay_check, mode_residual, pde_residual

__all__ = [
    "FractionalOrder",
    "SampledFunction",
    "cf_derivative",
    "cf_derivative_higher",
    "cf_expansion",
    "ModeODE",
    "ProblemSpec",
    "reduce_mode",
    "transform_coefficients",
    "SolutionGrid",
    "solve_problem",
    "ForcingField",
    "project_forcing",
    "sine_coefficients",
    "synthesize",
    "validate_compatibility",
    "RootCase",
    "classify_cubic",
    "solve_mode",
    "solve_mode_closed_form",
    "solve_mode_companion",
    "decay_check",
    "mode_residual",
    "pde_residual",
]
