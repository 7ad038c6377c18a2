"""Composite trapezoid quadrature on uniform grids, with optional Richardson.

One Richardson step on the trapezoid rule is Simpson's rule; both the
Caputo-Fabrizio operator and the modal particular solutions go through the
helpers here so they share a single error model.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["trapezoid", "integrate", "simpson_panels"]


def trapezoid(values: np.ndarray, h: float) -> float:
    """Composite trapezoid sum of uniformly spaced samples (last axis)."""
    values = np.asarray(values)
    return h * (values[..., 1:-1].sum(axis=-1) + 0.5 * (values[..., 0] + values[..., -1]))


def integrate(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    intervals: int,
    *,
    richardson: bool = False,
) -> float:
    """Integrate ``func`` over ``[a, b]`` with ``intervals`` trapezoid panels.

    With ``richardson=True`` the rule is evaluated on ``intervals`` and
    ``2 * intervals`` panels and combined as ``(4 T_fine - T_coarse) / 3``.
    """
    if intervals < 1:
        raise ValueError(f"need at least one interval, got {intervals}")
    if b == a:
        return 0.0
    if not richardson:
        s = np.linspace(a, b, intervals + 1)
        return float(trapezoid(func(s), (b - a) / intervals))

    s = np.linspace(a, b, 2 * intervals + 1)
    values = func(s)
    h = (b - a) / (2 * intervals)
    fine = trapezoid(values, h)
    coarse = trapezoid(values[::2], 2 * h)
    return float((4.0 * fine - coarse) / 3.0)


def simpson_panels(left, mid, right, width):
    """Per-panel Simpson sums (trapezoid plus one Richardson step)."""
    return width / 6.0 * (left + 4.0 * mid + right)
