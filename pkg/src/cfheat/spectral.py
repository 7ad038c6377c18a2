"""Fourier sine analysis and synthesis on ``0 <= x <= 1``.

Coefficients use the normalized convention

    f_m(t) = 2 * int_0^1 f(t, x) sin(m pi x) dx,

so that ``f = sum_m f_m sin(m pi x)`` for admissible ``f``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from cfheat import forcing_expr as fe
from cfheat.cf_operator import FiniteDifferenceWarning

__all__ = [
    "ForcingField",
    "ModalCoefficients",
    "CompatibilityReport",
    "ConditionResult",
    "DerivativeUnavailableError",
    "sine_coefficients",
    "synthesize",
    "decay_factors",
    "validate_compatibility",
    "project_forcing",
    "max_modes",
]

DEFAULT_X_NODES = 1025
DEFAULT_T_TABLE = 4096
NODES_PER_WAVELENGTH = 16
COMPATIBILITY_SAMPLES = 129


class DerivativeUnavailableError(ValueError):
    pass


class ForcingField:
    """``f(t, x)`` on ``[0, q] x [0, 1]`` with symbolic partial derivatives.

    Built from an expression string (or :mod:`cfheat.forcing_expr` tree);
    a bare callable is accepted too, in which case only ``f`` itself is
    available and derivative requests raise
    :class:`DerivativeUnavailableError`.
    """

    def __init__(self, source, q: float = 1.0):
        if q <= 0:
            raise ValueError(f"horizon q must be positive, got {q}")
        self.q = float(q)
        if isinstance(source, str):
            source = fe.parse(source)
        if callable(source):
            self.expr = None
            self._func = source
        else:
            self.expr = source
            self._func = None
        self._partials: dict[tuple[int, int], object] = {}

    def __repr__(self):
        body = fe.to_string(self.expr) if self.expr is not None else repr(self._func)
        return f"ForcingField({body!r}, q={self.q})"

    @property
    def symbolic(self) -> bool:
        return self.expr is not None

    def partial_expr(self, nt: int = 0, nx: int = 0):
        if self.expr is None:
            raise DerivativeUnavailableError("forcing has no symbolic form")
        key = (nt, nx)
        if key not in self._partials:
            e = fe.differentiate(self.expr, "t", nt) if nt else self.expr
            self._partials[key] = fe.differentiate(e, "x", nx) if nx else fe.fold(e)
        return self._partials[key]

    def partial(self, nt: int = 0, nx: int = 0) -> Callable:
        """Evaluator of ``d^(nt+nx) f / dt^nt dx^nx``."""
        if self.expr is None:
            if (nt, nx) != (0, 0):
                raise DerivativeUnavailableError(
                    f"d^{nt}/dt^{nt} d^{nx}/dx^{nx} needs a symbolic forcing"
                )
            func = self._func
            return lambda t, x: np.broadcast_to(
                np.asarray(func(t, x), dtype=float), np.broadcast(t, x).shape
            )
        e = self.partial_expr(nt, nx)
        return lambda t, x: np.broadcast_to(
            np.asarray(fe.evaluate(e, t, x), dtype=float), np.broadcast(t, x).shape
        )

    def __call__(self, t, x):
        return self.partial(0, 0)(t, x)


@dataclass(frozen=True)
class ModalCoefficients:
    """Time trace of one sine coefficient and (optionally) its derivatives."""

    m: int
    value: Callable[[np.ndarray], np.ndarray]
    first: Callable[[np.ndarray], np.ndarray] | None = None
    second: Callable[[np.ndarray], np.ndarray] | None = None
    approximate: bool = False

    def derivative(self, order: int) -> Callable[[np.ndarray], np.ndarray]:
        trace = (self.value, self.first, self.second)[order]
        if trace is None:
            raise DerivativeUnavailableError(
                f"mode {self.m} has no derivative trace of order {order}"
            )
        return trace


# {{{ quadrature in x


def max_modes(x_nodes: int = DEFAULT_X_NODES) -> int:
    """Largest mode resolved with the required nodes per wavelength."""
    return 2 * (x_nodes - 1) // NODES_PER_WAVELENGTH


def _simpson_weights(x_nodes: int) -> np.ndarray:
    if x_nodes < 3 or x_nodes % 2 == 0:
        raise ValueError(f"Simpson needs an odd node count >= 3, got {x_nodes}")
    w = np.ones(x_nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * (x_nodes - 1))


def _projection_matrix(m_max: int, x_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if m_max < 1:
        raise ValueError(f"need at least one mode, got {m_max}")
    if m_max > max_modes(x_nodes):
        raise ValueError(
            f"{m_max} modes exceed the {max_modes(x_nodes)} resolvable with "
            f"{x_nodes} x-nodes"
        )
    x = np.linspace(0.0, 1.0, x_nodes)
    m = np.arange(1, m_max + 1)
    basis = np.sin(np.pi * np.outer(x, m))
    return x, 2.0 * _simpson_weights(x_nodes)[:, None] * basis


def _project(evaluator, t: np.ndarray, m_max: int, x_nodes: int, chunk: int = 512):
    x, weights = _projection_matrix(m_max, x_nodes)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((t.size, m_max))
    for start in range(0, t.size, chunk):
        tt = t[start : start + chunk, None]
        out[start : start + chunk] = evaluator(tt, x[None, :]) @ weights
    return out


def sine_coefficients(
    f: ForcingField, m_max: int, t: float, *, x_nodes: int = DEFAULT_X_NODES
) -> np.ndarray:
    """``[f_1(t), ..., f_{m_max}(t)]`` by composite Simpson quadrature in x."""
    if not 0.0 <= t <= f.q:
        raise ValueError(f"t={t} outside [0, {f.q}]")
    return _project(f.partial(0, 0), np.array([t]), m_max, x_nodes)[0]


def decay_factors(
    f: ForcingField, m: int, t: float, *, x_nodes: int = DEFAULT_X_NODES
) -> tuple[float, float, float]:
    """Sine coefficients of ``f_xxxx``, ``f_txxxx`` and ``f_ttxxxx`` for mode ``m``.

    For forcing compatible at the boundary, ``f_m(t) == f40 / (m pi)^4``.
    """
    if not 0.0 <= t <= f.q:
        raise ValueError(f"t={t} outside [0, {f.q}]")
    values = [
        _project(f.partial(nt, 4), np.array([t]), m, x_nodes)[0, m - 1]
        for nt in (0, 1, 2)
    ]
    return tuple(float(v) for v in values)


# }}}


def synthesize(
    modal_values: Mapping[int, Sequence[float]] | Iterable[tuple[int, Sequence[float]]],
    x: Sequence[float],
) -> np.ndarray:
    """``u[i, j] = sum_m T_m(t_i) sin(m pi x_j)``, exactly zero at ``x = 0, 1``."""
    items = modal_values.items() if isinstance(modal_values, Mapping) else modal_values
    x = np.asarray(x, dtype=float)
    u = None
    for m, trace in items:
        trace = np.atleast_1d(np.asarray(trace, dtype=float))
        if u is None:
            u = np.zeros((trace.size, x.size))
        elif trace.size != u.shape[0]:
            raise ValueError(
                f"mode {m} has {trace.size} time samples, expected {u.shape[0]}"
            )
        u += np.outer(trace, np.sin(m * np.pi * x))
    if u is None:
        raise ValueError("no modal values given")
    u[:, (x == 0.0) | (x == 1.0)] = 0.0
    return u


# {{{ compatibility


@dataclass(frozen=True)
class ConditionResult:
    name: str
    max_violation: float
    passed: bool


@dataclass(frozen=True)
class CompatibilityReport:
    conditions: tuple[ConditionResult, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failures(self) -> list[ConditionResult]:
        return [c for c in self.conditions if not c.passed]


def validate_compatibility(
    f: ForcingField, tol: float = 1e-10, *, samples: int = COMPATIBILITY_SAMPLES
) -> CompatibilityReport:
    """Check the seven boundary/initial conditions on the forcing.

    ``f_t``, ``f_tt`` and ``f_ttt`` must vanish at ``t = 0``; ``f`` and
    ``f_xx`` must vanish on ``x = 0`` and ``x = 1``. Each condition is
    sampled on ``samples`` points of its edge.
    """
    x = np.linspace(0.0, 1.0, samples)
    t = np.linspace(0.0, f.q, samples)
    checks = [
        ("f_t(0,x)=0", f.partial(1, 0), 0.0, x),
        ("f_tt(0,x)=0", f.partial(2, 0), 0.0, x),
        ("f_ttt(0,x)=0", f.partial(3, 0), 0.0, x),
        ("f(t,0)=0", f.partial(0, 0), t, 0.0),
        ("f(t,1)=0", f.partial(0, 0), t, 1.0),
        ("f_xx(t,0)=0", f.partial(0, 2), t, 0.0),
        ("f_xx(t,1)=0", f.partial(0, 2), t, 1.0),
    ]
    results = []
    for name, func, tt, xx in checks:
        violation = float(np.max(np.abs(func(tt, xx))))
        results.append(ConditionResult(name, violation, bool(violation <= tol)))
    return CompatibilityReport(tuple(results), tol)


# }}}


# {{{ sampled modal traces


def project_forcing(
    f: ForcingField,
    m_max: int,
    *,
    t_intervals: int = DEFAULT_T_TABLE,
    x_nodes: int = DEFAULT_X_NODES,
) -> list[ModalCoefficients]:
    """Tabulate ``f_m``, ``f_m'`` on a uniform t-grid and interpolate.

    Each trace is a cubic Hermite interpolant of the projected values and
    their projected time derivatives. Without a symbolic forcing, ``f_m'``
    falls back to central differences with step ``q / t_intervals`` and the
    traces are flagged approximate.
    """
    t = np.linspace(0.0, f.q, t_intervals + 1)
    values = _project(f.partial(0, 0), t, m_max, x_nodes)
    approximate = not f.symbolic
    if f.symbolic:
        first = _project(f.partial(1, 0), t, m_max, x_nodes)
        second = _project(f.partial(2, 0), t, m_max, x_nodes)
    else:
        warnings.warn(
            "forcing has no symbolic form; f_m' from finite differences",
            FiniteDifferenceWarning,
            stacklevel=2,
        )
        first = np.gradient(values, t, axis=0, edge_order=2)
        second = np.gradient(first, t, axis=0, edge_order=2)

    traces = []
    for i in range(m_max):
        fm = CubicHermiteSpline(t, values[:, i], first[:, i])
        dfm = CubicHermiteSpline(t, first[:, i], second[:, i])
        traces.append(
            ModalCoefficients(
                m=i + 1,
                value=fm,
                first=dfm,
                second=dfm.derivative(),
                approximate=approximate,
            )
        )
    return traces


# }}}
