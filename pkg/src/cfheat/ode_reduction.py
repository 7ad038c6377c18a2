"""Reduction of the modal fractional IVP to an integer-order ODE.

With ``beta = alpha / (1 - alpha)`` and ``Tt(t) = T(t) exp(beta t)``, the
multi-term equation for mode ``m``

    sum_n lambda_n D^{alpha+n} T + (m pi)^2 T = f_m

becomes, after integrating by parts, multiplying by ``(1 - alpha) e^{beta t}``
and differentiating once, the constant-coefficient equation

    sum_r B_r Tt^(r) = [alpha f_m + (1 - alpha) f_m'] e^{beta t}

of order ``k + 1``. Coefficient vectors are returned in descending derivative
order and normalized so the leading entry is 1 (numpy polynomial order).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from cfheat.cf_operator import FractionalOrder, neg_beta_powers
from cfheat.spectral import ForcingField, ModalCoefficients

__all__ = [
    "ProblemSpec",
    "ModeODE",
    "raw_coefficients",
    "transform_coefficients",
    "transformed_rhs",
    "transform_initial_conditions",
    "inverse_transform_initial_conditions",
    "inverse_transform",
    "reduce_mode",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Full description of a multi-term problem on ``(0, q) x (0, 1)``.

    ``initial`` maps a mode index to ``(T_m(0), T_m'(0), ..., T_m^(k)(0))``;
    modes that are not listed start from rest.
    """

    order: FractionalOrder
    k: int
    lambdas: tuple[float, ...]
    q: float = 1.0
    forcing: ForcingField | None = None
    initial: Mapping[int, Sequence[float]] = field(default_factory=dict)
    modes: int = 1
    nt: int = 20
    nx: int = 20

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if len(self.lambdas) != self.k + 1:
            raise ValueError(
                f"expected {self.k + 1} lambdas for k={self.k}, got {len(self.lambdas)}"
            )
        if self.lambdas[-1] == 0.0:
            raise ValueError("leading coefficient lambda_k must be nonzero")
        if not self.q > 0:
            raise ValueError(f"horizon q must be positive, got {self.q}")
        if self.modes < 1:
            raise ValueError(f"need at least one mode, got {self.modes}")
        for m, values in self.initial.items():
            if len(values) != self.k + 1:
                raise ValueError(
                    f"initial data for mode {m} must have length {self.k + 1}, "
                    f"got {len(values)}"
                )

    @property
    def alpha(self) -> float:
        return self.order.alpha

    @property
    def beta(self) -> float:
        return self.order.beta

    def initial_for(self, m: int) -> tuple[float, ...]:
        return tuple(float(v) for v in self.initial.get(m, (0.0,) * (self.k + 1)))


@dataclass(frozen=True)
class ModeODE:
    """``Tt^(n) + c_1 Tt^(n-1) + ... + c_n Tt = rhs(t)`` for a single mode.

    ``coefficients`` is ``(1, c_1, ..., c_n)``; ``initial`` holds
    ``Tt^(j)(0)`` for ``j < n``.
    """

    m: int
    coefficients: np.ndarray
    rhs: Callable[[np.ndarray], np.ndarray]
    initial: tuple[float, ...]
    beta: float
    q: float = 1.0

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=float)
        if coefficients[0] != 1.0:
            raise ValueError("ODE coefficients must be monic")
        if len(self.initial) != coefficients.size - 1:
            raise ValueError(
                f"order {coefficients.size - 1} ODE needs {coefficients.size - 1} "
                f"initial values, got {len(self.initial)}"
            )
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def order(self) -> int:
        return self.coefficients.size - 1

    @property
    def physical_initial(self) -> tuple[float, ...]:
        """``T^(j)(0)`` recovered from the transformed values."""
        return inverse_transform_initial_conditions(self.initial, self.beta)


def raw_coefficients(spec: ProblemSpec, m: int) -> np.ndarray:
    """Unnormalized coefficients ``(B_{k+1}, ..., B_0)`` of the reduced ODE."""
    beta = spec.beta
    k = spec.k
    powers = neg_beta_powers(beta, k + 2)
    # ascending: ascending[r] multiplies Tt^(r) after the t-differentiation
    ascending = [0.0] * (k + 2)
    for n, lam in enumerate(spec.lambdas):
        for i in range(n + 1):
            for j in range(n - i + 1):
                ascending[j + 1] += lam * powers[i] * math.comb(n - i, j) * powers[n - i - j]
        ascending[0] += lam * powers[n + 1]
    ascending[1] += (m * math.pi) ** 2 * (1.0 - spec.alpha)
    return np.array(ascending[::-1])


def _leading(spec: ProblemSpec, m: int) -> float:
    lead = raw_coefficients(spec, m)[0]
    if lead == 0.0:
        raise ValueError(f"reduced ODE for mode {m} has a vanishing leading coefficient")
    return lead


def transform_coefficients(spec: ProblemSpec, m: int) -> np.ndarray:
    """Monic coefficients ``(1, A_1, ..., A_{k+1})`` for mode ``m``."""
    raw = raw_coefficients(spec, m)
    if raw[0] == 0.0:
        raise ValueError(f"reduced ODE for mode {m} has a vanishing leading coefficient")
    return raw / raw[0]


def transformed_rhs(spec: ProblemSpec, fm: ModalCoefficients, t):
    """``[alpha f_m + (1 - alpha) f_m'] e^{beta t}`` over the leading coefficient."""
    t = np.asarray(t, dtype=float)
    alpha = spec.alpha
    value = fm.derivative(0)(t)
    slope = fm.derivative(1)(t)
    return (alpha * value + (1.0 - alpha) * slope) * np.exp(spec.beta * t) / _leading(
        spec, fm.m
    )


def transform_initial_conditions(C: Sequence[float], beta: float) -> tuple[float, ...]:
    """``Tt^(j)(0) = sum_i binom(j, i) beta^(j-i) C_i`` (product rule on ``T e^{beta t}``)."""
    return tuple(
        sum(math.comb(j, i) * beta ** (j - i) * C[i] for i in range(j + 1))
        for j in range(len(C))
    )


def inverse_transform_initial_conditions(
    Ct: Sequence[float], beta: float
) -> tuple[float, ...]:
    return transform_initial_conditions(Ct, -beta)


def inverse_transform(value, beta: float, t):
    """Undo the exponential substitution: ``value * exp(-beta t)``."""
    return value * np.exp(-beta * np.asarray(t, dtype=float))


def reduce_mode(spec: ProblemSpec, m: int, fm: ModalCoefficients | None) -> ModeODE:
    """Build the reduced IVP for mode ``m``; ``fm=None`` means zero forcing."""
    if fm is not None and fm.m != m:
        raise ValueError(f"modal forcing is for mode {fm.m}, not {m}")
    raw = raw_coefficients(spec, m)
    lead = _leading(spec, m)
    if fm is None:
        def rhs(t):
            return np.zeros(np.shape(t))
    else:
        value, slope = fm.derivative(0), fm.derivative(1)
        alpha, beta = spec.alpha, spec.beta

        def rhs(t):
            t = np.asarray(t, dtype=float)
            return (alpha * value(t) + (1.0 - alpha) * slope(t)) * np.exp(beta * t) / lead

    return ModeODE(
        m=m,
        coefficients=raw / lead,
        rhs=rhs,
        initial=transform_initial_conditions(spec.initial_for(m), spec.beta),
        beta=spec.beta,
        q=spec.q,
    )
