"""Caputo-Fabrizio derivatives of order ``alpha + n``.

Two independent routes are provided:

* :func:`cf_derivative` / :func:`cf_derivative_higher` integrate the
  exponential kernel against a classical derivative of ``g`` directly;
* :func:`cf_expansion` uses the integration-by-parts expansion, which only
  needs ``g`` itself under the integral sign.

Each serves as the other's oracle in the tests.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from cfheat.quadrature import integrate

__all__ = [
    "FractionalOrder",
    "SampledFunction",
    "DerivativeOrderError",
    "FiniteDifferenceWarning",
    "cf_derivative",
    "cf_derivative_higher",
    "cf_expansion",
    "neg_beta_powers",
]

DEFAULT_NODES = 2**12

Evaluator = Callable[[np.ndarray], np.ndarray]


class DerivativeOrderError(ValueError):
    """Raised when a derivative beyond the declared order is requested."""


class FiniteDifferenceWarning(UserWarning):
    """The derivative under the integral was approximated by finite differences."""


@dataclass(frozen=True)
class FractionalOrder:
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")

    @property
    def beta(self) -> float:
        """Kernel decay rate ``alpha / (1 - alpha)``."""
        return self.alpha / (1.0 - self.alpha)


@dataclass(frozen=True)
class SampledFunction:
    """A function ``g`` on ``[a, inf)`` together with its known derivatives.

    ``derivatives[j - 1]`` evaluates ``g^(j)``. All evaluators must accept
    numpy arrays. ``nodes`` is the number of quadrature points on ``[a, t]``.
    """

    func: Evaluator
    derivatives: Sequence[Evaluator] = ()
    a: float = 0.0
    nodes: int = DEFAULT_NODES
    richardson: bool = True
    allow_finite_differences: bool = False

    def __post_init__(self):
        if self.nodes < 2:
            raise ValueError(f"quadrature needs at least 2 nodes, got {self.nodes}")

    @property
    def order(self) -> int:
        return len(self.derivatives)

    def derivative(self, j: int) -> Evaluator:
        if j == 0:
            return self.func
        if j > self.order:
            raise DerivativeOrderError(
                f"derivative of order {j} requested but only {self.order} declared"
            )
        return self.derivatives[j - 1]


def neg_beta_powers(beta: float, count: int) -> list[float]:
    """``[(-beta)**0, ..., (-beta)**(count - 1)]`` by repeated multiplication."""
    powers = [1.0]
    for _ in range(count - 1):
        powers.append(powers[-1] * -beta)
    return powers


def _sample(f: Evaluator, s: np.ndarray) -> np.ndarray:
    # evaluators of constants may hand back scalars
    return np.broadcast_to(np.asarray(f(s), dtype=float), np.shape(s))


def _check_time(g: SampledFunction, t: float) -> None:
    if t < g.a:
        raise ValueError(f"t={t} lies before the base point a={g.a}")


def _kernel_integral(
    integrand: Evaluator, g: SampledFunction, beta: float, t: float
) -> float:
    """``int_a^t integrand(s) exp(-beta (t - s)) ds``."""
    return integrate(
        lambda s: _sample(integrand, s) * np.exp(-beta * (t - s)),
        g.a,
        t,
        g.nodes - 1,
        richardson=g.richardson,
    )


def _finite_difference_derivative(g: SampledFunction) -> Evaluator:
    warnings.warn(
        "no analytic derivative available; using finite differences",
        FiniteDifferenceWarning,
        stacklevel=3,
    )

    def gprime(s):
        # second-order central in the interior, one-sided at the ends
        return np.gradient(_sample(g.func, s), s, edge_order=2)

    return gprime


def cf_derivative(g: SampledFunction, order: FractionalOrder, t: float) -> float:
    """Caputo-Fabrizio derivative of order ``alpha`` of ``g`` at ``t``."""
    _check_time(g, t)
    if t == g.a:
        return 0.0
    if g.order >= 1:
        gprime = g.derivative(1)
    elif g.allow_finite_differences:
        gprime = _finite_difference_derivative(g)
    else:
        raise DerivativeOrderError("g exposes no first derivative")
    return _kernel_integral(gprime, g, order.beta, t) / (1.0 - order.alpha)


def cf_derivative_higher(
    g: SampledFunction, order: FractionalOrder, n: int, t: float
) -> float:
    """Derivative of order ``alpha + n``, i.e. ``cf_derivative`` of ``g^(n)``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n == 0:
        return cf_derivative(g, order, t)
    inner = g.derivative(n + 1)
    _check_time(g, t)
    if t == g.a:
        return 0.0
    return _kernel_integral(inner, g, order.beta, t) / (1.0 - order.alpha)


def cf_expansion(g: SampledFunction, order: FractionalOrder, n: int, t: float) -> float:
    r"""Derivative of order ``alpha + n`` through the integration-by-parts expansion.

    .. math::

        \frac{1}{1-\alpha}\Big\{\sum_{i=0}^{n} (-\beta)^i
            \big[g^{(n-i)}(t) - g^{(n-i)}(a) e^{-\beta(t-a)}\big]
            + (-\beta)^{n+1} \int_a^t g(s) e^{-\beta(t-s)}\,ds\Big\}
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    _check_time(g, t)
    beta = order.beta
    powers = neg_beta_powers(beta, n + 2)
    decay = math.exp(-beta * (t - g.a))
    at_t = np.array([t])
    at_a = np.array([g.a])

    total = 0.0
    for i in range(n + 1):
        dg = g.derivative(n - i)
        total += powers[i] * (_sample(dg, at_t)[0] - _sample(dg, at_a)[0] * decay)
    if t > g.a:
        total += powers[n + 1] * _kernel_integral(g.func, g, beta, t)
    return float(total) / (1.0 - order.alpha)
