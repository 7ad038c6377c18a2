from __future__ import annotations

import math

import numpy as np
import pytest

from cfheat.cf_operator import (
    DerivativeOrderError,
    FiniteDifferenceWarning,
    FractionalOrder,
    SampledFunction,
    cf_derivative,
    cf_derivative_higher,
    cf_expansion,
    neg_beta_powers,
)
from oracles import cf_quad, random_smooth_functions

HALF = FractionalOrder(0.5)


def poly(*derivs):
    """SampledFunction from explicit evaluators ``g, g', ...``."""
    return SampledFunction(func=derivs[0], derivatives=list(derivs[1:]))


def test_order_validation():
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            FractionalOrder(bad)
    assert FractionalOrder(0.5).beta == 1.0
    assert FractionalOrder(0.9).beta == pytest.approx(9.0)


def test_constant_has_zero_derivative():
    g = poly(lambda t: 3.0 + 0 * t, lambda t: 0 * t)
    for alpha in (0.1, 0.5, 0.9):
        assert cf_derivative(g, FractionalOrder(alpha), 0.8) == 0.0


def test_linear_closed_form():
    g = poly(lambda t: t, lambda t: np.ones_like(t))
    assert cf_derivative(g, HALF, 1.0) == pytest.approx(2 * (1 - math.exp(-1)), rel=1e-12)
    assert cf_derivative(g, HALF, 1.0) == pytest.approx(1.264241, abs=1e-6)


def test_exponential_closed_form():
    g = poly(lambda t: np.exp(t), lambda t: np.exp(t))
    assert cf_derivative(g, HALF, 1.0) == pytest.approx(math.sinh(1) / 0.5, rel=1e-12)


def test_higher_order_examples():
    lin = poly(lambda t: t, lambda t: np.ones_like(t), lambda t: np.zeros_like(t))
    assert cf_derivative_higher(lin, FractionalOrder(0.3), 1, 0.7) == 0.0

    sq = poly(lambda t: t**2, lambda t: 2 * t, lambda t: 2 + 0 * t)
    expected = 2 * 2 * (1 - math.exp(-1))
    assert cf_derivative_higher(sq, HALF, 1, 1.0) == pytest.approx(expected, rel=1e-12)
    assert cf_expansion(sq, HALF, 1, 1.0) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.528482, abs=1e-6)

    cube = poly(lambda t: t**3, lambda t: 3 * t**2, lambda t: 6 * t, lambda t: 6 + 0 * t)
    expected = 6 * 2 * (1 - math.exp(-1))  # 7.5854467...
    assert cf_derivative_higher(cube, HALF, 2, 1.0) == pytest.approx(expected, rel=1e-12)


def test_expansion_of_zero():
    zero = poly(*[lambda t: np.zeros_like(t)] * 4)
    for n in range(3):
        assert cf_expansion(zero, FractionalOrder(0.4), n, 1.3) == 0.0


def test_expansion_matches_direct_for_sine():
    g = poly(np.sin, np.cos)
    order = FractionalOrder(0.3)
    direct = cf_derivative(g, order, 0.7)
    assert cf_expansion(g, order, 0, 0.7) == pytest.approx(direct, rel=1e-6)
    assert direct == pytest.approx(cf_quad(np.cos, 0.3, 0.7), rel=1e-10)


def test_zero_at_base_point():
    g = SampledFunction(np.exp, [np.exp, np.exp, np.exp], a=0.25)
    for n in range(3):
        assert cf_derivative_higher(g, HALF, n, 0.25) == 0.0
        assert cf_expansion(g, HALF, n, 0.25) == pytest.approx(0.0, abs=1e-15)


def test_domain_and_resolution_errors():
    g = poly(np.sin, np.cos)
    with pytest.raises(ValueError):
        cf_derivative(g, HALF, -0.1)
    with pytest.raises(ValueError):
        SampledFunction(np.sin, [np.cos], nodes=1)
    with pytest.raises(DerivativeOrderError):
        cf_derivative_higher(g, HALF, 1, 0.5)
    with pytest.raises(DerivativeOrderError):
        cf_derivative(SampledFunction(np.sin), HALF, 0.5)


def test_finite_difference_fallback_warns():
    g = SampledFunction(np.sin, allow_finite_differences=True)
    with pytest.warns(FiniteDifferenceWarning):
        value = cf_derivative(g, HALF, 1.0)
    assert value == pytest.approx(cf_quad(np.cos, 0.5, 1.0), rel=1e-6)


def test_linearity():
    f = poly(np.sin, np.cos)
    h = poly(lambda t: t**3, lambda t: 3 * t**2)
    combo = poly(lambda t: 2 * np.sin(t) - 3 * t**3, lambda t: 2 * np.cos(t) - 9 * t**2)
    order = FractionalOrder(0.7)
    lhs = cf_derivative(combo, order, 1.1)
    rhs = 2 * cf_derivative(f, order, 1.1) - 3 * cf_derivative(h, order, 1.1)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_neg_beta_powers_signs():
    powers = neg_beta_powers(2.0, 5)
    assert powers == [1.0, -2.0, 4.0, -8.0, 16.0]


def test_trapezoid_order_two():
    g = poly(np.exp, np.exp)
    exact = cf_quad(np.exp, 0.4, 1.5)
    errors = []
    for nodes in (65, 129, 257):
        coarse = SampledFunction(np.exp, [np.exp], nodes=nodes, richardson=False)
        errors.append(abs(cf_derivative(coarse, FractionalOrder(0.4), 1.5) - exact))
    rates = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert all(1.9 < r < 2.1 for r in rates)
    # Richardson lifts it to Simpson accuracy
    assert abs(cf_derivative(g, FractionalOrder(0.4), 1.5) - exact) < 1e-12


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_routes_agree_on_random_functions(alpha, n):
    order = FractionalOrder(alpha)
    for label, derivs in random_smooth_functions(12, seed=11):
        g = SampledFunction(derivs[0], derivs[1:])
        for t in (0.3, 1.0, 2.0):
            direct = cf_derivative_higher(g, order, n, t)
            expansion = cf_expansion(g, order, n, t)
            assert abs(direct - expansion) <= 1e-6 * (1 + abs(direct)), label
            reference = cf_quad(derivs[n + 1], alpha, t)
            assert abs(direct - reference) <= 1e-9 * (1 + abs(reference)), label
