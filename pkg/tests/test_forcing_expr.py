from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfheat import forcing_expr as fe
from corpus import EXPRESSIONS

RNG = np.random.default_rng(20240517)
POINTS = RNG.uniform(0.1, 0.9, size=(20, 2))
FD_STEP = 1e-5


def test_parse_variable():
    assert fe.parse("x") == fe.Var("x")


def test_parse_and_evaluate_product():
    e = fe.parse("sin(pi*x)*t^2")
    assert isinstance(e, fe.BinOp) and e.op == "*"
    assert fe.evaluate(e, 2.0, 0.5) == pytest.approx(4.0)


@pytest.mark.parametrize(
    "text, offset",
    [("sin(", 4), ("t +", 3), ("(x", 2), ("2 ** x", 3), ("t^x", 2), ("x y", 2)],
)
def test_syntax_errors_are_positioned(text, offset):
    with pytest.raises(fe.ExprSyntaxError) as info:
        fe.parse(text)
    assert info.value.offset == offset


def test_sin_open_paren_expects_expression():
    with pytest.raises(fe.ExprSyntaxError, match="expected expression"):
        fe.parse("sin(")


def test_unknown_identifier():
    with pytest.raises(fe.UnknownIdentifierError) as info:
        fe.parse("t + foo")
    assert info.value.offset == 4


@pytest.mark.parametrize(
    "text, t, x, expected",
    [("exp(0)", 0.0, 0.0, 1.0), ("t^3 - x", 2.0, 1.0, 7.0), ("-t^2", 3.0, 0.0, -9.0)],
)
def test_evaluate(text, t, x, expected):
    assert fe.evaluate(fe.parse(text), t, x) == pytest.approx(expected)


def test_division_by_zero_is_an_error():
    with pytest.raises(fe.EvaluationError):
        fe.evaluate(fe.parse("1/(x-x)"), 0.3, 0.4)


def test_precedence_and_associativity():
    assert fe.evaluate(fe.parse("2 - 3 - 4"), 0, 0) == -5
    assert fe.evaluate(fe.parse("8 / 4 / 2"), 0, 0) == 1
    assert fe.evaluate(fe.parse("2^3^2"), 0, 0) == 64  # chains to the left
    assert fe.evaluate(fe.parse("-2^2"), 0, 0) == -4


def test_evaluate_broadcasts():
    t = np.linspace(0, 1, 5)[:, None]
    x = np.linspace(0, 1, 3)[None, :]
    out = fe.evaluate(fe.parse("t*x + 1"), t, x)
    assert out.shape == (5, 3)
    np.testing.assert_allclose(out, t * x + 1)


def test_derivative_examples():
    assert fe.evaluate(fe.differentiate(fe.parse("x"), "t"), 0.2, 0.3) == 0
    d = fe.differentiate(fe.parse("t^2*sin(pi*x)"), "t")
    assert fe.evaluate(d, 3.0, 0.5) == pytest.approx(6.0)
    d4 = fe.differentiate(fe.parse("sin(pi*x)"), "x", 4)
    assert fe.evaluate(d4, 0.0, 0.5) == pytest.approx(math.pi**4)
    assert fe.evaluate(d4, 0.0, 0.5) == pytest.approx(97.409091, rel=1e-7)


def test_folding_rules():
    assert fe.fold(fe.parse("0*t + x")) == fe.Var("x")
    assert fe.fold(fe.parse("1*x")) == fe.Var("x")
    assert fe.fold(fe.parse("x + 0")) == fe.Var("x")
    assert fe.differentiate(fe.parse("t^2"), "x") == fe.Num(0.0)


def test_order_bound():
    with pytest.raises(ValueError):
        fe.differentiate(fe.parse("t"), "t", fe.MAX_DERIVATIVE_ORDER + 1)


def _central(e, var, t, x):
    if var == "t":
        return (fe.evaluate(e, t + FD_STEP, x) - fe.evaluate(e, t - FD_STEP, x)) / (2 * FD_STEP)
    return (fe.evaluate(e, t, x + FD_STEP) - fe.evaluate(e, t, x - FD_STEP)) / (2 * FD_STEP)


def derivative_mismatch(text: str) -> float:
    """Worst ``|symbolic - central| / (1 + |symbolic|)`` over the sample points."""
    e = fe.parse(text)
    worst = 0.0
    for var in ("t", "x"):
        d = fe.differentiate(e, var)
        for t, x in POINTS:
            sym = float(fe.evaluate(d, t, x))
            worst = max(worst, abs(sym - _central(e, var, t, x)) / (1 + abs(sym)))
    return worst


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_symbolic_matches_finite_differences(text):
    assert derivative_mismatch(text) <= 1e-6


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_round_trip(text):
    e = fe.parse(text)
    assert fe.parse(fe.to_string(e)) == e


@pytest.mark.parametrize("text", EXPRESSIONS)
def test_mixed_partials_commute(text):
    e = fe.parse(text)
    tx = fe.differentiate(fe.differentiate(e, "t"), "x")
    xt = fe.differentiate(fe.differentiate(e, "x"), "t")
    for t, x in POINTS[:5]:
        assert fe.evaluate(tx, t, x) == pytest.approx(fe.evaluate(xt, t, x), rel=1e-12, abs=1e-12)


# {{{ generated trees

leaves = st.one_of(
    st.builds(fe.Num, st.floats(0, 10, allow_nan=False).map(lambda v: round(v, 3))),
    st.just(fe.Pi()),
    st.sampled_from([fe.Var("t"), fe.Var("x")]),
)


def _extend(children):
    return st.one_of(
        st.builds(fe.Neg, children),
        st.builds(fe.BinOp, st.sampled_from("+-*"), children, children),
        st.builds(fe.Pow, children, st.integers(0, 3)),
        st.builds(fe.Call, st.sampled_from(["sin", "cos"]), children),
    )


trees = st.recursive(leaves, _extend, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(trees)
def test_generated_round_trip(e):
    assert fe.parse(fe.to_string(e)) == e


@settings(max_examples=200, deadline=None)
@given(trees)
def test_folding_is_sound(e):
    folded = fe.fold(e)
    for t, x in POINTS[:3]:
        assert fe.evaluate(folded, t, x) == pytest.approx(
            fe.evaluate(e, t, x), rel=1e-12, abs=1e-12
        )


# }}}
