from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmfix.errors import ExpressionDomainError, ExpressionSyntaxError
from pmfix.expr import BinOp, Num, Var, parse_expression, render

# (source, t, value) computed by hand
REFERENCE = [
    ("t/(1+t)", 1.0, 0.5),
    ("t", 3.5, 3.5),
    ("0.5*t", 4.0, 2.0),
    ("t^2", 3.0, 9.0),
    ("t**2", 3.0, 9.0),
    ("-t^2", 3.0, -9.0),
    ("2^3^2", 0.0, 512.0),
    ("(2^3)^2", 0.0, 64.0),
    ("1 - 2 - 3", 0.0, -4.0),
    ("8 / 4 / 2", 0.0, 1.0),
    ("2 + 3 * 4", 0.0, 14.0),
    ("(2 + 3) * 4", 0.0, 20.0),
    ("sqrt(t)", 16.0, 4.0),
    ("abs(-t)", 2.5, 2.5),
    ("min(t, 1)", 3.0, 1.0),
    ("max(t/2, 0, 1)", 4.0, 2.0),
    ("exp(0)", 7.0, 1.0),
    ("log(exp(t))", 2.0, 2.0),
    ("t*(1-exp(-t))", 0.0, 0.0),
    ("--t", 5.0, 5.0),
]


@pytest.mark.parametrize("src,t,value", REFERENCE)
def test_reference_table(src, t, value):
    assert parse_expression(src).evaluate(t) == pytest.approx(value, abs=1e-12)


def test_reference_table_size():
    assert len(REFERENCE) == 20


def test_tree_shape():
    e = parse_expression("t/(1+t)")
    assert e.root == BinOp("/", Var("t"), BinOp("+", Num(1.0), Var("t")))


def test_map_expression():
    e = parse_expression("max(x/2, 0)", ("x",))
    assert e.evaluate(3.0, "x") == 1.5


@pytest.mark.parametrize(
    "src,pos",
    [("t *", 3), ("(t", 2), ("t +* 2", 3), ("foo(t)", 0), ("t $ 2", 2), ("y + 1", 0), ("exp(t, 1)", 0), ("", 0)],
)
def test_syntax_errors(src, pos):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(src)
    assert info.value.position == pos
    assert f"offset {pos}" in str(info.value)


def test_syntax_error_lists_expected():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("t *")
    assert "number" in info.value.expected


@pytest.mark.parametrize("src,t", [("1/t", 0.0), ("log(t)", 0.0), ("sqrt(t)", -1.0), ("t^0.5", -4.0),
                                   ("t^-1", 0.0), ("exp(t)", 1000.0)])
def test_domain_errors(src, t):
    with pytest.raises(ExpressionDomainError):
        parse_expression(src).evaluate(t)


def test_vectorised_evaluation():
    e = parse_expression("t/(1+t)")
    ts = np.linspace(0, 5, 11)
    np.testing.assert_allclose(e.evaluate(ts), ts / (1 + ts))
    assert parse_expression("2").evaluate(ts).shape == ts.shape


# random expression trees for the round-trip property
_leaf = st.one_of(
    st.floats(0, 1e6, allow_nan=False).map(lambda v: repr(v)),
    st.just("t"),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*", "/", "^"]), children).map(lambda p: f"({p[0]} {p[1]} {p[2]})"),
        children.map(lambda c: f"-{c}"),
        children.map(lambda c: f"sqrt({c})"),
        st.tuples(children, children).map(lambda p: f"max({p[0]}, {p[1]})"),
    )


EXPRS = st.recursive(_leaf, _combine, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(EXPRS)
def test_round_trip_is_stable(src):
    first = parse_expression(src)
    text = render(first.root)
    second = parse_expression(text)
    assert second.root == first.root
    assert render(second.root) == text


@settings(max_examples=200, deadline=None)
@given(EXPRS, st.floats(0, 10))
def test_round_trip_preserves_values(src, t):
    first = parse_expression(src)
    second = parse_expression(str(first))
    try:
        a = first.evaluate(t)
    except ExpressionDomainError:
        with pytest.raises(ExpressionDomainError):
            second.evaluate(t)
        return
    b = second.evaluate(t)
    assert a == b or (math.isnan(a) and math.isnan(b))
