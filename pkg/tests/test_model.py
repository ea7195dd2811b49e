import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recsolve.dsl import parse_bool, parse_expr
from recsolve.model import (
    Call,
    Const,
    EvalError,
    Mul,
    Var,
    eval_bool,
    eval_ground,
    free_vars,
    substitute,
)


def test_square_at_five():
    assert eval_ground(parse_expr("x^2"), {"x": 5}) == 25


def test_ceil_log2_at_five():
    assert eval_ground(parse_expr("ceil(log2(x))"), {"x": 5}) == 3


def test_additive_identity_with_zero_coefficient():
    assert eval_ground(parse_expr("x + 0*y"), {"x": 7, "y": 9}) == 7


def test_exact_integer_results_on_exact_ops():
    e = parse_expr("floor(3*x) + ceil(y) + max(x, y) + fact(x) - min(x, y)")
    v = eval_ground(e, {"x": 4, "y": 2})
    assert isinstance(v, int)
    assert v == 12 + 2 + 4 + 24 - 2


def test_division_keeps_exact_rationals():
    v = eval_ground(parse_expr("1/3"), {})
    assert v == Fraction(1, 3)


def test_log2_power_of_two_is_exact_int():
    assert eval_ground(parse_expr("log2(x)"), {"x": 8}) == 3


def test_log2_domain_error_and_guard():
    with pytest.raises(EvalError):
        eval_ground(parse_expr("log2(x)"), {"x": 0})
    assert eval_ground(parse_expr("log2(x)"), {"x": 0}, guarded=True) == 0


def test_division_by_zero_error_and_guard():
    with pytest.raises(EvalError):
        eval_ground(parse_expr("x/y"), {"x": 3, "y": 0})
    assert eval_ground(parse_expr("x/y"), {"x": 3, "y": 0}, guarded=True) == 0


def test_factorial_domain_errors():
    with pytest.raises(EvalError):
        eval_ground(parse_expr("fact(x)"), {"x": -1})
    with pytest.raises(EvalError):
        eval_ground(parse_expr("(1/2)!"), {})


def test_overflow_is_an_error_not_a_wrap():
    with pytest.raises(EvalError) as exc:
        eval_ground(parse_expr("2^x"), {"x": 1000})
    assert exc.value.kind == "overflow"


def test_integer_sqrt_exact_on_perfect_squares():
    assert eval_ground(parse_expr("floor(x^(1/2))"), {"x": 16}) == 4
    assert eval_ground(parse_expr("floor(x^(1/2))"), {"x": 17}) == 4


def test_eval_bool_examples():
    assert eval_bool(parse_bool("x = 0"), {"x": 0}) is True
    assert eval_bool(parse_bool("x > 0 and y > 0"), {"x": 3, "y": 0}) is False
    assert eval_bool(parse_bool("x + y >= 1"), {"x": 0, "y": 1}) is True


def test_substitute_examples():
    e = parse_expr("f(x-1)")
    out = substitute(e, {"x": parse_expr("y+1")})
    assert out == parse_expr("f((y+1)-1)")
    x = parse_expr("x")
    assert substitute(x, {}) == x


def test_substitution_then_eval_matches_merged_env():
    e = parse_expr("x*y + 2*x")
    bound = substitute(e, {"x": Const(Fraction(3))})
    assert eval_ground(bound, {"y": 4}) == eval_ground(e, {"x": 3, "y": 4})


def test_free_vars_examples():
    assert free_vars(parse_expr("f(f(x-1)) + 1")) == {"x"}
    assert free_vars(parse_expr("7")) == set()
    assert free_vars(parse_expr("max(x, y*z)")) == {"x", "y", "z"}


def test_call_in_ground_eval_is_an_error():
    with pytest.raises(EvalError):
        eval_ground(Call("f", (Var("x"),)), {"x": 1})


_SIMPLE = st.sampled_from(
    [
        "x + y",
        "x*y - 3",
        "max(x, y) + min(x, y)",
        "floor((x + y)/2)",
        "x^2 + 2*x + 1",
        "fact(min(x, 6))",
        "ceil(x/3) * y",
    ]
)


@given(_SIMPLE, st.integers(0, 30), st.integers(0, 30))
@settings(max_examples=60, deadline=None)
def test_eval_ground_is_deterministic(src, x, y):
    e = parse_expr(src)
    env = {"x": x, "y": y}
    assert eval_ground(e, env) == eval_ground(e, env)


@given(st.integers(0, 20), st.integers(0, 20))
@settings(max_examples=40, deadline=None)
def test_substitute_commutes_with_eval(x, y):
    e = parse_expr("x*y + max(x, 3) - min(y, 2)")
    partial = substitute(e, {"x": Const(Fraction(x))})
    assert eval_ground(partial, {"y": y}) == eval_ground(e, {"x": x, "y": y})


def test_exactness_closure_on_integer_ops():
    e = parse_expr("floor(x) + ceil(y) + fact(min(x,5)) + max(x,y) - x*y")
    v = eval_ground(e, {"x": 6, "y": 3})
    assert isinstance(v, int)
