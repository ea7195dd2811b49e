import math
import random
from fractions import Fraction

import numpy as np
import pytest

from recsolve import dsl
from recsolve.dsl import parse, parse_expr, print_expr, print_piecewise
from recsolve.linear import (
    AllPruned,
    FeatureSet,
    LassoConfig,
    TrainingSet,
    build_training_set,
    catalog_for,
    cv_lasso,
    guess_linear,
    ols_refit,
    prune,
    r2_score,
    rationalize,
    rationalize_value,
)
from recsolve.model import eval_ground
from recsolve.evaluator import Evaluator

from conftest import EQ1, MAXVAR, MERGE, MINVAR


# -- catalogs -----------------------------------------------------------------


def test_catalog_m1_large_has_eleven_functions():
    cats = catalog_for(1)
    assert cats["small"].count == 2
    assert cats["medium"].count == 5
    assert cats["large"].count == 11
    texts = [print_expr(t) for t in cats["large"].base_functions]
    assert "5^x" in texts
    assert "x!" in texts


def test_catalog_m2():
    cats = catalog_for(2)
    assert [print_expr(t) for t in cats["small"].base_functions] == ["x", "y"]
    assert cats["medium"].count == 8
    assert cats["large"].count == 23
    texts = [print_expr(t) for t in cats["large"].base_functions]
    assert "max(x, y)" in texts
    assert "floor(x/y)" in texts


def test_catalog_m3_small_is_variable_products():
    cats = catalog_for(3)
    texts = {print_expr(t) for t in cats["small"].base_functions}
    assert texts == {"x", "y", "z", "x*y", "x*z", "y*z", "x*y*z"}


def test_catalog_tiers_nest():
    for m in (1, 2, 3, 4):
        cats = catalog_for(m)
        small = set(cats["small"].base_functions)
        medium = set(cats["medium"].base_functions)
        large = set(cats["large"].base_functions)
        assert small <= medium <= large
        assert len(large) == len(set(large))  # distinct


# -- training sets ------------------------------------------------------------


def _section2_features():
    return FeatureSet(
        "demo",
        tuple(
            parse_expr(s)
            for s in ["x", "x^2", "x^3", "ceil(log2(x))", "2^x", "x*ceil(log2(x))"]
        ),
    )


def test_training_row_matches_worked_example(eq1):
    ev = Evaluator(eq1.system)
    value = ev.eval_fun("f", (5,))
    T = build_training_set(_section2_features(), ("x",), [(5,), (6,)], [value, 6])
    assert list(T.X[0]) == [5.0, 25.0, 125.0, 3.0, 32.0, 15.0]
    assert T.y[0] == 5.0


def test_guarded_log2_at_one_and_zero():
    fs = FeatureSet("demo", (parse_expr("x"), parse_expr("ceil(log2(x))")))
    T = build_training_set(fs, ("x",), [(1,), (0,), (4,)], [1, 0, 4])
    assert list(T.X[0]) == [1.0, 0.0]
    assert list(T.X[1]) == [0.0, 0.0]  # log2 guard keeps the row
    assert T.dropped_rows == 0


def test_nonfinite_rows_dropped_with_flag():
    fs = FeatureSet("demo", (parse_expr("x!"),))
    T = build_training_set(fs, ("x",), [(2,), (200,), (3,)], [1, 1, 2])
    assert T.n == 2
    assert T.dropped_rows == 1


# -- lasso / prune / refit ------------------------------------------------------


def _ols_oracle(X, y):
    """Independent least-squares via numpy lstsq on the augmented matrix."""
    A = np.hstack([np.ones((len(y), 1)), X])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return coef


def test_planted_quadratic_support_recovery():
    xs = [(i,) for i in range(1, 51)]
    ys = [2 * i * i + 3 for i in range(1, 51)]
    fs = FeatureSet("demo", (parse_expr("x"), parse_expr("x^2"), parse_expr("ceil(log2(x))")))
    T = build_training_set(fs, ("x",), xs, ys)
    res = cv_lasso(T, LassoConfig())
    fs2, T2 = prune(fs, T, res.beta, res.beta0, 0.05)
    assert [print_expr(t) for t in fs2.base_functions] == ["x^2"]
    model = ols_refit(T2, None)
    oracle = _ols_oracle(T2.X, T2.y)
    assert abs(model.coefficients[0] - 2) < 1e-3
    assert abs(model.coefficients[0] - oracle[1]) < 1e-9
    assert abs(model.intercept - oracle[0]) < 1e-9


def test_constant_targets_give_intercept_only():
    fs = FeatureSet("demo", (parse_expr("x"),))
    T = build_training_set(fs, ("x",), [(i,) for i in range(10)], [7] * 10)
    res = cv_lasso(T, LassoConfig())
    assert np.allclose(res.beta, 0)
    assert abs(res.beta0 - 7) < 1e-12


def test_lasso_path_sanity_all_zero_at_huge_lambda():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(60, 6))
    y = X @ np.array([1.0, -2.0, 0, 0, 3.0, 0]) + 0.01 * rng.normal(size=60)
    fs = FeatureSet("demo", tuple(parse_expr(f"x{i}") for i in range(6)))
    T = TrainingSet(fs.base_functions, X, y, [tuple(r) for r in X])
    big = cv_lasso(T, LassoConfig(lambda_grid=(1e9,)))
    assert np.allclose(big.beta, 0)
    assert abs(big.beta0 - y.mean()) < 1e-9


def test_lasso_support_nonincreasing_in_lambda():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(80, 5))
    y = X @ np.array([2.0, 0, 0, -1.0, 0]) + 0.01 * rng.normal(size=80)
    fs = tuple(parse_expr(f"x{i}") for i in range(5))
    counts = []
    for lam in [1e6, 1e3, 10.0, 0.1, 0.001]:
        T = TrainingSet(fs, X, y, [tuple(r) for r in X])
        res = cv_lasso(T, LassoConfig(lambda_grid=(lam,)))
        counts.append(int(np.sum(np.abs(res.beta) > 1e-10)))
    assert counts == sorted(counts)


def test_degenerate_feature_dropped():
    fs = FeatureSet("demo", (parse_expr("x"), parse_expr("0*x")))
    X = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]])
    T = TrainingSet(fs.base_functions, X, np.array([2.0, 4.0, 6.0, 8.0]), [(1,), (2,), (3,), (4,)])
    res = cv_lasso(T, LassoConfig())
    assert res.dropped_features == (1,)
    assert res.beta[1] == 0.0


def test_prune_threshold_semantics():
    fs = FeatureSet("demo", tuple(parse_expr(s) for s in ["x", "x^2", "y"]))
    X = np.ones((4, 3))
    T = TrainingSet(fs.base_functions, X, np.ones(4), [(1, 1)] * 4)
    fs2, T2 = prune(fs, T, np.array([0.02, 1.0, 0.04]), 0.0, 0.05)
    assert [print_expr(t) for t in fs2.base_functions] == ["x^2"]
    assert T2.X.shape == (4, 1)


def test_prune_epsilon_zero_is_identity():
    fs = FeatureSet("demo", (parse_expr("x"),))
    X = np.ones((3, 1))
    T = TrainingSet(fs.base_functions, X, np.ones(3), [(1,)] * 3)
    fs2, _ = prune(fs, T, np.array([0.0]), 0.0, 0.0)
    assert fs2.base_functions == fs.base_functions


def test_prune_monotone_in_epsilon():
    fs = FeatureSet("demo", tuple(parse_expr(s) for s in ["x", "y", "x*y"]))
    beta = np.array([0.03, 0.5, 0.08])
    X = np.ones((3, 3))
    T = TrainingSet(fs.base_functions, X, np.ones(3), [(1, 1)] * 3)
    survive = {}
    for eps in (0.01, 0.05, 0.2):
        fs2, _ = prune(fs, T, beta, 0.0, eps)
        survive[eps] = set(fs2.base_functions)
    assert survive[0.2] <= survive[0.05] <= survive[0.01]


def test_all_pruned_raises():
    fs = FeatureSet("demo", (parse_expr("x"),))
    X = np.ones((3, 1))
    T = TrainingSet(fs.base_functions, X, np.ones(3), [(1,)] * 3)
    with pytest.raises(AllPruned):
        prune(fs, T, np.array([0.01]), 0.0, 0.05)


def test_ols_exact_line():
    fs = FeatureSet("demo", (parse_expr("x"),))
    X = np.array([[float(i)] for i in range(10)])
    T = TrainingSet(fs.base_functions, X, 2 * X[:, 0] + 3, [(i,) for i in range(10)])
    model = ols_refit(T, None)
    assert abs(model.coefficients[0] - 2) < 1e-9
    assert abs(model.intercept - 3) < 1e-9


def test_r2_degenerate_convention():
    assert r2_score(np.array([7.0, 7.0]), np.array([7.0, 7.0])) == 1.0
    assert r2_score(np.array([7.0, 7.0]), np.array([8.0, 8.0])) == -math.inf


def test_intercept_only_on_constant_test_set():
    fs = FeatureSet("demo", ())
    T = TrainingSet((), np.zeros((4, 0)), np.full(4, 3.0), [(0,)] * 4)
    Ttest = TrainingSet((), np.zeros((5, 0)), np.full(5, 3.0), [(0,)] * 5)
    model = ols_refit(T, Ttest)
    assert model.score == 1.0


# -- rationalization ------------------------------------------------------------


def _cf_convergents(v, max_den):
    """Independent continued-fraction oracle: best rational approximations
    with denominator bounded by max_den."""
    from fractions import Fraction as F

    a = []
    x = v
    h_prev, h = 1, int(math.floor(x))
    k_prev, k = 0, 1
    best = F(h, 1)
    for _ in range(30):
        frac = x - math.floor(x)
        if frac < 1e-15:
            break
        x = 1.0 / frac
        ai = int(math.floor(x))
        h_prev, h = h, ai * h + h_prev
        k_prev, k = k, ai * k + k_prev
        if k > max_den:
            break
        best = F(h, k)
    return best


def test_rationalize_nearest_integer():
    assert rationalize_value(0.9999997) == 1


def test_rationalize_third_matches_cf_oracle():
    v = 0.3333339
    assert rationalize_value(v) == Fraction(1, 3)
    assert _cf_convergents(v, 64) == Fraction(1, 3)


def test_rationalize_nine_twentieths():
    v = 0.45
    assert rationalize_value(v) == Fraction(9, 20)
    assert _cf_convergents(v, 64) == Fraction(9, 20)


def test_rationalize_rejects_far_values():
    assert rationalize_value(0.337) is None  # no denominator <= 64 this close


def test_rationalize_model_drops_near_zero_and_marks_floats():
    from recsolve.linear import LinearModel

    m = LinearModel(
        intercept=1e-9,
        coefficients=np.array([1.0000000002, 0.337]),
        selected=(parse_expr("x"), parse_expr("y")),
        score=1.0,
    )
    piece = rationalize(m)
    assert not piece.exact_coeffs
    text = print_expr(piece.body)
    assert text.startswith("x") or "1*x" not in text


# -- end-to-end guesser -----------------------------------------------------------


def test_guess_linear_worked_example(eq1):
    out = guess_linear(eq1.system)
    assert out.score == 1.0
    assert len(out.candidate.pieces) == 1
    piece = out.candidate.pieces[0]
    assert print_expr(piece.body) == "x"
    assert dsl.print_bool(piece.domain) == "x >= 1"


def test_guess_linear_determinized_pair():
    mx = parse(MAXVAR)
    out = guess_linear(mx.system)
    assert print_expr(out.candidate.pieces[0].body) == "2*x"
    mn = parse(MINVAR)
    out = guess_linear(mn.system)
    assert print_expr(out.candidate.pieces[0].body) == "x"


def test_guess_linear_merge_split(merge):
    out = guess_linear(merge.system, domsplit=True)
    assert out.score == 1.0
    bodies = [print_expr(p.body) for p in out.candidate.pieces]
    assert bodies == ["x + y - 1", "0"]


def test_guess_linear_deterministic(eq1):
    a = guess_linear(eq1.system)
    b = guess_linear(eq1.system)
    assert print_piecewise(a.candidate) == print_piecewise(b.candidate)
    assert a.score == b.score


def test_r2_one_implies_pointwise_agreement(eq1):
    """Test-set R^2 of 1 transfers to fresh in-domain points."""
    out = guess_linear(eq1.system)
    assert out.score == 1.0
    ev = Evaluator(eq1.system)
    body = out.candidate.pieces[0].body
    rng = random.Random(0)
    for _ in range(200):
        x = rng.randint(1, 20)
        lhs = float(ev.eval_fun("f", (x,)))
        rhs = float(eval_ground(body, {"x": x}, guarded=True))
        assert math.isclose(lhs, rhs, rel_tol=1e-6, abs_tol=1e-9)
