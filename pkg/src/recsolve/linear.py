"""Sparse linear guessing: fit an affine combination of base functions to
sampled recurrence values, select features by l1 regularization with
cross-validated penalty choice, epsilon-prune, then refit by plain least
squares and rationalize the surviving coefficients.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .evaluator import EvalBudget, Evaluator
from .model import (
    Add,
    BoolExpr,
    Call,
    Ceil,
    Const,
    Div,
    EvalError,
    Expr,
    Factorial,
    Floor,
    FuncDef,
    Log2,
    Max,
    Mul,
    Piece,
    PiecewiseClosedForm,
    Pow,
    RecurrenceSystem,
    TRUE,
    Var,
    eval_ground,
)
from .rewrite import simplify
from .sampler import (
    BoundChoice,
    EmptyDomain,
    SampleConfig,
    Subdomain,
    choose_bound,
    positive_orthant,
    sample_for_function,
    split_domains,
)

TIERS = ("small", "medium", "large")


class EmptyTrainingSet(Exception):
    pass


class AllPruned(Exception):
    pass


class FitTimeout(Exception):
    pass


@dataclass(frozen=True)
class FeatureSet:
    tier: str
    base_functions: tuple[Expr, ...]

    @property
    def count(self) -> int:
        return len(self.base_functions)


@dataclass(frozen=True)
class LassoConfig:
    lambda_grid: tuple[float, ...] = tuple(np.geomspace(0.001, 1.0, 100))
    folds: int = 2
    epsilon: float = 0.05
    fit_timeout: float = 10.0
    seed: int = 0
    max_sweeps: int = 10_000
    tol: float = 1e-8

    def __post_init__(self):
        grid = tuple(float(v) for v in self.lambda_grid)
        if not grid or any(v < 0 for v in grid):
            raise ValueError("lambda grid must be non-empty and non-negative")
        object.__setattr__(self, "lambda_grid", grid)
        if self.folds < 2:
            raise ValueError("k-fold cross-validation needs k >= 2")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


@dataclass
class TrainingSet:
    features: tuple[Expr, ...]
    X: np.ndarray
    y: np.ndarray
    inputs: list[tuple[int, ...]]
    dropped_rows: int = 0

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass
class LinearModel:
    intercept: float
    coefficients: np.ndarray
    selected: tuple[Expr, ...]
    score: float
    tier: str = ""

    def predict_rows(self, X: np.ndarray) -> np.ndarray:
        if len(self.selected) == 0:
            return np.full(X.shape[0] if X.ndim == 2 else len(X), self.intercept)
        return self.intercept + X @ self.coefficients


# ---------------------------------------------------------------------------
# Base-function catalogs
# ---------------------------------------------------------------------------


def _v(name: str) -> Var:
    return Var(name)


def _sq(e: Expr) -> Expr:
    return Pow(e, Const(Fraction(2)))


def _pow(e: Expr, k: int) -> Expr:
    return e if k == 1 else Pow(e, Const(Fraction(k)))


MAX_CATALOG = 20_000


class CatalogTooLarge(Exception):
    pass


def catalog(params: tuple[str, ...]) -> dict[str, FeatureSet]:
    """Tiered base functions over the given parameters (see catalog_tier)."""
    return {tier: catalog_tier(params, tier) for tier in TIERS}


def catalog_tier(params: tuple[str, ...], tier: str) -> FeatureSet:
    """Base functions of one tier over the given parameters.

    Dimensions 1 and 2 are explicit lists; higher dimensions are bounded
    products of per-variable powers.  Combinatorial blowup past MAX_CATALOG
    raises CatalogTooLarge, which fitting treats like a timeout.
    """
    m = len(params)
    if m > 2:
        depth = {"small": 1, "medium": 2, "large": 3}[tier]
        return FeatureSet(tier, tuple(_monomials(params, depth)))
    full = _explicit_catalog(params)
    return full[tier]


def _explicit_catalog(params: tuple[str, ...]) -> dict[str, FeatureSet]:
    m = len(params)
    if m == 1:
        (x,) = (_v(params[0]),)
        small = [x, _sq(x)]
        medium = small + [
            Ceil(Log2(x)),
            Floor(Pow(x, Const(Fraction(1, 2)))),
            Mul(x, Ceil(Log2(x))),
        ]
        large = medium + [
            Floor(Log2(x)),
            Mul(x, Floor(Log2(x))),
            Pow(Const(Fraction(2)), x),
            Pow(Const(Fraction(5)), x),
            Mul(x, Pow(Const(Fraction(2)), x)),
            Factorial(x),
        ]
    elif m == 2:
        x, y = _v(params[0]), _v(params[1])
        small = [x, y]
        medium = small + [
            _sq(x),
            Mul(x, y),
            _sq(y),
            Mul(_sq(x), y),
            Mul(x, _sq(y)),
            Mul(_sq(x), _sq(y)),
        ]
        large = medium + [
            Floor(Div(x, y)),
            Floor(Div(y, x)),
            Ceil(Div(x, y)),
            Ceil(Div(y, x)),
            Pow(Const(Fraction(2)), x),
            Pow(Const(Fraction(2)), y),
            Max(x, y),
            Ceil(Log2(x)),
            Floor(Log2(x)),
            Mul(x, Ceil(Log2(x))),
            Mul(x, Floor(Log2(x))),
            Ceil(Log2(y)),
            Floor(Log2(y)),
            Mul(y, Ceil(Log2(y))),
            Mul(y, Floor(Log2(y))),
        ]
    else:
        raise AssertionError("explicit catalogs cover m <= 2 only")
    return {
        "small": FeatureSet("small", tuple(small)),
        "medium": FeatureSet("medium", tuple(medium)),
        "large": FeatureSet("large", tuple(large)),
    }


# Minimal number of distinct power factors {x, x^2, .., x^d} multiplying to
# each achievable exponent; caps the product length below.
_PARTS = {
    1: {0: 0, 1: 1},
    2: {0: 0, 1: 1, 2: 1, 3: 2},
    3: {0: 0, 1: 1, 2: 1, 3: 1, 4: 2, 5: 2, 6: 3},
}


def _monomials(params: tuple[str, ...], depth: int) -> list[Expr]:
    m = len(params)
    cap = m + depth  # product length limit: arity + |base set|
    parts = _PARTS[depth]
    exps = sorted(parts)
    out: list[tuple[int, tuple[int, ...]]] = []

    def grow(prefix: tuple[int, ...], used: int):
        if len(out) > MAX_CATALOG:
            raise CatalogTooLarge(f"{len(params)}-ary {depth}")
        if len(prefix) == m:
            if any(prefix):
                out.append((sum(prefix), prefix))
            return
        for e in exps:
            cost = parts[e]
            if used + cost <= cap:
                grow(prefix + (e,), used + cost)

    grow((), 0)
    out.sort()
    exprs = []
    for _, combo in out:
        factors = [_pow(_v(p), e) for p, e in zip(params, combo) if e > 0]
        prod = factors[0]
        for f in factors[1:]:
            prod = Mul(prod, f)
        exprs.append(prod)
    return exprs


def catalog_for(m: int) -> dict[str, FeatureSet]:
    names = ("x",) if m == 1 else ("x", "y") if m == 2 else ("x", "y", "z")[:m]
    if m > 3:
        names = tuple(f"x{i+1}" for i in range(m))
    return catalog(names)


# ---------------------------------------------------------------------------
# Training sets
# ---------------------------------------------------------------------------


def build_training_set(
    fs: FeatureSet,
    params: tuple[str, ...],
    samples: list[tuple[int, ...]],
    values,
    deadline: float | None = None,
) -> TrainingSet:
    """Evaluate base functions at each sample under guarded semantics
    (log2 is 0 below 1, division by zero is 0, integer square roots exact);
    rows with non-finite entries are dropped and counted."""
    rows: list[list[float]] = []
    ys: list[float] = []
    kept_inputs: list[tuple[int, ...]] = []
    dropped = 0
    nchecks = 0
    for tup, val in zip(samples, values):
        if deadline is not None and time.monotonic() > deadline:
            raise FitTimeout("feature evaluation exceeded the fit timeout")
        env = dict(zip(params, tup))
        row: list[float] = []
        ok = True
        for t in fs.base_functions:
            nchecks += 1
            if (
                deadline is not None
                and nchecks % 4096 == 0
                and time.monotonic() > deadline
            ):
                raise FitTimeout("feature evaluation exceeded the fit timeout")
            try:
                fv = float(eval_ground(t, env, guarded=True))
            except (EvalError, OverflowError):
                ok = False
                break
            if not math.isfinite(fv):
                ok = False
                break
            row.append(fv)
        try:
            yv = float(val)
        except OverflowError:
            ok = False
            yv = 0.0
        if not ok or not math.isfinite(yv):
            dropped += 1
            continue
        rows.append(row)
        ys.append(yv)
        kept_inputs.append(tup)
    if len(rows) < 2:
        raise EmptyTrainingSet(f"{len(rows)} usable rows")
    return TrainingSet(
        features=fs.base_functions,
        X=np.asarray(rows, dtype=float),
        y=np.asarray(ys, dtype=float),
        inputs=kept_inputs,
        dropped_rows=dropped,
    )


# ---------------------------------------------------------------------------
# Lasso via cyclic coordinate descent
# ---------------------------------------------------------------------------


@dataclass
class LassoResult:
    beta: np.ndarray  # raw feature scale, zeros for dropped features
    beta0: float
    chosen_lambda: float
    dropped_features: tuple[int, ...] = ()


def _cd_kernel_py(G, c, n, thr, beta, max_sweeps, tol):
    p = len(c)
    v = G @ beta if beta.any() else np.zeros(p)
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in range(p):
            bj = beta[j]
            zj = c[j] - v[j] + n * bj
            new = math.copysign(max(abs(zj) - thr, 0.0), zj) / n
            if new != bj:
                v += G[:, j] * (new - bj)
                beta[j] = new
                delta = abs(new - bj)
                if delta > max_delta:
                    max_delta = delta
        if max_delta < tol:
            break
    return beta


try:  # the JIT kernel keeps the 10^4-sweep cap affordable on wide catalogs
    from numba import njit

    @njit(cache=True)
    def _cd_kernel_jit(G, c, n, thr, beta, max_sweeps, tol):  # pragma: no cover
        p = len(c)
        v = G @ beta
        for _ in range(max_sweeps):
            max_delta = 0.0
            for j in range(p):
                bj = beta[j]
                zj = c[j] - v[j] + n * bj
                az = abs(zj) - thr
                if az > 0.0:
                    new = az / n if zj > 0 else -az / n
                else:
                    new = 0.0
                if new != bj:
                    d = new - bj
                    for k in range(p):
                        v[k] += G[k, j] * d
                    beta[j] = new
                    ad = abs(d)
                    if ad > max_delta:
                        max_delta = ad
            if max_delta < tol:
                break
        return beta

    _cd_kernel = _cd_kernel_jit
except Exception:  # pragma: no cover
    _cd_kernel = _cd_kernel_py


def _cd_lasso_std(G, c, n, lam, beta, max_sweeps, tol, deadline=None):
    """Minimize sum((yc - Xs b)^2) + lam*sum|b| on standardized columns by
    cyclic coordinate descent with soft thresholding (Gram form)."""
    if deadline is not None and time.monotonic() > deadline:
        raise FitTimeout("coordinate descent exceeded the fit timeout")
    return _cd_kernel(
        np.ascontiguousarray(G),
        np.ascontiguousarray(c),
        float(n),
        lam / 2.0,
        beta,
        max_sweeps,
        tol,
    )


def cv_lasso(
    T: TrainingSet,
    cfg: LassoConfig,
    folds: list[list[int]] | None = None,
    deadline: float | None = None,
) -> LassoResult:
    """Pick the penalty by k-fold cross-validation (ties toward the sparser,
    larger penalty), then fit on all rows at the chosen value."""
    n, p = T.X.shape
    if n < cfg.folds:
        raise EmptyTrainingSet(f"{n} rows for {cfg.folds}-fold CV")
    sd = T.X.std(axis=0)
    keep = sd > 0.0
    dropped = tuple(int(i) for i in np.nonzero(~keep)[0])
    X = T.X[:, keep]
    p_eff = X.shape[1]

    if folds is None:
        order = list(range(n))
        random.Random(cfg.seed).shuffle(order)
        folds = [order[i :: cfg.folds] for i in range(cfg.folds)]

    grid = sorted(set(cfg.lambda_grid), reverse=True)
    best_lam, best_mse = grid[0], math.inf
    if p_eff > 0:
        fold_data = []
        for val_idx in folds:
            val = np.asarray(val_idx, dtype=int)
            mask = np.ones(n, dtype=bool)
            mask[val] = False
            Xtr, ytr = X[mask], T.y[mask]
            mu, s = Xtr.mean(axis=0), Xtr.std(axis=0)
            s = np.where(s > 0, s, 1.0)
            Xs = (Xtr - mu) / s
            # solve in units of std(y): identical objective (beta = ysd*beta',
            # penalty lam/ysd), but the convergence test stays meaningful for
            # targets of any magnitude
            ysd = float(ytr.std()) or 1.0
            yc = (ytr - ytr.mean()) / ysd
            fold_data.append(
                (Xs.T @ Xs, Xs.T @ yc, len(ytr), ytr.mean(), ysd, mu, s, X[val], T.y[val])
            )
        betas = [np.zeros(p_eff) for _ in folds]
        mses = {}
        for lam in grid:
            if deadline is not None and time.monotonic() > deadline:
                raise FitTimeout("cross-validation exceeded the fit timeout")
            total = 0.0
            for k, (G, cvec, ntr, ybar, ysd, mu, s, Xv, yv) in enumerate(fold_data):
                betas[k] = _cd_lasso_std(
                    G, cvec, ntr, lam / ysd, betas[k], cfg.max_sweeps, cfg.tol, deadline
                )
                pred = ybar + ((Xv - mu) / s) @ (betas[k] * ysd)
                total += float(np.mean((yv - pred) ** 2))
            mses[lam] = total / len(folds)
        for lam in grid:  # descending: first strict improvement wins ties upward
            if mses[lam] < best_mse:
                best_mse, best_lam = mses[lam], lam

    # final fit on the full training set at the chosen penalty
    beta_raw = np.zeros(p)
    if p_eff > 0:
        mu, s = X.mean(axis=0), X.std(axis=0)
        s = np.where(s > 0, s, 1.0)
        Xs = (X - mu) / s
        ysd = float(T.y.std()) or 1.0
        yc = (T.y - T.y.mean()) / ysd
        G, cvec = Xs.T @ Xs, Xs.T @ yc
        beta_std = np.zeros(p_eff)
        for lam in [g for g in grid if g >= best_lam]:  # warm-started path
            beta_std = _cd_lasso_std(
                G, cvec, n, lam / ysd, beta_std, cfg.max_sweeps, cfg.tol, deadline
            )
        b = beta_std * ysd / s
        beta0 = float(T.y.mean() - b @ mu)
        beta_raw[keep] = b
    else:
        beta0 = float(T.y.mean())
    return LassoResult(beta_raw, beta0, best_lam, dropped)


def prune(
    fs: FeatureSet, T: TrainingSet, beta: np.ndarray, beta0: float, epsilon: float
) -> tuple[FeatureSet, TrainingSet]:
    """Keep base functions whose coefficient magnitude reaches epsilon; the
    intercept always survives.  Raises AllPruned when nothing is left."""
    keep = np.abs(beta) >= epsilon if epsilon > 0 else np.ones(len(beta), dtype=bool)
    if not keep.any():
        raise AllPruned("no coefficient reached the pruning threshold")
    feats = tuple(t for t, k in zip(fs.base_functions, keep) if k)
    fs2 = FeatureSet(fs.tier, feats)
    T2 = TrainingSet(
        features=feats,
        X=T.X[:, keep],
        y=T.y,
        inputs=T.inputs,
        dropped_rows=T.dropped_rows,
    )
    return fs2, T2


def r2_score(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    ss_tot = float(np.sum((y_true - np.mean(y_true)) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res <= 1e-18 else -math.inf
    return 1.0 - ss_res / ss_tot


def ols_refit(T: TrainingSet, test: TrainingSet | None) -> LinearModel:
    """Ordinary least squares by normal equations (tiny ridge on singular
    designs); the score is R^2 on the held-out test set."""
    n, p = T.X.shape
    A = np.hstack([np.ones((n, 1)), T.X])
    G = A.T @ A
    rhs = A.T @ T.y
    try:
        coef = np.linalg.solve(G, rhs)
        if not np.all(np.isfinite(coef)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        coef = np.linalg.solve(G + 1e-10 * np.eye(p + 1), rhs)
    beta0, beta = float(coef[0]), coef[1:]
    model = LinearModel(intercept=beta0, coefficients=beta, selected=T.features, score=0.0)
    if test is not None and test.n > 0:
        pred = model.predict_rows(test.X)
        model.score = r2_score(test.y, pred)
    else:
        model.score = r2_score(T.y, model.predict_rows(T.X))
    return model


# ---------------------------------------------------------------------------
# Rationalization
# ---------------------------------------------------------------------------


def rationalize_value(v: float, tol: float = 1e-4, max_den: int = 64):
    """Nearest rational with a small denominator via continued-fraction
    convergents, or None when no convergent is close enough."""
    if not math.isfinite(v):
        return None
    f = Fraction(v).limit_denominator(max_den)
    err = abs(float(f) - v)
    if err <= tol * max(1.0, abs(v)):
        return f
    return None


def rationalize(
    model: LinearModel,
    domain: BoolExpr = TRUE,
    tol: float = 1e-4,
) -> Piece:
    """Turn a fitted model into a closed-form piece.  Coefficients near zero
    are dropped; coefficients without a close small-denominator rational stay
    as floats and mark the piece as not exactly verifiable."""
    exact = True
    body: Expr = Const(Fraction(0))
    terms: list[Expr] = []

    def coef_expr(v: float):
        nonlocal exact
        if abs(v) <= tol:
            return None
        f = rationalize_value(v, tol)
        if f is None:
            exact = False
            return Const(Fraction(v))
        return Const(f)

    c0 = coef_expr(model.intercept)
    if c0 is not None:
        terms.append(c0)
    for v, t in zip(model.coefficients, model.selected):
        c = coef_expr(float(v))
        if c is None:
            continue
        terms.append(Mul(c, t))
    if terms:
        body = terms[0]
        for t in terms[1:]:
            body = Add(body, t)
    body = simplify(body)
    return Piece(domain=domain, body=body, score=model.score, exact_coeffs=exact)


# ---------------------------------------------------------------------------
# End-to-end guesser
# ---------------------------------------------------------------------------


@dataclass
class DomainFit:
    subdomain: Subdomain | None
    piece: Piece | None
    model: LinearModel | None
    bound: int | None = None
    error: str | None = None
    flags: tuple[str, ...] = ()


@dataclass
class DomainData:
    bound: int
    train_inputs: list[tuple[int, ...]]
    train_values: list[float]
    test_inputs: list[tuple[int, ...]]
    test_values: list[float]


def collect_domain_data(
    system: RecurrenceSystem,
    fname: str,
    constraint: BoolExpr,
    sample_cfg: SampleConfig,
    budget: EvalBudget,
    evaluator: Evaluator,
    seed: int,
) -> DomainData | str:
    """Bound selection, training samples and a fresh test set for one fit
    domain; returns an error string when the domain yields no usable data."""
    f = system.functions[fname]
    try:
        bc = choose_bound(
            system, fname, sample_cfg, budget,
            constraint=constraint, evaluator=evaluator, seed=seed,
        )
    except EmptyDomain:
        return "empty-domain"
    ok_rows = [(r.input, r.value) for r in bc.results if r.error is None]
    if not ok_rows:
        return "all-samples-failed"
    try:
        test_ss = sample_for_function(
            f, sample_cfg, bc.bound, constraint=constraint,
            seed=seed + 1, n=sample_cfg.test_size,
        )
        test_results = evaluator.batch_eval(fname, test_ss.tuples)
        test_rows = [(r.input, r.value) for r in test_results if r.error is None]
    except EmptyDomain:
        test_rows = []
    return DomainData(
        bound=bc.bound,
        train_inputs=[t for t, _ in ok_rows],
        train_values=[v for _, v in ok_rows],
        test_inputs=[t for t, _ in test_rows],
        test_values=[v for _, v in test_rows],
    )


@dataclass
class GuessOutcome:
    candidate: PiecewiseClosedForm
    fits: list[DomainFit] = field(default_factory=list)
    failed_domains: int = 0
    sample_seconds: float = 0.0
    fit_seconds: float = 0.0

    @property
    def score(self) -> float:
        if self.failed_domains or not self.candidate.pieces:
            return 0.0
        return self.candidate.score


def _fit_tiers(
    params: tuple[str, ...],
    train_inputs,
    train_values,
    test_inputs,
    test_values,
    cfg: LassoConfig,
) -> tuple[LinearModel | None, tuple[str, ...]]:
    flags: list[str] = []
    best: LinearModel | None = None
    best_key = None
    for tier_ix, tier in enumerate(TIERS):
        deadline = time.monotonic() + cfg.fit_timeout
        try:
            fs = catalog_tier(params, tier)
        except CatalogTooLarge:
            flags.append(f"{tier}:catalog-too-large")
            continue
        try:
            T = build_training_set(fs, params, train_inputs, train_values, deadline)
            Ttest = build_training_set(fs, params, test_inputs, test_values, deadline) if test_inputs else None
            res = cv_lasso(T, cfg, deadline=deadline)
            try:
                fs2, T2 = prune(fs, T, res.beta, res.beta0, cfg.epsilon)
            except AllPruned:
                flags.append(f"{tier}:all-pruned")
                fs2 = FeatureSet(fs.tier, ())
                T2 = TrainingSet((), T.X[:, :0], T.y, T.inputs, T.dropped_rows)
            T2test = None
            if Ttest is not None:
                keep = [fs.base_functions.index(t) for t in fs2.base_functions]
                T2test = TrainingSet(
                    fs2.base_functions, Ttest.X[:, keep], Ttest.y, Ttest.inputs
                )
            model = ols_refit(T2, T2test)
            model.tier = tier
        except FitTimeout:
            flags.append(f"{tier}:timeout")
            continue
        except EmptyTrainingSet:
            flags.append(f"{tier}:empty-training-set")
            continue
        key = (round(model.score, 9), -len(model.selected), -tier_ix)
        if best is None or key > best_key:
            best, best_key = model, key
    return best, tuple(flags)


def _constant_piece(dom: Subdomain, data: DomainData) -> Piece:
    vals = np.asarray([float(v) for v in data.train_values])
    c = float(np.median(vals))
    if data.test_values:
        score = r2_score(
            np.asarray([float(v) for v in data.test_values]), np.full(len(data.test_values), c)
        )
    else:
        score = r2_score(vals, np.full(len(vals), c))
    f = rationalize_value(c)
    body = Const(f if f is not None else Fraction(c))
    return Piece(domain=dom.constraint, body=body, score=score, exact_coeffs=f is not None)


def guess_linear(
    system: RecurrenceSystem,
    func: str | None = None,
    lasso_cfg: LassoConfig | None = None,
    sample_cfg: SampleConfig | None = None,
    domsplit: bool = False,
    budget: EvalBudget | None = None,
) -> GuessOutcome:
    """Run the full lasso pipeline for the entry function: per-subdomain when
    splitting, otherwise once on the strictly positive orthant.  The best
    tier wins on test R^2 with ties toward sparser models and smaller tiers."""
    lasso_cfg = lasso_cfg or LassoConfig()
    sample_cfg = sample_cfg or SampleConfig()
    budget = budget or EvalBudget()
    fname = func or system.entry
    f = system.functions[fname]
    evaluator = Evaluator(system, budget)

    if domsplit:
        domains = split_domains(f)
    else:
        domains = [Subdomain(positive_orthant(f), -1)]

    fits: list[DomainFit] = []
    pieces: list[Piece] = []
    failed = 0
    sample_s = 0.0
    fit_s = 0.0
    for di, dom in enumerate(domains):
        seed = sample_cfg.seed * 7919 + di
        t0 = time.monotonic()
        data = collect_domain_data(
            system, fname, dom.constraint, sample_cfg, budget, evaluator, seed
        )
        sample_s += time.monotonic() - t0
        if isinstance(data, str):
            fits.append(DomainFit(dom, None, None, error=data))
            failed += 1
            continue
        if len(data.train_inputs) < 2 * lasso_cfg.folds:
            # tiny subdomains (down to a single point) take the constant fit
            piece = _constant_piece(dom, data)
            pieces.append(piece)
            fits.append(DomainFit(dom, piece, None, bound=data.bound, flags=("constant-fit",)))
            continue
        t0 = time.monotonic()
        model, flags = _fit_tiers(
            f.params,
            data.train_inputs,
            data.train_values,
            data.test_inputs,
            data.test_values,
            lasso_cfg,
        )
        fit_s += time.monotonic() - t0
        if model is None:
            fits.append(DomainFit(dom, None, None, bound=data.bound, error="no-fit", flags=flags))
            failed += 1
            continue
        piece = rationalize(model, domain=dom.constraint)
        pieces.append(piece)
        fits.append(DomainFit(dom, piece, model, bound=data.bound, flags=flags))
    return GuessOutcome(
        PiecewiseClosedForm(tuple(pieces)), fits, failed,
        sample_seconds=sample_s, fit_seconds=fit_s,
    )
