"""Random input generation, bound selection and domain partitioning."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .evaluator import BatchResult, EvalBudget, Evaluator
from .model import (
    And,
    BoolExpr,
    Cmp,
    Const,
    FuncDef,
    Not,
    RecurrenceSystem,
    TRUE,
    Var,
    eval_bool,
)
from .rewrite import simplify


class EmptyDomain(Exception):
    """No satisfying tuple was found within the rejection cap."""


class InsufficientSamples(Exception):
    pass


@dataclass(frozen=True)
class SampleConfig:
    n: int = 100
    bound_ladder: tuple[int, ...] = (20, 10, 5, 3)
    seed: int = 0
    rejection_cap: int = 10**5
    test_size: int = 30
    folds: int = 2

    def __post_init__(self):
        if self.n < 2 * self.folds:
            raise ValueError("need n >= 2*folds")
        ladder = tuple(self.bound_ladder)
        if not ladder or any(b <= 0 for b in ladder):
            raise ValueError("bounds must be positive")
        if any(a <= b for a, b in zip(ladder, ladder[1:])):
            raise ValueError("bound ladder must be decreasing")
        object.__setattr__(self, "bound_ladder", ladder)


@dataclass(frozen=True)
class Subdomain:
    constraint: BoolExpr
    case_index: int


@dataclass
class SampleSet:
    tuples: list[tuple[int, ...]]
    shortfall: bool = False


def sample_inputs(
    pre: BoolExpr, arity: int, cfg: SampleConfig, bound: int | None = None,
    seed: int | None = None, n: int | None = None,
) -> SampleSet:
    """Distinct tuples drawn uniformly from [0, bound]^arity, rejection-filtered
    by `pre`.  Deterministic for a given seed; short domains are reported via
    the shortfall flag rather than padded."""
    b = bound if bound is not None else cfg.bound_ladder[0]
    want = n if n is not None else cfg.n
    rng = random.Random(cfg.seed if seed is None else seed)
    names = _param_names(pre, arity)
    found: dict[tuple[int, ...], None] = {}
    attempts = 0
    while len(found) < want and attempts < cfg.rejection_cap:
        attempts += 1
        tup = tuple(rng.randint(0, b) for _ in range(arity))
        if tup in found:
            continue
        if eval_bool(pre, dict(zip(names, tup))):
            found[tup] = None
    if not found:
        raise EmptyDomain(f"no point of [0,{b}]^{arity} satisfies the precondition")
    return SampleSet(list(found), shortfall=len(found) < want)


def _param_names(pre: BoolExpr, arity: int) -> list[str]:
    # sample_inputs only sees a constraint: coordinates follow the sorted
    # constraint variables, padded with fresh names up to the arity
    from .model import free_vars

    fv = sorted(free_vars(pre))
    if len(fv) > arity:
        raise ValueError(f"constraint names {len(fv)} variables, arity is {arity}")
    pad = []
    i = 0
    while len(fv) + len(pad) < arity:
        i += 1
        name = f"u{i}"
        if name not in fv:
            pad.append(name)
    return fv + pad


def sample_for_function(
    func: FuncDef,
    cfg: SampleConfig,
    bound: int,
    constraint: BoolExpr = TRUE,
    seed: int | None = None,
    n: int | None = None,
) -> SampleSet:
    """Like sample_inputs but with the function's own parameter names."""
    b = bound
    want = n if n is not None else cfg.n
    rng = random.Random(cfg.seed if seed is None else seed)
    pre = And(func.precondition, constraint) if constraint != TRUE else func.precondition
    found: dict[tuple[int, ...], None] = {}
    attempts = 0
    while len(found) < want and attempts < cfg.rejection_cap:
        attempts += 1
        tup = tuple(rng.randint(0, b) for _ in range(func.arity))
        if tup in found:
            continue
        if eval_bool(pre, dict(zip(func.params, tup))):
            found[tup] = None
    if not found:
        raise EmptyDomain(
            f"{func.name}: no point of [0,{b}]^{func.arity} satisfies the constraint"
        )
    return SampleSet(list(found), shortfall=len(found) < want)


@dataclass
class BoundChoice:
    bound: int
    samples: SampleSet
    results: list[BatchResult]
    fell_through: bool = False  # even the smallest bound misbehaved
    all_failed: bool = False
    any_budget_failure: bool = False


def choose_bound(
    system: RecurrenceSystem,
    func: str,
    cfg: SampleConfig,
    budget: EvalBudget | None = None,
    constraint: BoolExpr = TRUE,
    evaluator: Evaluator | None = None,
    seed: int | None = None,
) -> BoundChoice:
    """Largest ladder bound whose sample batch evaluates cleanly within the
    wall clock; budget-exceeded results push down the ladder, and the
    smallest bound is always accepted (flagged)."""
    budget = budget or EvalBudget()
    f = system.functions[func]
    ev = evaluator or Evaluator(system, budget)
    last: BoundChoice | None = None
    for i, b in enumerate(cfg.bound_ladder):
        is_last = i == len(cfg.bound_ladder) - 1
        try:
            ss = sample_for_function(f, cfg, b, constraint=constraint, seed=seed)
        except EmptyDomain:
            if is_last and last is None:
                raise
            continue
        t0 = time.monotonic()
        results = ev.batch_eval(func, ss.tuples)
        elapsed = time.monotonic() - t0
        budget_failures = [r for r in results if r.error and r.error.startswith("budget-exceeded")]
        ok = elapsed <= budget.wall_clock and not budget_failures
        choice = BoundChoice(
            bound=b,
            samples=ss,
            results=results,
            all_failed=all(r.error is not None for r in results),
            any_budget_failure=bool(budget_failures),
        )
        if ok:
            return choice
        last = choice
    assert last is not None
    last.fell_through = True
    return last


def split_domains(func: FuncDef) -> list[Subdomain]:
    """One subdomain per case: the i-th constraint is the case guard minus
    everything earlier guards already claimed (purely syntactic)."""
    out: list[Subdomain] = []
    preceding: BoolExpr | None = None
    for i, case in enumerate(func.cases):
        constraint: BoolExpr = case.guard
        if preceding is not None:
            constraint = And(constraint, preceding)
        out.append(Subdomain(simplify(constraint), i))
        neg = Not(case.guard)
        preceding = neg if preceding is None else And(preceding, neg)
    return out


def positive_orthant(func: FuncDef) -> BoolExpr:
    """x_i >= 1 for every parameter: the regression domain when splitting is
    off (verification still covers the full precondition)."""
    c: BoolExpr | None = None
    for p in func.params:
        atom = Cmp(">=", Var(p), Const(Fraction(1)))
        c = atom if c is None else And(c, atom)
    return c if c is not None else TRUE


@dataclass
class Splits:
    train: list[tuple[int, ...]]
    folds: list[list[int]]  # row indices into train
    test: list[tuple[int, ...]]
    test_short: bool = False


def make_splits(
    samples: list[tuple[int, ...]],
    cfg: SampleConfig,
    seed: int | None = None,
    fresh_test=None,
) -> Splits:
    """Deterministic k-fold partition of the training rows plus a test set.

    `fresh_test`, when given, is called with the desired size and returns
    freshly sampled tuples (same distribution as training); without it the
    test set is held out of `samples`.
    """
    if len(samples) < cfg.folds + 1:
        raise InsufficientSamples(f"{len(samples)} samples for {cfg.folds} folds")
    rng = random.Random(cfg.seed if seed is None else seed)
    order = list(range(len(samples)))
    rng.shuffle(order)

    test: list[tuple[int, ...]] = []
    train_idx = order
    test_short = False
    if fresh_test is not None:
        test = list(fresh_test(cfg.test_size))
        if len(test) < cfg.test_size:
            test_short = True
    else:
        hold = min(cfg.test_size, max(0, len(samples) - 2 * cfg.folds))
        test = [samples[i] for i in order[:hold]]
        train_idx = order[hold:]
        if len(test) < cfg.test_size:
            test_short = True

    train = [samples[i] for i in train_idx]
    folds: list[list[int]] = [[] for _ in range(cfg.folds)]
    for pos, _ in enumerate(train):
        folds[pos % cfg.folds].append(pos)
    return Splits(train=train, folds=folds, test=test, test_short=test_short)
