"""Symbolic guessing: multi-population evolutionary search over expression
trees with node-cost complexity penalties and simplex-based constant tuning.

Internally trees are nested tuples ("add", a, b), ("pow2", a), ("const", c),
("var", name); they convert to model expressions only at the end so that
square/cube/2^x count as single nodes for complexity.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .evaluator import EvalBudget, Evaluator
from .linear import GuessOutcome, DomainFit, collect_domain_data, r2_score, rationalize_value
from .model import (
    Add,
    Call,
    Ceil,
    Const,
    Div,
    Expr,
    Factorial,
    Floor,
    Log2,
    Max,
    Mul,
    Piece,
    PiecewiseClosedForm,
    Pow,
    RecurrenceSystem,
    Sub,
    Var,
)
from .rewrite import simplify
from .sampler import SampleConfig, Subdomain, positive_orthant, split_domains

BINARY = ("add", "sub", "max", "mul", "div", "pow")
UNARY = ("floor", "ceil", "square", "cube", "log2", "pow2", "fact")


class BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class OperatorSet:
    binary: tuple[str, ...] = BINARY
    unary: tuple[str, ...] = UNARY
    costs: dict = field(
        default_factory=lambda: {"floor": 2, "ceil": 2, "pow": 3}
    )

    def cost(self, tag: str) -> int:
        c = self.costs.get(tag, 1)
        if c <= 0:
            raise ValueError("node costs must be positive")
        return c


@dataclass(frozen=True)
class GPConfig:
    populations: int = 45
    population_size: int = 33
    iterations: int = 40
    seed: int = 0
    wall_clock: float = 180.0  # per subdomain
    max_complexity: int = 30
    tournament: int = 3
    p_crossover: float = 0.6
    p_mutation: float = 0.3
    p_const_perturb: float = 0.1
    migration_interval: int = 5

    def __post_init__(self):
        if min(self.populations, self.population_size, self.iterations) <= 0:
            raise ValueError("population/iteration counts must be positive")


@dataclass
class FrontEntry:
    complexity: int
    loss: float
    tree: tuple


@dataclass
class ParetoFront:
    """Best expression found at each complexity level; dominated levels are
    pruned so losses strictly improve as complexity grows."""

    entries: dict[int, FrontEntry] = field(default_factory=dict)

    def offer(self, tree: tuple, loss: float, complexity: int):
        if not math.isfinite(loss):
            return
        cur = self.entries.get(complexity)
        if cur is None or loss < cur.loss:
            self.entries[complexity] = FrontEntry(complexity, loss, tree)

    def pareto(self) -> list[FrontEntry]:
        out: list[FrontEntry] = []
        best = math.inf
        for c in sorted(self.entries):
            e = self.entries[c]
            if e.loss < best:
                out.append(e)
                best = e.loss
        return out


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------


def complexity(tree: tuple, ops: OperatorSet) -> int:
    tag = tree[0]
    if tag in ("var", "const"):
        return 1
    return ops.cost(tag) + sum(complexity(c, ops) for c in tree[1:])


def tree_nodes(tree: tuple) -> list[tuple]:
    out = [tree]
    for c in tree[1:]:
        if isinstance(c, tuple):
            out.extend(tree_nodes(c))
    return out


def _count(tree: tuple) -> int:
    tag = tree[0]
    if tag in ("var", "const"):
        return 1
    return 1 + sum(_count(c) for c in tree[1:])


def replace_at(tree: tuple, index: int, repl: tuple) -> tuple:
    """Replace the preorder-index-th node."""

    def go(node: tuple, i: int) -> tuple[tuple, int]:
        if i == index:
            return repl, i + _count(node)
        tag = node[0]
        if tag in ("var", "const"):
            return node, i + 1
        children = []
        j = i + 1
        for c in node[1:]:
            newc, j = go(c, j)
            children.append(newc)
        return (tag, *children), j

    new, _ = go(tree, 0)
    return new


def subtree_at(tree: tuple, index: int) -> tuple:
    def go(node: tuple, i: int):
        if i == index:
            return node, i + _count(node)
        tag = node[0]
        if tag in ("var", "const"):
            return None, i + 1
        j = i + 1
        for c in node[1:]:
            found, j = go(c, j)
            if found is not None:
                return found, j
        return None, j

    found, _ = go(tree, 0)
    return found if found is not None else tree


def to_expr(tree: tuple) -> Expr:
    tag = tree[0]
    if tag == "var":
        return Var(tree[1])
    if tag == "const":
        return Const(Fraction(tree[1]))
    if tag == "add":
        return Add(to_expr(tree[1]), to_expr(tree[2]))
    if tag == "sub":
        return Sub(to_expr(tree[1]), to_expr(tree[2]))
    if tag == "mul":
        return Mul(to_expr(tree[1]), to_expr(tree[2]))
    if tag == "div":
        return Div(to_expr(tree[1]), to_expr(tree[2]))
    if tag == "max":
        return Max(to_expr(tree[1]), to_expr(tree[2]))
    if tag == "pow":
        return Pow(to_expr(tree[1]), to_expr(tree[2]))
    if tag == "floor":
        return Floor(to_expr(tree[1]))
    if tag == "ceil":
        return Ceil(to_expr(tree[1]))
    if tag == "square":
        return Pow(to_expr(tree[1]), Const(Fraction(2)))
    if tag == "cube":
        return Pow(to_expr(tree[1]), Const(Fraction(3)))
    if tag == "log2":
        return Log2(to_expr(tree[1]))
    if tag == "pow2":
        return Pow(Const(Fraction(2)), to_expr(tree[1]))
    if tag == "fact":
        return Factorial(to_expr(tree[1]))
    raise ValueError(f"unknown tag {tag}")


def from_expr(e: Expr) -> tuple:
    if isinstance(e, Var):
        return ("var", e.name)
    if isinstance(e, Const):
        return ("const", float(e.value))
    if isinstance(e, Add):
        return ("add", from_expr(e.lhs), from_expr(e.rhs))
    if isinstance(e, Sub):
        return ("sub", from_expr(e.lhs), from_expr(e.rhs))
    if isinstance(e, Mul):
        return ("mul", from_expr(e.lhs), from_expr(e.rhs))
    if isinstance(e, Div):
        return ("div", from_expr(e.lhs), from_expr(e.rhs))
    if isinstance(e, Max):
        return ("max", from_expr(e.lhs), from_expr(e.rhs))
    if isinstance(e, Pow):
        if isinstance(e.base, Const) and e.base.value == 2 and not isinstance(e.exp, Const):
            return ("pow2", from_expr(e.exp))
        if isinstance(e.exp, Const) and e.exp.value == 2:
            return ("square", from_expr(e.base))
        if isinstance(e.exp, Const) and e.exp.value == 3:
            return ("cube", from_expr(e.base))
        return ("pow", from_expr(e.base), from_expr(e.exp))
    if isinstance(e, Floor):
        return ("floor", from_expr(e.arg))
    if isinstance(e, Ceil):
        return ("ceil", from_expr(e.arg))
    if isinstance(e, Log2):
        return ("log2", from_expr(e.arg))
    if isinstance(e, Factorial):
        return ("fact", from_expr(e.arg))
    if isinstance(e, Call):
        raise ValueError("candidate trees are call-free")
    raise TypeError(f"cannot convert {type(e).__name__}")


# ---------------------------------------------------------------------------
# Vectorized fitness
# ---------------------------------------------------------------------------

_FACT_CUTOFF = 170.0


def eval_tree(tree: tuple, cols: dict[str, np.ndarray]) -> np.ndarray:
    """Evaluate over row vectors; invalid points become nan/inf, which the
    loss turns into an infinite penalty.  Mirrors ground evaluation: log2 of
    a non-positive, division by zero and factorial outside the non-negative
    integers are invalid."""
    tag = tree[0]
    with np.errstate(all="ignore"):
        if tag == "var":
            return cols[tree[1]]
        if tag == "const":
            n = len(next(iter(cols.values())))
            return np.full(n, float(tree[1]))
        if tag == "add":
            return eval_tree(tree[1], cols) + eval_tree(tree[2], cols)
        if tag == "sub":
            return eval_tree(tree[1], cols) - eval_tree(tree[2], cols)
        if tag == "mul":
            return eval_tree(tree[1], cols) * eval_tree(tree[2], cols)
        if tag == "div":
            b = eval_tree(tree[2], cols)
            return np.where(b == 0, np.nan, eval_tree(tree[1], cols) / np.where(b == 0, 1, b))
        if tag == "max":
            return np.maximum(eval_tree(tree[1], cols), eval_tree(tree[2], cols))
        if tag == "pow":
            a = eval_tree(tree[1], cols)
            b = eval_tree(tree[2], cols)
            bad = (a < 0) & (b != np.round(b))
            bad |= (a == 0) & (b < 0)
            v = np.power(np.where(bad, 1.0, a), b)
            return np.where(bad, np.nan, v)
        if tag == "floor":
            return np.floor(eval_tree(tree[1], cols))
        if tag == "ceil":
            return np.ceil(eval_tree(tree[1], cols))
        if tag == "square":
            a = eval_tree(tree[1], cols)
            return a * a
        if tag == "cube":
            a = eval_tree(tree[1], cols)
            return a * a * a
        if tag == "log2":
            a = eval_tree(tree[1], cols)
            return np.where(a > 0, np.log2(np.where(a > 0, a, 1.0)), np.nan)
        if tag == "pow2":
            return np.exp2(eval_tree(tree[1], cols))
        if tag == "fact":
            a = eval_tree(tree[1], cols)
            ok = (a >= 0) & (a == np.round(a)) & (a <= _FACT_CUTOFF)
            v = np.exp(gammaln(np.where(ok, a, 0.0) + 1.0))
            return np.where(ok, np.round(v) if v.ndim else v, np.nan)
    raise ValueError(f"unknown tag {tag}")


def tree_loss(tree: tuple, cols: dict[str, np.ndarray], targets: np.ndarray) -> float:
    pred = eval_tree(tree, cols)
    if not np.all(np.isfinite(pred)):
        return math.inf
    with np.errstate(all="ignore"):
        loss = float(np.mean((pred - targets) ** 2))
    return loss if math.isfinite(loss) else math.inf


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------


def _random_leaf(rng: random.Random, params: tuple[str, ...]) -> tuple:
    if rng.random() < 0.7:
        return ("var", rng.choice(params))
    return ("const", float(rng.choice([1.0, 2.0, 3.0, 0.5, round(rng.uniform(-5, 5), 3)])))


def _random_tree(rng: random.Random, params, ops: OperatorSet, depth: int) -> tuple:
    if depth <= 0 or rng.random() < 0.3:
        return _random_leaf(rng, params)
    pool = ops.binary + ops.unary
    tag = rng.choice(pool)
    if tag in ops.binary:
        return (tag, _random_tree(rng, params, ops, depth - 1), _random_tree(rng, params, ops, depth - 1))
    return (tag, _random_tree(rng, params, ops, depth - 1))


def _mutate(rng: random.Random, tree: tuple, params, ops: OperatorSet) -> tuple:
    nodes = tree_nodes(tree)
    idx = rng.randrange(len(nodes))
    if rng.random() < 0.5:
        return replace_at(tree, idx, _random_tree(rng, params, ops, 2))
    # point mutation: swap the operator, keep children
    node = nodes[idx]
    tag = node[0]
    if tag in ops.binary:
        newtag = rng.choice(ops.binary)
        return replace_at(tree, idx, (newtag, node[1], node[2]))
    if tag in ops.unary:
        newtag = rng.choice(ops.unary)
        return replace_at(tree, idx, (newtag, node[1]))
    return replace_at(tree, idx, _random_leaf(rng, params))


def _perturb_const(rng: random.Random, tree: tuple) -> tuple:
    nodes = tree_nodes(tree)
    const_idx = [i for i, n in enumerate(nodes) if n[0] == "const"]
    if not const_idx:
        return tree
    idx = rng.choice(const_idx)
    c = nodes[idx][1]
    new = c * (1.0 + rng.gauss(0, 0.3)) + rng.gauss(0, 0.1)
    return replace_at(tree, idx, ("const", float(new)))


def _crossover(rng: random.Random, a: tuple, b: tuple) -> tuple:
    ai = rng.randrange(_count(a))
    bi = rng.randrange(_count(b))
    return replace_at(a, ai, subtree_at(b, bi))


@dataclass
class _Individual:
    tree: tuple
    loss: float
    complexity: int

    def beats(self, other: "_Individual") -> bool:
        if self.loss != other.loss:
            return self.loss < other.loss
        return self.complexity < other.complexity


def evolve(
    inputs,
    targets,
    params: tuple[str, ...],
    ops: OperatorSet | None = None,
    cfg: GPConfig | None = None,
) -> ParetoFront:
    """Island-model GP: tournament selection, subtree crossover, mutation,
    constant perturbation and ring migration of the best individual.
    Deterministic for a given seed; the wall-clock budget returns whatever
    front exists when it runs out."""
    ops = ops or OperatorSet()
    cfg = cfg or GPConfig()
    if len(targets) < 5:
        raise ValueError("need at least 5 rows")
    cols = {p: np.asarray([t[i] for t in inputs], dtype=float) for i, p in enumerate(params)}
    y = np.asarray(targets, dtype=float)
    deadline = time.monotonic() + cfg.wall_clock
    front = ParetoFront()

    def make(tree: tuple) -> _Individual:
        comp = complexity(tree, ops)
        loss = tree_loss(tree, cols, y) if comp <= cfg.max_complexity else math.inf
        ind = _Individual(tree, loss, comp)
        if comp <= cfg.max_complexity:
            front.offer(tree, loss, comp)
        return ind

    rngs = [random.Random(cfg.seed * 10_007 + i) for i in range(cfg.populations)]
    islands: list[list[_Individual]] = []
    for i in range(cfg.populations):
        pop = [make(_random_tree(rngs[i], params, ops, 3)) for _ in range(cfg.population_size)]
        islands.append(pop)

    def tournament(rng: random.Random, pop: list[_Individual]) -> _Individual:
        best = pop[rng.randrange(len(pop))]
        for _ in range(cfg.tournament - 1):
            ch = pop[rng.randrange(len(pop))]
            if ch.beats(best):
                best = ch
        return best

    exhausted = False
    for it in range(cfg.iterations):
        if exhausted:
            break
        for i, pop in enumerate(islands):
            if time.monotonic() > deadline:
                exhausted = True
                break
            rng = rngs[i]
            elite = min(pop, key=lambda d: (d.loss, d.complexity))
            newpop = [elite]
            while len(newpop) < cfg.population_size:
                r = rng.random()
                parent = tournament(rng, pop)
                if r < cfg.p_crossover:
                    other = tournament(rng, pop)
                    child = _crossover(rng, parent.tree, other.tree)
                elif r < cfg.p_crossover + cfg.p_mutation:
                    child = _mutate(rng, parent.tree, params, ops)
                else:
                    child = _perturb_const(rng, parent.tree)
                if complexity(child, ops) > cfg.max_complexity:
                    child = parent.tree
                newpop.append(make(child))
            # short classical pass over the island's best: shapes like c^n
            # only become competitive once their constants are tuned
            bi = min(range(len(newpop)), key=lambda j: (newpop[j].loss, newpop[j].complexity))
            btree = newpop[bi].tree
            if math.isfinite(newpop[bi].loss) and any(
                n[0] == "const" for n in tree_nodes(btree)
            ):
                tuned = optimize_constants_tree(btree, cols, y, max_evals=40)
                if tuned != btree:
                    cand = make(tuned)
                    if cand.beats(newpop[bi]):
                        newpop[bi] = cand
            islands[i] = newpop
        if (it + 1) % cfg.migration_interval == 0 and not exhausted:
            bests = [min(pop, key=lambda d: (d.loss, d.complexity)) for pop in islands]
            for i in range(len(islands)):
                dst = islands[(i + 1) % len(islands)]
                worst = max(range(len(dst)), key=lambda j: (dst[j].loss, dst[j].complexity))
                dst[worst] = bests[i]

    # local constant tuning on the front survivors
    for entry in list(front.pareto()):
        tuned = optimize_constants_tree(entry.tree, cols, y)
        front.offer(tuned, tree_loss(tuned, cols, y), complexity(tuned, ops))
    return front


# ---------------------------------------------------------------------------
# Constant optimization
# ---------------------------------------------------------------------------


def optimize_constants_tree(
    tree: tuple, cols: dict[str, np.ndarray], y: np.ndarray, max_evals: int = 200
) -> tuple:
    nodes = tree_nodes(tree)
    const_idx = [i for i, n in enumerate(nodes) if n[0] == "const"]
    if not const_idx:
        return tree
    x0 = np.asarray([nodes[i][1] for i in const_idx], dtype=float)

    def with_consts(vals) -> tuple:
        t = tree
        for i, v in zip(const_idx, vals):
            t = replace_at(t, i, ("const", float(v)))
        return t

    def objective(vals) -> float:
        loss = tree_loss(with_consts(vals), cols, y)
        return loss if math.isfinite(loss) else 1e300

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"maxfev": max_evals, "xatol": 1e-10, "fatol": 1e-12},
    )
    tuned = with_consts(res.x)
    if tree_loss(tuned, cols, y) <= tree_loss(tree, cols, y):
        return tuned
    return tree


def optimize_constants(expr: Expr, inputs, targets, params: tuple[str, ...]) -> Expr:
    """Simplex search over the numeric leaves minimizing train MSE; the
    result is never worse than the input on the training rows."""
    tree = from_expr(expr)
    cols = {p: np.asarray([t[i] for t in inputs], dtype=float) for i, p in enumerate(params)}
    y = np.asarray(targets, dtype=float)
    return to_expr(optimize_constants_tree(tree, cols, y))


# ---------------------------------------------------------------------------
# End-to-end guesser
# ---------------------------------------------------------------------------


def _rationalize_expr(e: Expr, tol: float = 1e-4) -> tuple[Expr, bool]:
    exact = True

    def go(node: Expr) -> Expr:
        nonlocal exact
        if isinstance(node, Const):
            if node.value.denominator <= 64:
                return node
            f = rationalize_value(float(node.value), tol)
            if f is None:
                exact = False
                return node
            return Const(f)
        if isinstance(node, (Add, Sub, Mul, Div, Max, Pow)):
            pair = (go(node.lhs), go(node.rhs)) if not isinstance(node, Pow) else (
                go(node.base), go(node.exp))
            return type(node)(*pair)
        if isinstance(node, (Floor, Ceil, Log2, Factorial)):
            return type(node)(go(node.arg))
        return node

    return go(e), exact


def guess_symbolic(
    system: RecurrenceSystem,
    func: str | None = None,
    gp_cfg: GPConfig | None = None,
    sample_cfg: SampleConfig | None = None,
    ops: OperatorSet | None = None,
    domsplit: bool = True,
    budget: EvalBudget | None = None,
) -> GuessOutcome:
    """Evolve candidates per subdomain and pick from each front the entry
    with the best test-set R^2 (complexity breaks ties); constants are
    rationalized for verification eligibility."""
    gp_cfg = gp_cfg or GPConfig()
    sample_cfg = sample_cfg or SampleConfig()
    ops = ops or OperatorSet()
    budget = budget or EvalBudget()
    fname = func or system.entry
    f = system.functions[fname]
    evaluator = Evaluator(system, budget)

    domains = (
        split_domains(f) if domsplit else [Subdomain(positive_orthant(f), -1)]
    )
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
        t0 = time.monotonic()
        if len(data.train_values) < 5:
            # tiny subdomains (e.g. a single point) take the constant fit
            val = float(np.median([float(v) for v in data.train_values]))
            tree = ("const", val)
        else:
            cfg_i = GPConfig(
                populations=gp_cfg.populations,
                population_size=gp_cfg.population_size,
                iterations=gp_cfg.iterations,
                seed=gp_cfg.seed * 977 + di,
                wall_clock=gp_cfg.wall_clock,
                max_complexity=gp_cfg.max_complexity,
                tournament=gp_cfg.tournament,
                p_crossover=gp_cfg.p_crossover,
                p_mutation=gp_cfg.p_mutation,
                p_const_perturb=gp_cfg.p_const_perturb,
                migration_interval=gp_cfg.migration_interval,
            )
            front = evolve(
                data.train_inputs,
                [float(v) for v in data.train_values],
                f.params,
                ops,
                cfg_i,
            )
            entries = front.pareto()
            if not entries:
                fits.append(DomainFit(dom, None, None, bound=data.bound, error="no-fit"))
                failed += 1
                continue
            tree = _select_entry(entries, f.params, data)
        expr = simplify(to_expr(tree))
        expr, exact = _rationalize_expr(expr)
        expr = simplify(expr)
        score = _test_r2(tree, f.params, data)
        fit_s += time.monotonic() - t0
        piece = Piece(domain=dom.constraint, body=expr, score=score, exact_coeffs=exact)
        pieces.append(piece)
        fits.append(DomainFit(dom, piece, None, bound=data.bound))
    return GuessOutcome(
        PiecewiseClosedForm(tuple(pieces)), fits, failed,
        sample_seconds=sample_s, fit_seconds=fit_s,
    )


def _test_r2(tree: tuple, params, data) -> float:
    inputs = data.test_inputs or data.train_inputs
    values = data.test_values if data.test_inputs else data.train_values
    cols = {p: np.asarray([t[i] for t in inputs], dtype=float) for i, p in enumerate(params)}
    pred = eval_tree(tree, cols)
    y = np.asarray([float(v) for v in values])
    if not np.all(np.isfinite(pred)):
        return -math.inf
    return r2_score(y, pred)


def _select_entry(entries: list[FrontEntry], params, data) -> tuple:
    best, best_key = None, None
    for e in entries:
        r2 = _test_r2(e.tree, params, data)
        key = (round(r2, 9), -e.complexity)
        if best is None or key > best_key:
            best, best_key = e.tree, key
    return best
