"""The check stage: encode the recurrence with the candidate substituted in
as a first-order formula over the integers, ask an external SMT solver for
models of its negation, and interpret the answer.

The solver is a separate process speaking SMT-LIB2 text (command taken from
the --solver flag or RECSOLVE_SMT_CMD, falling back to z3 on PATH and then
to the bundled linear-integer-arithmetic solver).  unsat means the candidate
is an exact solution; sat yields a counterexample that is re-checked against
the evaluator before it is trusted.
"""

from __future__ import annotations

import math
import os
import re
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .evaluator import BudgetExceeded, EvalBudget, Evaluator, NoMatchingCase
from .model import (
    Add,
    And,
    BoolExpr,
    Call,
    Ceil,
    Cmp,
    Const,
    Div,
    EvalError,
    Expr,
    Factorial,
    Floor,
    FuncDef,
    Ite,
    Log2,
    Max,
    Min,
    Mul,
    Not,
    Or,
    PiecewiseClosedForm,
    Pow,
    RecurrenceSystem,
    Sub,
    TRUE,
    TrueExpr,
    Var,
    contains_call,
    eval_bool,
    eval_ground,
    free_vars,
    substitute,
    walk,
)
from .rewrite import contains_unsupported, simplify


class SolverNotFound(Exception):
    pass


class MalformedSolverOutput(Exception):
    pass


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class Proved:
    pass


@dataclass(frozen=True)
class Disproved:
    counterexample: dict
    confirmed: bool


@dataclass(frozen=True)
class Unknown:
    reason: str  # "timeout" | "solver-unknown" | ...


@dataclass(frozen=True)
class Unsupported:
    offending: tuple[str, ...]


VerificationResult = Proved | Disproved | Unknown | Unsupported


@dataclass
class SolverConfig:
    command: tuple[str, ...] | None = None  # None: resolve automatically
    timeout: float = 10.0
    debug_dir: str | None = None
    real_encoding: bool = False  # reals + integrality constraints variant

    def resolved_command(self) -> tuple[str, ...]:
        if self.command:
            return tuple(self.command)
        return default_solver_command()


def default_solver_command() -> tuple[str, ...]:
    env = os.environ.get("RECSOLVE_SMT_CMD")
    if env:
        return tuple(shlex.split(env))
    if shutil.which("z3"):
        return ("z3",)
    return (sys.executable, "-m", "recsolve_lia")


@dataclass
class SmtJob:
    logic: str
    declarations: list[str]
    assertion: str
    command: tuple[str, ...]
    timeout: float = 10.0
    axioms: list[str] = field(default_factory=list)
    variables: tuple[str, ...] = ()
    name: str = "query"

    @property
    def script(self) -> str:
        lines = [f"(set-logic {self.logic})"]
        lines.extend(self.declarations)
        lines.extend(self.axioms)
        lines.append(f"(assert {self.assertion})")
        lines.append("(check-sat)")
        lines.append("(get-model)")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Candidate inlining and call replacement
# ---------------------------------------------------------------------------


def inline_candidate(cand: PiecewiseClosedForm, args: tuple[Expr, ...], params) -> Expr:
    """The candidate applied to argument expressions; multiple pieces become
    a nested conditional over their subdomains."""
    bindings = dict(zip(params, args))
    pieces = cand.pieces
    out = substitute(pieces[-1].body, bindings)
    for p in reversed(pieces[:-1]):
        out = Ite(substitute(p.domain, bindings), substitute(p.body, bindings), out)
    return out


def contains_calls(e: Expr, func: str) -> bool:
    return any(isinstance(n, Call) and n.func == func for n in walk(e))


def replace_calls(
    e: Expr,
    func: FuncDef,
    cand: PiecewiseClosedForm,
    pre: BoolExpr,
    guard: BoolExpr,
    entails,
) -> Expr:
    """Innermost-first replacement of calls to `func` by the candidate.  A
    call with arguments a is replaced only when pre(x) and guard(x) entail
    pre(a), discharged through the `entails` predicate (an SMT validity
    query); calls that fail the check survive and are reported upstream."""

    def go(node: Expr) -> Expr:
        if isinstance(node, (Const, Var)):
            return node
        if isinstance(node, (Add, Sub, Mul, Div, Pow, Max, Min)):
            pair = (
                (go(node.base), go(node.exp))
                if isinstance(node, Pow)
                else (go(node.lhs), go(node.rhs))
            )
            return type(node)(*pair)
        if isinstance(node, (Floor, Ceil, Log2, Factorial)):
            return type(node)(go(node.arg))
        if isinstance(node, Ite):
            return Ite(node.cond, go(node.then), go(node.orelse))
        if isinstance(node, Call):
            args = tuple(go(a) for a in node.args)
            if node.func != func.name:
                return Call(node.func, args)
            target = substitute(pre, dict(zip(func.params, args)))
            if entails(And(pre, guard), target):
                return inline_candidate(cand, args, func.params)
            return Call(node.func, args)
        raise TypeError(f"cannot replace calls in {type(node).__name__}")

    return go(e)


# ---------------------------------------------------------------------------
# SMT-LIB2 encoding
# ---------------------------------------------------------------------------


class EncodingError(Exception):
    def __init__(self, offending: str):
        self.offending = offending
        super().__init__(offending)


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class _Encoder:
    """Expressions become integer-scaled terms (text, positive denominator);
    rounding introduces fresh quotient variables with defining bounds, and
    constant-base exponentials become axiomatized recursive power functions.

    real_mode reproduces the reals-plus-integrality-constraints device
    (variables declared Real with x = to_real(to_int(x))) for cross-checks.
    """

    def __init__(self, positive_divisors: set[str] | None = None, real_mode: bool = False):
        self.aux: list[str] = []
        self.fresh_vars: list[str] = []
        self._cache: dict = {}
        self.pow_bases: set[int] = set()
        self.positive_divisors = positive_divisors or set()
        self.real_mode = real_mode
        self._counter = 0

    def lit(self, v: int) -> str:
        text = f"{v}.0" if self.real_mode else str(v)
        return text if v >= 0 else ("(- " + (f"{-v}.0" if self.real_mode else str(-v)) + ")")

    def _fresh(self, prefix: str) -> str:
        self._counter += 1
        name = f".{prefix}{self._counter}"
        self.fresh_vars.append(name)
        return name

    # -- terms ---------------------------------------------------------------
    def term(self, e: Expr) -> tuple[str, int]:
        if isinstance(e, Const):
            return self.lit(e.value.numerator), e.value.denominator
        if isinstance(e, Var):
            return e.name, 1
        if isinstance(e, (Add, Sub)):
            (ta, da), (tb, db) = self.term(e.lhs), self.term(e.rhs)
            L = _lcm(da, db)
            ta = _scaled(ta, L // da, self.real_mode)
            tb = _scaled(tb, L // db, self.real_mode)
            op = "+" if isinstance(e, Add) else "-"
            return f"({op} {ta} {tb})", L
        if isinstance(e, Mul):
            (ta, da), (tb, db) = self.term(e.lhs), self.term(e.rhs)
            return f"(* {ta} {tb})", da * db
        if isinstance(e, Div):
            if isinstance(e.rhs, Const):
                c = e.rhs.value
                if c == 0:
                    raise EncodingError("division-by-zero")
                ta, da = self.term(e.lhs)
                num = c.numerator
                t = _scaled(ta, abs(c.denominator), self.real_mode)
                if num < 0:
                    t = f"(- {t})"
                return t, da * abs(num)
            raise EncodingError("variable-division")
        if isinstance(e, Pow):
            if self.real_mode:
                raise EncodingError("Pow")
            return self._pow(e)
        if isinstance(e, Floor):
            return self._rounding(e.arg, "floor")
        if isinstance(e, Ceil):
            return self._rounding(e.arg, "ceil")
        if isinstance(e, (Max, Min)):
            (ta, da), (tb, db) = self.term(e.lhs), self.term(e.rhs)
            L = _lcm(da, db)
            ta = _scaled(ta, L // da, self.real_mode)
            tb = _scaled(tb, L // db, self.real_mode)
            rel = ">=" if isinstance(e, Max) else "<="
            return f"(ite ({rel} {ta} {tb}) {ta} {tb})", L
        if isinstance(e, Ite):
            cond = self.boolean(e.cond)
            (ta, da), (tb, db) = self.term(e.then), self.term(e.orelse)
            L = _lcm(da, db)
            ta = _scaled(ta, L // da, self.real_mode)
            tb = _scaled(tb, L // db, self.real_mode)
            return f"(ite {cond} {ta} {tb})", L
        if isinstance(e, Log2):
            raise EncodingError("Log2")
        if isinstance(e, Factorial):
            raise EncodingError("Factorial")
        if isinstance(e, Call):
            raise EncodingError("unresolved-call")
        raise EncodingError(type(e).__name__)

    def _pow(self, e: Pow) -> tuple[str, int]:
        if isinstance(e.base, Const) and not isinstance(e.exp, Const):
            c = e.base.value
            if c.denominator != 1 or c < 2:
                raise EncodingError("Pow")
            te, de = self.term(e.exp)
            if de != 1:
                raise EncodingError("fractional-exponent")
            self.pow_bases.add(int(c))
            return f"(pow{c} {te})", 1
        if isinstance(e.exp, Const):
            k = e.exp.value
            if k.denominator != 1 or k < 0 or k > 8:
                raise EncodingError("Pow")
            k = int(k)
            if k == 0:
                return "1", 1
            tb, db = self.term(e.base)
            if k == 1:
                return tb, db
            return "(* " + " ".join([tb] * k) + ")", db**k
        raise EncodingError("Pow")

    def _rounding(self, arg: Expr, kind: str) -> tuple[str, int]:
        # floor/ceil of a variable-divisor quotient: q with q*b <= a < q*b + b
        if isinstance(arg, Div) and not isinstance(arg.rhs, Const):
            from .dsl import print_expr

            if print_expr(arg.rhs) not in self.positive_divisors:
                raise EncodingError("variable-division")
            ta, da = self.term(arg.lhs)
            tb, db = self.term(arg.rhs)
            if da != 1 or db != 1:
                raise EncodingError("variable-division")
            key = (kind, ta, tb)
            if key in self._cache:
                return self._cache[key]
            q = self._fresh("q")
            if kind == "floor":
                self.aux.append(f"(<= (* {q} {tb}) {ta})")
                self.aux.append(f"(< {ta} (+ (* {q} {tb}) {tb}))")
            else:
                self.aux.append(f"(>= (* {q} {tb}) {ta})")
                self.aux.append(f"(< (- (* {q} {tb}) {tb}) {ta})")
            self._cache[key] = (q, 1)
            return (q, 1)
        t, d = self.term(arg)
        if d == 1:
            return t, 1
        key = (kind, t, d)
        if key in self._cache:
            return self._cache[key]
        q = self._fresh("q")
        dl = self.lit(d)
        if kind == "floor":
            # d*q <= t < d*q + d
            self.aux.append(f"(<= (* {dl} {q}) {t})")
            self.aux.append(f"(< {t} (+ (* {dl} {q}) {dl}))")
        else:
            # d*q - d < t <= d*q
            self.aux.append(f"(>= (* {dl} {q}) {t})")
            self.aux.append(f"(< (- (* {dl} {q}) {dl}) {t})")
        self._cache[key] = (q, 1)
        return (q, 1)

    # -- constraints ------------------------------------------------------------
    def boolean(self, b: BoolExpr) -> str:
        if isinstance(b, TrueExpr):
            return "true"
        if isinstance(b, Not):
            return f"(not {self.boolean(b.arg)})"
        if isinstance(b, And):
            return f"(and {self.boolean(b.lhs)} {self.boolean(b.rhs)})"
        if isinstance(b, Or):
            return f"(or {self.boolean(b.lhs)} {self.boolean(b.rhs)})"
        if isinstance(b, Cmp):
            (ta, da), (tb, db) = self.term(b.lhs), self.term(b.rhs)
            L = _lcm(da, db)
            ta = _scaled(ta, L // da, self.real_mode)
            tb = _scaled(tb, L // db, self.real_mode)
            if b.op == "=":
                return f"(= {ta} {tb})"
            if b.op == "!=":
                return f"(not (= {ta} {tb}))"
            return f"({b.op} {ta} {tb})"
        raise EncodingError(type(b).__name__)


def _scaled(t: str, m: int, real: bool = False) -> str:
    if m == 1:
        return t
    lit = f"{m}.0" if real else str(m)
    return f"(* {lit} {t})"


_POW_AXIOMS = """\
(declare-fun pow{c} (Int) Int)
(assert (= (pow{c} 0) 1))
(assert (forall ((n Int)) (=> (>= n 0) (= (pow{c} (+ n 1)) (* {c} (pow{c} n))))))
(assert (forall ((n Int)) (=> (>= n 0) (>= (pow{c} n) 1))))"""


def build_job(
    variables: tuple[str, ...],
    assertion_bool: BoolExpr,
    solver: SolverConfig,
    positive_divisors: set[str] | None = None,
    name: str = "query",
) -> SmtJob:
    enc = _Encoder(positive_divisors, real_mode=solver.real_encoding)
    body = enc.boolean(assertion_bool)
    sort = "Real" if solver.real_encoding else "Int"
    decls = [f"(declare-fun {v} () {sort})" for v in list(variables) + enc.fresh_vars]
    axioms = [_POW_AXIOMS.format(c=c) for c in sorted(enc.pow_bases)]
    if solver.real_encoding:
        enc.aux = [
            f"(= {v} (to_real (to_int {v})))" for v in list(variables) + enc.fresh_vars
        ] + enc.aux
    if enc.aux:
        body = "(and " + " ".join(enc.aux + [body]) + ")"
    return SmtJob(
        logic="ALL",
        declarations=decls,
        assertion=body,
        command=solver.resolved_command(),
        timeout=solver.timeout,
        axioms=axioms,
        variables=variables,
        name=name,
    )


# ---------------------------------------------------------------------------
# Solver driver
# ---------------------------------------------------------------------------

_DEBUG_SEQ = [0]


def check(job: SmtJob, confirmer=None, debug_dir: str | None = None) -> VerificationResult:
    """Run one batch solver query: unsat proves the candidate; sat yields a
    counterexample (confirmed through `confirmer` when given); anything else
    is Unknown."""
    script = job.script
    if debug_dir:
        os.makedirs(debug_dir, exist_ok=True)
        _DEBUG_SEQ[0] += 1
        path = os.path.join(debug_dir, f"{job.name}-{_DEBUG_SEQ[0]:03d}.smt2")
        with open(path, "w") as fh:
            fh.write(script)
    with tempfile.NamedTemporaryFile(
        "w", suffix=".smt2", prefix="recsolve-", delete=False
    ) as fh:
        fh.write(script)
        tmp = fh.name
    try:
        try:
            proc = subprocess.run(
                list(job.command) + [tmp],
                capture_output=True,
                text=True,
                timeout=job.timeout,
            )
        except FileNotFoundError as exc:
            raise SolverNotFound(" ".join(job.command)) from exc
        except subprocess.TimeoutExpired:
            return Unknown("timeout")
    finally:
        try:
            os.unlink(tmp)
        except OSError:
            pass
    verdict = None
    for line in proc.stdout.splitlines():
        line = line.strip()
        if line in ("sat", "unsat", "unknown"):
            verdict = line
            break
    if verdict is None:
        if proc.returncode != 0:
            return Unknown(f"solver-crash:{proc.returncode}")
        raise MalformedSolverOutput(proc.stdout[:500])
    if verdict == "unsat":
        return Proved()
    if verdict == "unknown":
        return Unknown("solver-unknown")
    model = _parse_model(proc.stdout, job.variables)
    point = {v: model.get(v, 0) for v in job.variables}
    confirmed = bool(confirmer(point)) if confirmer is not None else False
    return Disproved(point, confirmed)


def _parse_model(stdout: str, variables) -> dict:
    from .lia import parse_sexprs, tokenize

    idx = stdout.find("sat")
    rest = stdout[idx + 3 :]
    model: dict = {}
    try:
        forms = parse_sexprs(tokenize(rest))
    except Exception as exc:
        raise MalformedSolverOutput(stdout[:500]) from exc

    def visit(form):
        if not isinstance(form, list):
            return
        if form and form[0] == "define-fun" and len(form) >= 5:
            name, args, _sort, value = form[1], form[2], form[3], form[4]
            if args == []:
                v = _parse_value(value)
                if v is not None:
                    model[name] = v
        else:
            for x in form:
                visit(x)

    for f in forms:
        visit(f)
    return model


def _parse_value(v):
    if isinstance(v, str):
        try:
            return int(v)
        except ValueError:
            try:
                return int(float(v))
            except ValueError:
                return None
    if isinstance(v, list) and len(v) == 2 and v[0] == "-":
        inner = _parse_value(v[1])
        return -inner if inner is not None else None
    if isinstance(v, list) and len(v) == 3 and v[0] == "/":
        a, b = _parse_value(v[1]), _parse_value(v[2])
        if a is not None and b:
            return a // b
    return None


# ---------------------------------------------------------------------------
# Verification pipeline
# ---------------------------------------------------------------------------


def _transcendental_count(e: Expr) -> int:
    n = 0
    for node in walk(e):
        if isinstance(node, (Log2, Factorial)):
            n += 1
        elif isinstance(node, Pow) and not (
            isinstance(node.exp, Const) and node.exp.value.denominator == 1 and 0 <= node.exp.value <= 8
        ):
            n += 1
    return n


def _make_entailment_checker(variables, solver: SolverConfig, debug_dir=None):
    cache: dict = {}

    def entails(hyp: BoolExpr, concl: BoolExpr) -> bool:
        key = (hyp, concl)
        if key in cache:
            return cache[key]
        goal = And(hyp, Not(concl))
        try:
            job = build_job(tuple(variables), goal, solver, name="entail")
        except EncodingError:
            cache[key] = False
            return False
        try:
            res = check(job, debug_dir=debug_dir)
        except (SolverNotFound, MalformedSolverOutput):
            res = None
        cache[key] = isinstance(res, Proved)
        return cache[key]

    return entails


def _positive_divisors(func: FuncDef, eqs, entails) -> set[str]:
    """Variable divisors inside floor/ceil that the precondition proves
    strictly positive (their quotient encoding needs the sign)."""
    from .dsl import print_expr

    out: set[str] = set()
    for eq in eqs:
        for node in walk(eq):
            if isinstance(node, (Floor, Ceil)) and isinstance(node.arg, Div):
                den = node.arg.rhs
                if isinstance(den, Const):
                    continue
                if entails(func.precondition, Cmp(">=", den, Const(Fraction(1)))):
                    out.add(print_expr(den))
    return out


def verify(
    system: RecurrenceSystem,
    cand: PiecewiseClosedForm,
    solver: SolverConfig | None = None,
    budget: EvalBudget | None = None,
) -> VerificationResult:
    """Check a candidate closed form against a single-equation system:
    replace calls, simplify, refuse what the encoding cannot express, then
    ask the solver for a countermodel of the equation.  Counterexamples are
    confirmed against the evaluator before being trusted."""
    solver = solver or SolverConfig()
    if not system.is_single_equation():
        return Unsupported(("system-of-equations",))
    if not cand.pieces:
        return Unsupported(("empty-candidate",))
    if not cand.exact_coeffs:
        return Unsupported(("non-rational-coefficients",))
    f = system.entry_func
    params = tuple(f.params)
    pre = f.precondition

    job = _encode_only(system, cand, solver)
    if isinstance(job, Unsupported):
        return job

    def confirmer(point: dict) -> bool:
        ev = Evaluator(system, budget or EvalBudget())
        args = tuple(point[p] for p in params)
        if not eval_bool(pre, dict(zip(params, args))):
            return False
        try:
            actual = ev.eval_fun(f.name, args)
        except (EvalError, NoMatchingCase, BudgetExceeded):
            return False
        got = eval_piecewise(cand, dict(zip(params, args)))
        if got is None:
            return True  # no piece covers an in-domain point
        if isinstance(actual, float) or isinstance(got, float):
            return not math.isclose(float(actual), float(got), rel_tol=1e-9, abs_tol=1e-9)
        return actual != got

    try:
        return check(job, confirmer, solver.debug_dir)
    except MalformedSolverOutput:
        return Unknown("malformed-solver-output")


def eval_piecewise(cand: PiecewiseClosedForm, env: dict):
    """Pieces are tried in order and the last one is the default branch,
    mirroring the nested-conditional inlining used for verification (a
    single-piece candidate is a global expression; its recorded domain only
    documents where it was fitted).  Evaluation is guarded, matching the
    feature semantics candidates were fitted under."""
    if not cand.pieces:
        return None
    for p in cand.pieces[:-1]:
        if eval_bool(p.domain, env):
            return eval_ground(p.body, env, guarded=True)
    return eval_ground(cand.pieces[-1].body, env, guarded=True)


def encode(
    func: FuncDef,
    cand: PiecewiseClosedForm,
    solver: SolverConfig | None = None,
) -> SmtJob | Unsupported:
    """Build the solver job for a single function definition and candidate
    (the full replace/simplify/encode pipeline, without running the check)."""
    solver = solver or SolverConfig()
    system = RecurrenceSystem({func.name: func}, func.name)
    # reuse verify's plumbing up to job construction
    result = _encode_only(system, cand, solver)
    return result


def _guard_bindings(guard: BoolExpr) -> dict:
    """Variables a conjunctive guard pins to constants (x = 3 conjuncts);
    substituting them specializes base-case equations so that exponential
    subterms constant-fold away."""
    out: dict = {}

    def collect(b):
        if isinstance(b, And):
            collect(b.lhs)
            collect(b.rhs)
        elif isinstance(b, Cmp) and b.op == "=":
            if isinstance(b.lhs, Var) and isinstance(b.rhs, Const):
                out[b.lhs.name] = b.rhs
            elif isinstance(b.rhs, Var) and isinstance(b.lhs, Const):
                out[b.rhs.name] = b.lhs

    collect(guard)
    return out


def _encode_only(system, cand, solver):
    f = system.entry_func
    params = tuple(f.params)
    # side-condition queries always use the plain integer encoding
    side_solver = (
        SolverConfig(command=solver.command, timeout=solver.timeout)
        if solver.real_encoding
        else solver
    )
    entails = _make_entailment_checker(params, side_solver)
    lhs_raw = inline_candidate(cand, tuple(Var(p) for p in params), params)
    case_eqs = []
    prev_ctx: BoolExpr = TRUE
    for case in f.cases:
        # calls are replaced under the sequential case context: earlier
        # guards are known false when this case fires
        ctx = case.guard if isinstance(prev_ctx, TrueExpr) else And(prev_ctx, case.guard)
        rhs_raw = replace_calls(case.body, f, cand, f.precondition, ctx, entails)
        prev_ctx = (
            Not(case.guard)
            if isinstance(prev_ctx, TrueExpr)
            else And(prev_ctx, Not(case.guard))
        )
        if contains_calls(rhs_raw, f.name):
            # an unexpressible candidate blocks even the side conditions;
            # report the construct rather than the consequence
            bad: list[str] = []
            for piece in cand.pieces:
                bad.extend(contains_unsupported(simplify(piece.body)))
            return Unsupported(tuple(sorted(set(bad))) if bad else ("unresolved-call",))
        bindings = _guard_bindings(case.guard)
        lhs_case = substitute(lhs_raw, bindings) if bindings else lhs_raw
        rhs_case = substitute(rhs_raw, bindings) if bindings else rhs_raw
        lhs_s, rhs_s = simplify(lhs_case), simplify(rhs_case)
        if _transcendental_count(lhs_s) + _transcendental_count(rhs_s) > 0:
            diff = simplify(Sub(lhs_s, rhs_s))
            if _transcendental_count(diff) == 0:
                eq = Cmp("=", diff, Const(Fraction(0)))
            else:
                eq = Cmp("=", lhs_s, rhs_s)
        else:
            eq = Cmp("=", lhs_s, rhs_s)
        bad = sorted(set(contains_unsupported(eq.lhs) + contains_unsupported(eq.rhs)))
        if bad:
            return Unsupported(tuple(bad))
        case_eqs.append((case.guard, eq))
    positive = _positive_divisors(f, [eq for _, eq in case_eqs], entails)
    disjuncts = []
    prev = None
    for guard, eq in case_eqs:
        body = And(guard, Not(eq))
        if prev is not None:
            body = And(prev, body)
        disjuncts.append(body)
        neg = Not(guard)
        prev = neg if prev is None else And(prev, neg)
    negformula = disjuncts[0]
    for d in disjuncts[1:]:
        negformula = Or(negformula, d)
    try:
        return build_job(
            params, And(f.precondition, negformula), solver, positive,
            name=f"verify-{f.name}",
        )
    except EncodingError as exc:
        return Unsupported((exc.offending,))
