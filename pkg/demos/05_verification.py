"""The check stage: from candidate to proof or counterexample.

The candidate replaces every recursive call (innermost first, with an
entailment side-condition keeping substitutions inside the domain), the
equation per case is simplified, and the negation of the conjunction goes
to an SMT solver over the integers. unsat means the candidate solves the
equation exactly; sat gives a counterexample that is replayed through the
evaluator before being reported.
"""

from recsolve import dsl
from recsolve.dsl import parse_candidate
from recsolve.smt import encode, verify

nested = dsl.parse(
    "def f(x) pre x >= 0 { case x = 0 -> 0 case x > 0 -> f(f(x - 1)) + 1 } entry f"
)

job = encode(nested.system.entry_func, parse_candidate("x"))
print("SMT-LIB2 job for the correct candidate:")
print(job.script)
print("verdict:", verify(nested.system, parse_candidate("x")))

print("\noff-by-one candidate:")
print("verdict:", verify(nested.system, parse_candidate("x + 1")))

# Algebra bridges what the solver cannot do alone: the difference of
# exponentials cancels during rewriting, so the solver only sees 0 = 0.
exp1 = dsl.parse(
    "def f(x) pre x >= 0 { case x = 0 -> 1 case x > 0 -> 2*f(x - 1) + 1 } entry f"
)
print("\nexponential closed form 2^(x+1) - 1:")
print("verdict:", verify(exp1.system, parse_candidate("2^(x+1) - 1")))

# Piecewise candidates inline as nested conditionals.
merge = dsl.parse(
    "def f(x, y) pre x >= 0 and y >= 0 {"
    " case x > 0 and y > 0 -> 1 + max(f(x - 1, y), f(x, y - 1))"
    " case x = 0 or y = 0 -> 0 } entry f"
)
cand = parse_candidate("piece x > 0 and y > 0 -> x + y - 1 piece x = 0 or y = 0 -> 0")
print("\npiecewise merge candidate:")
print("verdict:", verify(merge.system, cand))
print("\nglobal x + y - 1 (wrong at the boundary):")
print("verdict:", verify(merge.system, parse_candidate("x + y - 1")))
