"""Domain splitting: fit each guard-induced subdomain separately.

Solutions are often piecewise-simple even when no simple global expression
exists. The guards of the equation itself partition the domain: the i-th
subdomain is its guard minus everything earlier guards already claimed.
"""

from recsolve import dsl
from recsolve.dsl import print_bool, print_expr
from recsolve.linear import guess_linear
from recsolve.sampler import split_domains

merge = dsl.parse(
    """
def f(x, y) pre x >= 0 and y >= 0 {
  case x > 0 and y > 0 -> 1 + max(f(x - 1, y), f(x, y - 1))
  case x = 0 or y = 0 -> 0
}
entry f
"""
)

print("subdomains induced by the guards:")
for sd in split_domains(merge.system.entry_func):
    print("  ", print_bool(sd.constraint))

flat = guess_linear(merge.system, domsplit=False)
print("\nwithout splitting (single global fit):")
for p in flat.candidate.pieces:
    print(f"  {print_expr(p.body)}   (R^2 = {p.score:.4g})")
print("  -- misses the boundary rows where one input is empty")

split = guess_linear(merge.system, domsplit=True)
print("\nwith splitting:")
for p in split.candidate.pieces:
    print(f"  on {print_bool(p.domain)}: {print_expr(p.body)}   (R^2 = {p.score:.4g})")
