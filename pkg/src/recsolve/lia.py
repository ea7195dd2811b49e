"""Re-export of the bundled SMT-LIB2 linear-integer-arithmetic solver.

The implementation lives in the dependency-free top-level module
recsolve_lia so that solver subprocesses start without importing this
package (and its numeric stack).
"""

from recsolve_lia import (  # noqa: F401
    Budget,
    Builder,
    MAX_BRANCHES,
    MAX_DISJUNCTS,
    Unsupported,
    dnf,
    lin_add,
    lin_const,
    lin_eval,
    lin_scale,
    main,
    parse_sexprs,
    run_script,
    solve_conj,
    tokenize,
)
