"""Command line front end: solve one benchmark, run a corpus directory, or
check a hand-written closed form.

Exit codes: 0 success, 1 usage error, 2 internal error.  Classification
outcomes never affect the exit code.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
from dataclasses import replace

import numpy as np

from .dsl import parse, parse_candidate, print_piecewise
from .harness import RunConfig, has_internal_errors, run_benchmark, run_corpus
from .linear import LassoConfig
from .report import emit_report, summarize, write_report
from .sampler import SampleConfig
from .smt import SolverConfig, verify
from .symbolic import GPConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(p: _Parser):
    p.add_argument("--method", choices=["lasso", "symreg", "auto"], default="lasso")
    p.add_argument("--domsplit", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--bound", default="auto", help="'auto' for the 20/10/5/3 ladder, or a single integer")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--lambda-grid", default="0.001:1:100", metavar="LO:HI:COUNT")
    p.add_argument("--repeat", type=int, default=2)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--solver", default=None, help="SMT solver command (overrides RECSOLVE_SMT_CMD)")
    p.add_argument("--smt-timeout", type=float, default=10.0)
    p.add_argument("--out", default=None, help="report path (.jsonl; a .csv sits beside it)")
    p.add_argument("--debug-smt", action="store_true", help="persist SMT scripts beside the report")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--gp-populations", type=int, default=45)
    p.add_argument("--gp-size", type=int, default=33)
    p.add_argument("--gp-iterations", type=int, default=40)


def _config(args) -> RunConfig:
    lo, hi, count = args.lambda_grid.split(":")
    grid = tuple(np.geomspace(float(lo), float(hi), int(count)))
    ladder = (20, 10, 5, 3) if args.bound == "auto" else (int(args.bound),)
    debug_dir = None
    if args.debug_smt:
        debug_dir = (os.path.dirname(args.out) or ".") if args.out else "."
    solver = SolverConfig(
        command=tuple(shlex.split(args.solver)) if args.solver else None,
        timeout=args.smt_timeout,
        debug_dir=debug_dir,
    )
    return RunConfig(
        method=args.method,
        domsplit=args.domsplit,
        seed=args.seed,
        repeat=args.repeat,
        sample=SampleConfig(n=args.samples, bound_ladder=ladder, seed=args.seed, folds=args.folds),
        lasso=LassoConfig(lambda_grid=grid, folds=args.folds, epsilon=args.epsilon, seed=args.seed),
        gp=GPConfig(
            populations=args.gp_populations,
            population_size=args.gp_size,
            iterations=args.gp_iterations,
            seed=args.seed,
        ),
        verify=args.verify,
        solver=solver,
        jobs=args.jobs,
    )


def main(argv=None) -> int:
    parser = _Parser(prog="recsolve", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_solve = sub.add_parser("solve", help="solve a single .rec benchmark")
    p_solve.add_argument("file")
    _add_common(p_solve)

    p_corpus = sub.add_parser("corpus", help="run every .rec benchmark in a directory")
    p_corpus.add_argument("dir")
    _add_common(p_corpus)

    p_check = sub.add_parser("check", help="verify a hand-written closed form")
    p_check.add_argument("file")
    p_check.add_argument("--candidate", required=True, help='e.g. "x" or "piece x>0 -> x piece x=0 -> 0"')
    p_check.add_argument("--solver", default=None)
    p_check.add_argument("--smt-timeout", type=float, default=10.0)
    p_check.add_argument("--debug-smt", action="store_true")

    args = parser.parse_args(argv)
    try:
        if args.cmd == "solve":
            return _cmd_solve(args)
        if args.cmd == "corpus":
            return _cmd_corpus(args)
        return _cmd_check(args)
    except SystemExit:
        raise
    except BrokenPipeError:
        return 0
    except Exception as exc:  # internal error contract
        print(f"recsolve: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _cmd_solve(args) -> int:
    cfg = _config(args)
    result = run_benchmark(args.file, cfg)
    print(f"benchmark:      {result.name} [{result.category}]")
    print(f"method:         {result.method}")
    print(f"candidate:      {result.candidate or '(none)'}")
    print(f"score:          {result.score:.6g}")
    print(f"verification:   {result.verification}")
    print(f"classification: {result.classification}")
    if result.error:
        print(f"error:          {result.error}")
    if args.out:
        write_report([result], args.out)
        print(f"report:         {args.out}")
    return 2 if result.error else 0


def _cmd_corpus(args) -> int:
    cfg = _config(args)
    results = run_corpus(args.dir, cfg)
    for r in results:
        print(f"{r.name:24s} {r.category:10s} {r.classification:10s} {r.verification:12s} {r.score:.4g}")
    summary = summarize(results)
    print(f"-- {summary['benchmarks']} benchmarks: " + ", ".join(f"{k}={v}" for k, v in summary["classes"].items()))
    if args.out:
        write_report(results, args.out)
        print(f"report: {args.out}")
    return 2 if has_internal_errors(results) else 0


def _cmd_check(args) -> int:
    with open(args.file) as fh:
        bf = parse(fh.read())
    cand = parse_candidate(args.candidate)
    solver = SolverConfig(
        command=tuple(shlex.split(args.solver)) if args.solver else None,
        timeout=args.smt_timeout,
        debug_dir="." if args.debug_smt else None,
    )
    result = verify(bf.system, cand, solver)
    print(f"candidate: {print_piecewise(cand)}")
    print(f"result:    {result}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
