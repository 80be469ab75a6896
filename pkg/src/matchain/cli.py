"""Command-line driver: solve every compute statement in a problem file.

Exit codes: 0 on success, 1 for input diagnostics (unreadable or
malformed files, chain validation failures), 2 for solver failures (no
applicable kernel, unsatisfiable single-factor chains, oracle rejection
or disagreement under ``--verify``).
"""

from __future__ import annotations

import argparse
import shlex
import sys

from .codegen import emit_records, emit_text
from .errors import (
    KernelConfigError,
    NoKernelApplicableError,
    ProblemFileError,
    UnsatisfiableError,
)
from .expr import load_problem, validate
from .kernels import load_kernel_config, metric_by_name
from .oracle import MAX_FACTORS, brute_force_min
from .solver import naive_cost, solve


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchain",
        description="Map matrix product chains onto cost-optimal kernel calls.",
    )
    parser.add_argument("problem", help="problem file with declarations and compute statements")
    parser.add_argument(
        "--metric",
        choices=("flops", "memory"),
        default="flops",
        help="additive cost metric (default: flops)",
    )
    parser.add_argument(
        "--kernels",
        metavar="FILE",
        help="kernel config file overriding/extending the built-in database",
    )
    parser.add_argument(
        "--format",
        choices=("text", "records"),
        default="text",
        help="output format (default: text)",
    )
    parser.add_argument(
        "--naive",
        action="store_true",
        help="also report the strict left-to-right cost and the ratio",
    )
    parser.add_argument(
        "--verify",
        action="store_true",
        help=f"check each plan against the brute-force oracle (max {MAX_FACTORS} factors)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="run seed recorded in the records summary",
    )
    return parser


def _fail(message: str) -> None:
    print(f"matchain: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    metric = metric_by_name(args.metric)

    try:
        with open(args.problem, encoding="utf-8") as handle:
            problem_text = handle.read()
    except OSError as exc:
        _fail(str(exc))
        return 1

    db = None
    if args.kernels:
        try:
            with open(args.kernels, encoding="utf-8") as handle:
                db = load_kernel_config(handle.read())
        except OSError as exc:
            _fail(str(exc))
            return 1
        except KernelConfigError as exc:
            _fail(f"{args.kernels}: {exc}")
            return 1

    try:
        problem = load_problem(problem_text)
    except ProblemFileError as exc:
        _fail(f"{args.problem}: {exc}")
        return 1

    bad_input = False
    for stmt in problem.computes:
        for diag in validate(stmt.chain):
            _fail(f"{args.problem}: line {stmt.lineno}: {diag}")
            bad_input = True
    if bad_input:
        return 1

    failed = False
    blocks = []
    for stmt in problem.computes:
        try:
            plan = solve(stmt.chain, db, metric)
        except (NoKernelApplicableError, UnsatisfiableError) as exc:
            _fail(f"{args.problem}: line {stmt.lineno}: {exc}")
            failed = True
            continue

        extra = []
        if args.naive:
            naive = naive_cost(stmt.chain, db, metric)
            ratio = naive / plan.total_cost if plan.total_cost else float("inf")
            extra.append(("naive", naive, ratio))
        if args.verify:
            if len(stmt.chain.factors) > MAX_FACTORS:
                _fail(
                    f"{args.problem}: line {stmt.lineno}: --verify supports at "
                    f"most {MAX_FACTORS} factors, got {len(stmt.chain.factors)}"
                )
                failed = True
                continue
            oracle_min, _ = brute_force_min(stmt.chain, db, metric)
            tolerance = 1e-9 * max(1.0, abs(oracle_min))
            agree = abs(plan.total_cost - oracle_min) <= tolerance
            extra.append(("verify", agree, oracle_min))
            if not agree:
                failed = True

        if args.format == "records":
            block = [f"statement lineno={stmt.lineno} source={shlex.quote(stmt.source)}"]
            block.append(emit_records(plan, seed=args.seed).rstrip("\n"))
            for kind, *values in extra:
                if kind == "naive":
                    naive, ratio = values
                    block.append(f"naive total={naive!r} ratio={ratio!r}")
                else:
                    agree, oracle_min = values
                    word = "agree" if agree else "disagree"
                    block.append(f"verify oracle={word} oracle_total={oracle_min!r}")
        else:
            block = [f"# compute {stmt.source}"]
            block.append(emit_text(plan).rstrip("\n"))
            for kind, *values in extra:
                if kind == "naive":
                    naive, ratio = values
                    block.append(
                        f"# naive_{plan.metric_name}={int(naive)} ratio={ratio:g}"
                    )
                else:
                    agree, oracle_min = values
                    word = "agree" if agree else "disagree"
                    line = f"# oracle={word}"
                    if not agree:
                        line += f" oracle_{plan.metric_name}={int(oracle_min)}"
                    block.append(line)
        blocks.append("\n".join(block))

    if blocks:
        print("\n\n".join(blocks))
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
