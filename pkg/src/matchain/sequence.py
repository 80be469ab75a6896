"""Cheapest kernel sequence for one product of two tagged operands.

``find_sequence`` exhaustively searches call sequences of length at most
L = 3: either a single binary kernel that consumes both pending tags, or
up to two unary discharge kernels (transp, getri, trtri) followed by a
binary kernel. Unary preps for op1 precede those for op2. The result is
the minimum-cost sequence under the metric, with ties broken by sequence
length and then by the tuple of kernel ids.

``copy`` never appears as a prep: it leaves its input unchanged, so any
sequence containing it is dominated by the same sequence without it
(cost no higher under any additive metric, and shorter). It is excluded
from the search rather than filtered by the tie-break, which also keeps
the common all-tag-free case to a single database scan.

Sequences carry kernels and targets only; operand names are bound later
by :func:`render_calls`, so memoized results are shared across operands
with equal signatures.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Callable, Sequence

from .errors import NoKernelApplicableError, UnsatisfiableError
from .expr import UnaryTag
from .kernels import (
    FLOPS,
    Kernel,
    KernelCall,
    TaggedOperand,
    call_mkn,
    default_db,
    match,
)

#: Maximum number of kernel calls per combination step.
L = 3


@dataclass(frozen=True)
class SeqStep:
    """One call in a sequence: the kernel and which operand it applies to.

    ``target`` is ``"op1"`` or ``"op2"`` for unary discharge steps and
    ``"both"`` for the final binary kernel.
    """

    kernel: Kernel
    target: str


@dataclass(frozen=True)
class SequenceResult:
    steps: tuple[SeqStep, ...]
    total_cost: float
    output: TaggedOperand

    @property
    def kernel_ids(self) -> tuple[str, ...]:
        return tuple(step.kernel.id for step in self.steps)


def _prep_chains(op: TaggedOperand, db, metric, max_len: int):
    """All discharge chains of length <= max_len starting from ``op``.

    Yields (steps, cost, result) triples, including the empty chain.
    """
    out = [((), 0.0, op)]
    frontier = [((), 0.0, op)]
    for _ in range(max_len):
        grown = []
        for steps, cost, cur in frontier:
            for kernel, _ in match(cur, None, db):
                if kernel.peel is None:
                    continue
                result = kernel.apply_unary(cur, "")
                step_cost = metric.call_cost(
                    kernel, call_mkn((cur,)), (result.rows, result.cols)
                )
                grown.append((steps + (kernel,), cost + step_cost, result))
        out.extend(grown)
        frontier = grown
    return out


def find_sequence(
    op1: TaggedOperand,
    op2: TaggedOperand,
    db: Sequence[Kernel] | None = None,
    metric=FLOPS,
    memo: dict | None = None,
) -> SequenceResult:
    """Cheapest sequence of at most L calls computing ``op1 * op2``.

    ``memo`` maps signature pairs to results; share one dict only across
    calls with the same db and metric. Raises
    :class:`NoKernelApplicableError` when the database has no route.
    """
    if db is None:
        db = default_db()
    if op1.eff_dims[1] != op2.eff_dims[0]:
        raise ValueError(
            f"nonconforming product: {op1.eff_dims} times {op2.eff_dims}"
        )
    key = (op1.signature(), op2.signature())
    if memo is not None:
        hit = memo.get(key)
        if hit is not None:
            return hit

    best = None
    best_key = None
    for steps1, cost1, cur1 in _prep_chains(op1, db, metric, L - 1):
        budget = L - 1 - len(steps1)
        for steps2, cost2, cur2 in _prep_chains(op2, db, metric, budget):
            for kernel, _ in match(cur1, cur2, db):
                out = kernel.apply_binary(cur1, cur2, "")
                bin_cost = metric.call_cost(
                    kernel, call_mkn((cur1, cur2)), (out.rows, out.cols)
                )
                steps = (
                    tuple(SeqStep(k, "op1") for k in steps1)
                    + tuple(SeqStep(k, "op2") for k in steps2)
                    + (SeqStep(kernel, "both"),)
                )
                total = cost1 + cost2 + bin_cost
                cand_key = (total, len(steps), tuple(s.kernel.id for s in steps))
                if best_key is None or cand_key < best_key:
                    best_key = cand_key
                    best = SequenceResult(steps, total, out)

    if best is None:
        raise NoKernelApplicableError(
            f"no kernel sequence of length <= {L} computes "
            f"{_describe(op1)} * {_describe(op2)}"
        )
    if memo is not None:
        memo[key] = best
    return best


def materialize(
    op: TaggedOperand,
    db: Sequence[Kernel] | None = None,
    metric=FLOPS,
) -> SequenceResult:
    """Cheapest unary sequence that discharges ``op``'s tag completely.

    Used for single-factor chains, where the pending tag cannot be
    deferred into a combination. A tag-free operand still costs one
    ``copy`` call, since a plan must produce its target. Raises
    :class:`UnsatisfiableError` when no unary route reaches a plain
    operand.
    """
    if db is None:
        db = default_db()
    best = None
    best_key = None
    frontier = [((), 0.0, op)]
    for _ in range(L):
        grown = []
        for steps, cost, cur in frontier:
            for kernel, _ in match(cur, None, db):
                result = kernel.apply_unary(cur, "")
                step_cost = metric.call_cost(
                    kernel, call_mkn((cur,)), (result.rows, result.cols)
                )
                grown.append((steps + (kernel,), cost + step_cost, result))
        for steps, cost, cur in grown:
            if steps and cur.tag is UnaryTag.ID:
                cand_key = (cost, len(steps), tuple(k.id for k in steps))
                if best_key is None or cand_key < best_key:
                    best_key = cand_key
                    best = SequenceResult(
                        tuple(SeqStep(k, "op1") for k in steps), cost, cur
                    )
        frontier = grown
    if best is None:
        raise UnsatisfiableError(
            f"no unary kernel sequence materializes {_describe(op)}"
        )
    return best


def render_calls(
    seq: SequenceResult,
    op1: TaggedOperand,
    op2: TaggedOperand | None,
    out_name: str,
    alloc_temp: Callable[[], str],
    metric=FLOPS,
) -> tuple[list[KernelCall], TaggedOperand]:
    """Bind operand names to a sequence, producing concrete calls.

    ``op1``/``op2`` are the named operands the sequence was found for;
    intermediate outputs draw names from ``alloc_temp`` (called with the
    step's input operand, or None for a binary step) and the final call
    writes ``out_name``. Returns the calls and the named final operand.
    """
    cur = {"op1": op1, "op2": op2}
    calls = []
    final = None
    for at, step in enumerate(seq.steps):
        is_last = at == len(seq.steps) - 1
        kernel = step.kernel
        if step.target == "both":
            left, right = cur["op1"], cur["op2"]
            name = out_name if is_last else alloc_temp(None)
            result = kernel.apply_binary(left, right, name)
            cost = metric.call_cost(
                kernel, call_mkn((left, right)), (result.rows, result.cols)
            )
            calls.append(
                KernelCall(
                    kernel.id,
                    (left.name, right.name),
                    name,
                    cost,
                    f"{name} := {left.display} * {right.display}",
                )
            )
        else:
            inp = cur[step.target]
            name = out_name if is_last else alloc_temp(inp)
            result = kernel.apply_unary(inp, name)
            cost = metric.call_cost(
                kernel, call_mkn((inp,)), (result.rows, result.cols)
            )
            if kernel.peel == "t":
                math = f"{inp.name}^T"
            elif kernel.peel == "inv":
                math = f"{inp.name}^-1"
            else:
                math = inp.name
            calls.append(
                KernelCall(kernel.id, (inp.name,), name, cost, f"{name} := {math}")
            )
            cur[step.target] = result
        final = result
    return calls, final


def _describe(op: TaggedOperand) -> str:
    props = ",".join(sorted(p.value for p in op.props)) or "none"
    label = op.name or "operand"
    return f"{label}{op.tag.value} ({op.rows}x{op.cols}, props: {props})"
