"""Swap the kernel database or the cost metric; the search stays the same.

The solver is parametric in both. A kernel config file overrides
built-in cost models or adds new kernels; a metric assigns each call a
nonnegative cost, and nothing in the search assumes it counts flops.
"""

from matchain import (
    MEMORY,
    emit_text,
    load_kernel_config,
    matrix,
    parse,
    solve,
    vector,
)

chain = parse(
    "D = A * B * C",
    [
        matrix("A", 40, 40),
        matrix("B", 40, 40),
        matrix("C", 40, 40),
        matrix("D", 40, 40),
    ],
)

# A fused kernel for square-times-square products at half the gemm cost.
# Overriding an existing id replaces it in place; new ids append.
config = """
kernel sqmm arity=2 tags=id;id req=square;square cost=m*m*n
"""
print("default database:")
print(emit_text(solve(chain)))
print("with a cheap fused square multiply:")
print(emit_text(solve(chain, load_kernel_config(config))))

# Under the memory metric a call costs the elements it writes, so the
# cheapest plan is the one with the smallest temporaries. These dims are
# chosen so that the flop-optimal and memory-optimal trees differ: the
# left split writes fewer flops through a 10x100 temporary, the right
# split does more arithmetic but only ever stores a 30x30 block.
chain = parse(
    "D = A * B * C",
    [
        matrix("A", 10, 30),
        matrix("B", 30, 100),
        matrix("C", 100, 30),
        matrix("D", 10, 30),
    ],
)
flops_plan = solve(chain)
memory_plan = solve(chain, metric=MEMORY)
print("flops metric:")
print(emit_text(flops_plan))
print("memory metric:")
print(emit_text(memory_plan))
