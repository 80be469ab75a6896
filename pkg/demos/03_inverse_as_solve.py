"""An inverse in the formula is not an inversion in the program.

Writing A^-1 * b asks for the solution of a linear system. Explicitly
inverting A costs 2n^3 flops before the multiply even starts; a solver
kernel does the whole job in a third of that. Inverse annotations stay
pending on the operand until a kernel that consumes them directly is
found, and explicit inversion is the fallback, not the default.
"""

from matchain import Property, emit_text, matrix, parse, solve, vector

P = Property

# A^-1 * B * y: combine B*y first (vector result), then one gesv call
# discharges the inverse. No getri anywhere.
chain = parse(
    "x = A^-1 * B * y",
    [
        matrix("A", 1000, 1000),
        matrix("B", 1000, 1000),
        vector("y", 1000),
        vector("x", 1000),
    ],
)
plan = solve(chain)
print("chain: x = A^-1 * B * y")
print(emit_text(plan))

# Structure makes it cheaper still: a triangular system is a single
# back-substitution, an SPD system goes through Cholesky-based posv.
for props, label in [
    ({P.LOWER_TRIANGULAR}, "lower triangular"),
    ({P.SPD}, "symmetric positive definite"),
    (set(), "full"),
]:
    chain = parse(
        "x = A^-1 * y",
        [matrix("A", 500, 500, props), vector("y", 500), vector("x", 500)],
    )
    plan = solve(chain)
    kernel = plan.calls[-1].kernel_id
    print(f"A {label:28s} -> {kernel:6s} {plan.total_cost:14.0f} flops")
print()

# The transpose of an inverse also stays symbolic: for A^-T * B the plan
# transposes A (n^2 data movement) and solves, rather than inverting.
chain = parse(
    "C = A^-T * B",
    [matrix("A", 300, 300), matrix("B", 300, 300), matrix("C", 300, 300)],
)
plan = solve(chain)
print("chain: C = A^-T * B")
print(emit_text(plan))
