"""Where you put the parentheses decides how much you pay.

A product chain is associative, so every parenthesization computes the
same result; the flop counts differ wildly. The solver runs a dynamic
program over all contiguous segments and returns the cheapest plan.
"""

from matchain import emit_text, matrix, naive_cost, parse, solve, vector

# The textbook example: three rectangular factors where multiplying the
# small pair first is 10x cheaper than going left to right.
chain = parse(
    "D = A1 * A2 * A3",
    [
        matrix("A1", 10, 100),
        matrix("A2", 100, 5),
        matrix("A3", 5, 50),
        matrix("D", 10, 50),
    ],
)
plan = solve(chain)
other = 2 * 100 * 5 * 50 + 2 * 10 * 100 * 50  # A1 * (A2 * A3)
print("chain:      D = A1 * A2 * A3   (10x100, 100x5, 5x50)")
print(f"parens:     {plan.parenthesization}")
print(f"optimal:    {plan.total_cost:.0f} flops")
print(f"other tree: {other} flops")
print()
print(emit_text(plan))

# With a vector at the end, right to left is the only sane order: every
# intermediate stays a vector and no matrix-matrix product ever happens.
chain = parse(
    "y = M1 * M2 * x",
    [
        matrix("M1", 100, 100),
        matrix("M2", 100, 100),
        vector("x", 100),
        vector("y", 100),
    ],
)
plan = solve(chain)
ratio = naive_cost(chain) / plan.total_cost
print("chain:      y = M1 * M2 * x   (two 100x100 matrices, one vector)")
print(f"optimal:    {plan.total_cost:.0f} flops, naive is {ratio:.1f}x worse")
print()
print(emit_text(plan))
