"""Why exact arithmetic: a tiny LP whose optimum is not a binary64 number.

min y  s.t.  1000000001 y >= 1000000000,  0 <= y <= 1
"""
from fractions import Fraction

from exactmip import approximate, solve, solve_exact_lp, solve_fp_lp
from exactmip.generators import exactness_showcase

model = exactness_showcase()

fp = solve_fp_lp(approximate(model))
print("float LP answer      :", repr(fp.x[0]))
print("as a rational        :", Fraction(float(fp.x[0])))

lp = solve_exact_lp(model)
print("exact LP answer      :", lp.x[0])
print("refinement rounds    :", lp.rounds, "| rational pivots:", lp.rational_pivots)

# the float result sits on the wrong side of the constraint or off the optimum
act = 1000000001 * Fraction(float(fp.x[0]))
print("float point feasible?:", act >= 1000000000, "| optimal?", Fraction(float(fp.x[0])) == lp.x[0])

res = solve(model)
print("MIP solver objective :", res.objective, f"(status {res.status})")
