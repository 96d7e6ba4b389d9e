"""Safe dual bounds from untrusted float duals.

Solve a relaxation in floating point, then turn its dual vector into a bound
that is valid in exact arithmetic: once with bound-shift, once with
project-and-shift.  Both are compared with the exact LP value.
"""
import numpy as np

from exactmip import approximate, bound_shift, interior_point, project_and_shift, solve_exact_lp, solve_fp_lp
from exactmip.generators import random_mip

model = random_mip(12)
fp = solve_fp_lp(approximate(model))
exact = solve_exact_lp(model).objective
print(f"float LP value      : {fp.objective!r}")
print(f"exact LP value      : {exact} (~{float(exact)!r})")

ip = interior_point(model)
for noise in (0.0, 1e-8, 1e-2):
    y = fp.y + noise * np.random.default_rng(0).standard_normal(model.m)
    for res in (bound_shift(model, y), project_and_shift(model, y, ip)):
        ok = "ok" if res.bound <= exact else "INVALID"
        print(f"noise {noise:<6g} {res.method:<7} bound {float(res.bound):+.12f}  [{ok}] {res.message}")

# a textbook case: one row, y_bar = fl(1/3); the exact shifted value is y_bar itself
from fractions import Fraction
from exactmip import build_model
third = build_model([[3]], ["G"], [1], [1], upper=[1])
b = bound_shift(third, [float(Fraction(1, 3))])
print("min x s.t. 3x >= 1   :", b.bound, "<", Fraction(1, 3), "=", b.bound < Fraction(1, 3))
