"""Exact presolve and postsolve.

Reductions are made with zero tolerances, the reduced model is solved, and
the postsolve stack maps its optimum back to the original columns.
"""
from collections import Counter

from exactmip import Config, check_solution_exact, postsolve, presolve, solve
from exactmip.generators import random_mip

for seed in (3, 17, 42):
    model = random_mip(seed)
    pre = presolve(model)
    if pre.status == "infeasible":
        print(f"seed {seed}: presolve proved infeasibility ({pre.witness})")
        continue
    kinds = Counter(r.kind for r in pre.stack.reductions)
    print(f"seed {seed}: {model.m}x{model.n} -> {pre.model.m}x{pre.model.n}, reductions {dict(kinds)}")
    red = solve(pre.model, Config(presolve=False))
    if red.status != "optimal":
        print("   reduced model:", red.status)
        continue
    x = postsolve(pre.stack, red.incumbent.x)
    direct = solve(model, Config(presolve=False))
    print(f"   postsolved objective {model.objective(x)} | direct {direct.objective} | "
          f"feasible: {check_solution_exact(model, x) is None}")
    again = presolve(pre.model)
    print(f"   second presolve finds {len(again.stack)} reductions")
