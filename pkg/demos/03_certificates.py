"""Proofs you can check without trusting the solver.

The parity model 2x - 2y = 1 over x, y in {0..10} has no integer solution.
The solver writes a certificate of that fact; an independent checker then
accepts it, and rejects a copy with one multiplier nudged by 1/1000000.
"""
import re
from fractions import Fraction

from exactmip import Config, check_certificate, solve
from exactmip.generators import knapsack, parity

for model in (parity(), knapsack()):
    res = solve(model, Config(certificate=True))
    text = res.certificate
    n_der = int(re.search(r"^DER (\d+)", text, re.M).group(1))
    print(f"{model.name}: {res.status}, objective {res.objective}, {n_der} derived lines, "
          f"written in {res.times['certificate']:.3f}s")
    print("  checker:", check_certificate(model, text))

print("\nthe knapsack certificate, in full:")
print(solve(knapsack(), Config(certificate=True)).certificate)

# nudge the first multiplier of the first combination line
lines = solve(parity(), Config(certificate=True)).certificate.split("\n")
for i, line in enumerate(lines):
    if "{ lin" in line:
        tok = line.split()
        k = tok.index("lin") + 3
        tok[k] = str(Fraction(tok[k]) + Fraction(1, 1000000))
        lines[i] = " ".join(tok)
        break
print("tampered parity certificate:", check_certificate(parity(), "\n".join(lines)))
