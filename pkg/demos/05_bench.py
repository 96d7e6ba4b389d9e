"""Benchmark aggregation through the command-line interface.

Three small instances, three seeds each; every instance-seed pair is one
observation.  Times and node counts use shifted geometric means, the gap an
arithmetic mean.
"""
import tempfile
from pathlib import Path

from exactmip.cli import aggregate, main, read_stats, shifted_geomean
from exactmip.generators import knapsack, parity, tenths
from exactmip.model import write_mps

with tempfile.TemporaryDirectory() as tmp:
    paths = []
    for model in (knapsack(), parity(), tenths()):
        p = Path(tmp) / f"{model.name}.mps"
        p.write_text(write_mps(model))
        paths.append(str(p))
    stats = Path(tmp) / "runs.tsv"
    main(["bench", *paths, "--seeds", "3", "--stats", str(stats)])
    rows = read_stats(stats)
    print("\nrecomputed from the stats file:", aggregate(rows))

print("shifted_geomean([100, 400], 100) =", shifted_geomean([100, 400], 100))
print("shifted_geomean([2, 8], 0)       =", shifted_geomean([2, 8], 0))
