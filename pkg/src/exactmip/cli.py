"""Command-line front end: ``solve``, ``check`` and ``bench``."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .certificate import CertificateParseError, check_certificate
from .model import parse_mps, write_solution
from .numerics import ParseError, format_rational, is_finite, nearest_float
from .tree import Config, SolveResult, solve

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_PARSE = 2
EXIT_LIMIT = 3
EXIT_UNBOUNDED = 4

TIME_SHIFT = 0.001
NODE_SHIFT = 100.0

STATS_FIELDS = ("instance", "seed", "status", "objective", "nodes", "time",
                "dbtime", "dbtime_bshift", "dbtime_pshift", "dbtime_exlp", "gap")


def shifted_geomean(values: Iterable[float], shift: float = 0.0) -> float:
    """``(prod(v + s))**(1/k) - s``.

    Falls back to a log-space mean when the plain product overflows or
    underflows.  A list of identical values returns that value unchanged.
    """
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("shifted_geomean of an empty sequence")
    shift = float(shift)
    if shift < 0 or any(v + shift <= 0 for v in vals):
        raise ValueError("values plus shift must be positive")
    if all(v == vals[0] for v in vals):
        return vals[0]
    k = len(vals)
    prod = math.prod(v + shift for v in vals)
    if prod == 0.0 or math.isinf(prod):
        return math.exp(math.fsum(math.log(v + shift) for v in vals) / k) - shift
    return prod ** (1.0 / k) - shift


# ---------------------------------------------------------------------------
# per-run statistics

def _ext_float(q) -> float:
    return nearest_float(q) if is_finite(q) else float(q)


def run_stats(instance: str, seed: int, result: SolveResult, time_limit: float, maximize: bool = False) -> dict:
    solved = result.status in ("optimal", "infeasible")
    db = result.times.get("dbtime", {}) if result.times else {}
    obj = result.objective
    if maximize and is_finite(obj):
        obj = -obj
    gap = result.gap
    return {
        "instance": instance,
        "seed": seed,
        "status": result.status,
        "objective": format_rational(obj) if is_finite(obj) else ("-inf" if obj < 0 else "inf"),
        "nodes": result.nodes,
        "time": result.times.get("total", 0.0) if solved else float(time_limit),
        "dbtime": sum(db.values()),
        "dbtime_bshift": db.get("bshift", 0.0),
        "dbtime_pshift": db.get("pshift", 0.0),
        "dbtime_exlp": db.get("exlp", 0.0),
        "gap": min(_ext_float(gap), 1.0),
    }


def stats_line(row: dict) -> str:
    return (f"{row['status']} {row['objective']} {row['nodes']} {row['time']:.3f} "
            f"dbtime[{row['dbtime_bshift']:.3f},{row['dbtime_pshift']:.3f},{row['dbtime_exlp']:.3f}]")


def write_stats(path, rows: Sequence[dict]):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, STATS_FIELDS, delimiter="\t", lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def read_stats(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh, delimiter="\t"))
    for row in rows:
        row["seed"] = int(row["seed"])
        row["nodes"] = int(row["nodes"])
        for k in ("time", "dbtime", "dbtime_bshift", "dbtime_pshift", "dbtime_exlp", "gap"):
            row[k] = float(row[k])
    return rows


def aggregate(rows: Sequence[dict]) -> dict:
    """Every instance-seed pair counts as one observation.  Times and nodes
    use shifted geometric means; the gap uses the arithmetic mean."""
    if not rows:
        raise ValueError("no runs to aggregate")
    return {
        "runs": len(rows),
        "solved": sum(r["status"] in ("optimal", "infeasible") for r in rows),
        "time": shifted_geomean([r["time"] for r in rows], TIME_SHIFT),
        "nodes": shifted_geomean([r["nodes"] for r in rows], NODE_SHIFT),
        "dbtime": shifted_geomean([r["dbtime"] for r in rows], TIME_SHIFT),
        "gap": math.fsum(r["gap"] for r in rows) / len(rows),
    }


def format_table(label: str, agg: dict) -> str:
    head = f"{'config':<12} {'solved':>8} {'time':>10} {'nodes':>10} {'dbtime':>10} {'gap':>8}"
    body = (f"{label:<12} {agg['solved']:>4}/{agg['runs']:<3} {agg['time']:>10.3f} {agg['nodes']:>10.1f} "
            f"{agg['dbtime']:>10.3f} {100 * agg['gap']:>7.2f}%")
    return head + "\n" + body


# ---------------------------------------------------------------------------
# commands

def _on_off(v: Optional[str]) -> Optional[bool]:
    return None if v is None else v == "on"


def _config(args, seed: int, certificate: bool) -> tuple:
    warnings = []
    presolve = _on_off(args.presolve)
    if certificate:
        if presolve:
            warnings.append("warning: certificates need the original model; presolve disabled")
        presolve = False
    cfg = Config(time_limit=args.time_limit, node_limit=args.node_limit, seed=seed,
                 presolve=True if presolve is None else presolve,
                 heuristics=_on_off(args.heuristics) is not False,
                 certificate=certificate, bounding=args.bounding, exlp_depth=args.exlp_depth)
    return cfg, warnings


def _load(path: str, maximize: bool):
    return parse_mps(Path(path).read_text(), maximize=maximize)


def _exit_code(status: str) -> int:
    if status in ("optimal", "infeasible"):
        return EXIT_OK
    if status == "unbounded-relaxation":
        return EXIT_UNBOUNDED
    return EXIT_LIMIT


def cmd_solve(args) -> int:
    try:
        model = _load(args.instance, args.maximize)
    except (OSError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    cfg, warnings = _config(args, args.seed, args.certificate is not None)
    for w in warnings:
        print(w, file=sys.stderr)
    result = solve(model, cfg)
    row = run_stats(Path(args.instance).stem, args.seed, result, args.time_limit, model.maximize)
    print(stats_line(row))
    print(format_table("solve", aggregate([row])))
    if args.certificate is not None and result.certificate is not None:
        Path(args.certificate).write_text(result.certificate)
        print(f"certificate written to {args.certificate} "
              f"({result.times.get('certificate', 0.0):.3f}s)")
    if args.solution is not None and result.incumbent is not None:
        Path(args.solution).write_text(write_solution(model, result.incumbent))
    if args.stats is not None:
        write_stats(args.stats, [row])
    return _exit_code(result.status)


def cmd_check(args) -> int:
    try:
        model = _load(args.model, args.maximize)
        text = Path(args.certificate).read_text()
        report = check_certificate(model, text)
    except (OSError, ParseError, CertificateParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if report.accepted:
        print("accept")
        return EXIT_OK
    where = "header" if report.index is None else f"entry {report.index}"
    print(f"reject {where}: {report.cause}")
    return EXIT_REJECT


def cmd_bench(args) -> int:
    seeds = list(range(args.seeds)) if args.seeds else [args.seed]
    rows = []
    for path in args.instances:
        try:
            model = _load(path, args.maximize)
        except (OSError, ParseError) as e:
            print(f"error: {path}: {e}", file=sys.stderr)
            return EXIT_PARSE
        for seed in seeds:
            cfg, _ = _config(args, seed, False)
            result = solve(model, cfg)
            row = run_stats(Path(path).stem, seed, result, args.time_limit, model.maximize)
            print(f"{row['instance']} seed={seed} {stats_line(row)}")
            rows.append(row)
    if args.stats is not None:
        write_stats(args.stats, rows)
    print(format_table(args.bounding, aggregate(rows)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exactmip", description="Exact rational MIP solver")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--time-limit", type=float, default=7200.0)
        sp.add_argument("--node-limit", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--presolve", choices=("on", "off"), default=None)
        sp.add_argument("--heuristics", choices=("on", "off"), default=None)
        sp.add_argument("--bounding", choices=("auto", "bshift", "pshift", "exlp"), default="auto")
        sp.add_argument("--exlp-depth", type=int, default=5)
        sp.add_argument("--stats", default=None, help="tab-separated per-run statistics")
        sp.add_argument("--maximize", action="store_true", help="read the objective as a maximization")

    s = sub.add_parser("solve", help="solve one MPS instance")
    s.add_argument("instance")
    common(s)
    s.add_argument("--certificate", default=None, metavar="PATH")
    s.add_argument("--solution", default=None, metavar="PATH")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="verify a certificate against a model")
    c.add_argument("model")
    c.add_argument("certificate")
    c.add_argument("--maximize", action="store_true")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="solve a batch and aggregate")
    b.add_argument("instances", nargs="+")
    common(b)
    b.add_argument("--seeds", type=int, default=None, help="run seeds 0..N-1 per instance")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
