"""Hybrid-precision branch and bound.

Every node relaxation is solved in floating point; its duals are turned into
an exactly valid bound by one of the safe bounding methods, and pruning only
ever compares exact rationals.  Integral-looking LP points are never trusted:
they are repaired or checked exactly before becoming incumbents.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import bounding
from .bounding import BoundingStats, DualBoundResult, inflate_objective_limit, needs_escalation
from .exact_lp import dual_value, interior_point, solve_exact_lp
from .fp_lp import solve_fp_lp
from .heuristics import RepairBudget, check_solution, fp_round_and_dive, repair, restrict_to_continuous
from .model import RationalMIP, Solution, approximate, check_solution_exact
from .numerics import INF, ExtQ, ext_add, is_finite, nearest_float
from .presolve import postsolve, presolve

INT_TOL = 1e-6
STRONG_ITERATION_LIMIT = 200
_NO_INTERIOR = object()


@dataclass
class Config:
    time_limit: float = 7200.0
    node_limit: Optional[int] = None
    seed: int = 0
    presolve: bool = True
    heuristics: bool = True
    certificate: bool = False
    bounding: str = "auto"                     # auto | bshift | pshift | exlp
    exlp_depth: int = 5
    bshift_threshold: Fraction = Fraction(1, 5)
    repair_ratio: Fraction = Fraction(1, 2)
    continuous_cutoff: Fraction = Fraction(4, 5)
    plunge_limit: int = 4
    reliability: int = 4                       # observations before pseudocosts are trusted
    heuristic_depth: int = 10
    heuristic_frequency: int = 10
    node_selection: str = "best-plunge"        # best-plunge | best
    record_trace: bool = True


@dataclass
class Node:
    id: int
    parent: Optional[int]
    depth: int
    lower: tuple
    upper: tuple
    bound: ExtQ                                # inherited (already rounded) dual bound
    basis: object = None
    parent_y: Optional[list] = None
    parent_float: float = math.nan
    branched: Optional[tuple] = None           # (col, direction, distance) that created this node


@dataclass
class NodeRecord:
    """What the certificate needs to know about one node."""
    id: int
    lower: tuple
    upper: tuple
    branch: Optional[tuple] = None             # (col, k): children x_col <= k and x_col >= k + 1
    children: tuple = ()
    proof: Optional[tuple] = None              # ("dual", y) | ("farkas", y) | ("conflict", col)


@dataclass
class SolveResult:
    status: str                                # optimal | infeasible | time-limit | node-limit | unbounded-relaxation
    incumbent: Optional[Solution]
    primal: ExtQ
    dual: ExtQ
    nodes: int
    times: dict
    trace: list = field(default_factory=list)
    certificate: Optional[str] = None
    bounding_stats: Optional[BoundingStats] = None
    repair: Optional[RepairBudget] = None
    presolve_stats: Optional[dict] = None
    warnings: list = field(default_factory=list)
    repair_events: list = field(default_factory=list)   # (repair calls, exact-LP calls) after each repair
    dual_history: list = field(default_factory=list)    # (global dual, primal) after each node

    @property
    def gap(self):
        return compute_gap(self.primal, self.dual)

    @property
    def objective(self) -> ExtQ:
        return self.incumbent.objective if self.incumbent is not None else INF


def compute_gap(primal: ExtQ, dual: ExtQ):
    """Relative gap ``|p - d| / max(|p|, |d|)`` as an exact rational."""
    if primal == dual:
        return Fraction(0)
    if not (is_finite(primal) and is_finite(dual)):
        return INF
    if (primal > 0 and dual < 0) or (primal < 0 and dual > 0):
        return INF
    return abs(primal - dual) / max(abs(primal), abs(dual))


def _is_integral(v: Fraction) -> bool:
    return v.denominator == 1


class _Search:
    def __init__(self, model: RationalMIP, config: Config, t_start: float):
        self.model = model
        self.fmodel = approximate(model)
        self.config = config
        self.t_start = t_start
        self.stats = BoundingStats(min_rate=Fraction(config.bshift_threshold))
        self.budget = RepairBudget(continuous_fraction=model.continuous_fraction,
                                   ratio=Fraction(config.repair_ratio),
                                   cutoff=Fraction(config.continuous_cutoff))
        self.incumbent: Optional[Solution] = None
        self.primal: ExtQ = INF
        self.integral_objective = bool(model.integers) and model.objective_is_integral()
        self.interior = None
        self.ints = sorted(model.integers)
        rng = np.random.default_rng(config.seed)
        perm = np.arange(model.n) if config.seed == 0 else rng.permutation(model.n)
        self.rank = {int(j): k for k, j in enumerate(perm)}
        self.pc = {d: [[0.0, 0] for _ in range(model.n)] for d in (-1, 1)}
        self.heap: list = []
        self.ids = itertools.count()
        self.records: dict = {}
        self.trace: list = []
        self.nodes = 0
        self.times = {"heuristics": 0.0, "lp": 0.0, "strong": 0.0}
        self.unbounded = False
        self.dual_history: list = []
        self.repair_events: list = []

    # -- helpers --------------------------------------------------------------

    def round_bound(self, b: ExtQ) -> ExtQ:
        if self.integral_objective and is_finite(b):
            off = self.model.offset
            return Fraction(math.ceil(b - off)) + off
        return b

    def float_bounds(self, node):
        return (np.array([nearest_float(v) for v in node.lower]),
                np.array([nearest_float(v) for v in node.upper]))

    def new_incumbent(self, sol: Optional[Solution]):
        if sol is None or sol.objective >= self.primal:
            return False
        self.incumbent = sol
        self.primal = sol.objective
        return True

    def get_interior(self):
        if self.interior is None:
            ip = interior_point(self.model)
            self.interior = ip if ip is not None else _NO_INTERIOR
        return None if self.interior is _NO_INTERIOR else self.interior

    def global_dual(self, extra=()) -> ExtQ:
        bounds = [n.bound for _, _, n in self.heap] + list(extra)
        if not bounds:
            return self.primal
        return min(min(bounds), self.primal)

    # -- bounding -------------------------------------------------------------

    def methods_for(self, node) -> list:
        mode = self.config.bounding
        if mode == "auto":
            return bounding.select_bounding_method(node.depth, self.stats, exlp_every=self.config.exlp_depth)
        if mode == "exlp":
            return ["exlp"]
        return [mode, "exlp"]

    def run_method(self, method, node, fp) -> Optional[DualBoundResult]:
        m = self.model
        if method == "exlp":
            self.budget.exact_lp_calls += 1
            return bounding.exact_lp_bound(m, node.lower, node.upper, warm=fp.basis or node.basis,
                                           fmodel=self.fmodel)
        if fp.status == "infeasible-claimed":
            if method != "bshift":
                return None
            return bounding.bound_shift(m, fp.y, node.lower, node.upper, objective=False)
        if fp.status not in ("optimal", "objective-limit", "iteration-limit") or not np.all(np.isfinite(fp.y)):
            return None
        if method == "bshift":
            return bounding.bound_shift(m, fp.y, node.lower, node.upper)
        return bounding.project_and_shift(m, fp.y, self.get_interior(), node.lower, node.upper)

    def bound_node(self, node, fp, inherited, info):
        """Return ``(result, fp)`` where result is the best successful bound."""
        methods = self.methods_for(node)
        best = None

        if fp.status == "objective-limit":
            for meth in methods:
                if meth == "exlp":
                    continue
                res = self.run_method(meth, node, fp)
                if res is None:
                    continue
                self.stats.record(res, None)
                info["methods"].append((meth, res.success))
                if res.success and (best is None or res.bound > best.bound):
                    best = res
                    if self.round_bound(max(res.bound, inherited)) >= self.primal:
                        return best, fp
            # safe bounding could not confirm the cutoff: solve again without a limit
            info["resolved"] = True
            lo, hi = self.float_bounds(node)
            t0 = time.perf_counter()
            fp = solve_fp_lp(self.fmodel, lo, hi, warm=fp.basis or node.basis)
            self.times["lp"] += time.perf_counter() - t0
            info["float_status"] = fp.status

        for meth in methods:
            res = self.run_method(meth, node, fp)
            if res is None:
                continue
            self.stats.record(res, fp.objective if fp.status == "optimal" else None)
            info["methods"].append((meth, res.success))
            if not res.success:
                continue
            if best is None or meth == "exlp" or res.bound > best.bound:
                best = res
            if meth == "exlp" or best.infeasible:
                break
            incumbent = self.incumbent.objective if self.incumbent is not None else None
            if fp.status == "optimal" and needs_escalation(
                    fp.objective, self.round_bound(max(best.bound, inherited)), incumbent):
                info["escalated"] = True
                continue
            break
        return best, fp

    # -- main loop ------------------------------------------------------------

    def run(self):
        m = self.model
        root = Node(next(self.ids), None, 0, tuple(m.lower), tuple(m.upper), -INF)
        self.records[root.id] = NodeRecord(root.id, root.lower, root.upper)
        nxt = root
        plunge = 0
        status = None
        while True:
            if nxt is None:
                while self.heap:
                    _, _, cand = heapq.heappop(self.heap)
                    if self.incumbent is not None and cand.bound >= self.primal:
                        self.prune_unprocessed(cand)
                        continue
                    nxt = cand
                    break
                plunge = 0
                if nxt is None:
                    break
            if self.config.node_limit is not None and self.nodes >= self.config.node_limit:
                heapq.heappush(self.heap, (nxt.bound, nxt.id, nxt))
                status = "node-limit"
                break
            if time.perf_counter() - self.t_start > self.config.time_limit:
                heapq.heappush(self.heap, (nxt.bound, nxt.id, nxt))
                status = "time-limit"
                break
            children = self.process(nxt)
            if self.unbounded:
                status = "unbounded-relaxation"
                break
            nxt = None
            if children:
                pref, other = children
                if self.config.node_selection == "best-plunge" and plunge < self.config.plunge_limit:
                    plunge += 1
                    nxt = pref
                    heapq.heappush(self.heap, (other.bound, other.id, other))
                else:
                    for c in children:
                        heapq.heappush(self.heap, (c.bound, c.id, c))
            self.dual_history.append((self.global_dual([nxt.bound] if nxt else []), self.primal))
        if status is None:
            status = "optimal" if self.incumbent is not None else "infeasible"
        return status

    def prune_unprocessed(self, node):
        rec = self.records[node.id]
        rec.proof = ("dual", node.parent_y)
        if self.config.record_trace:
            self.trace.append({"id": node.id, "parent": node.parent, "depth": node.depth,
                               "processed": False, "pruned": "bound", "bound": node.bound,
                               "incumbent": self.primal, "lower": node.lower, "upper": node.upper,
                               "methods": [], "float_status": None, "resolved": False})

    def process(self, node):
        m = self.model
        self.nodes += 1
        rec = self.records[node.id]
        info = {"id": node.id, "parent": node.parent, "depth": node.depth, "processed": True,
                "resolved": False, "escalated": False, "methods": [], "pruned": None}
        if self.config.record_trace:
            info["lower"], info["upper"] = node.lower, node.upper
        self.trace.append(info)

        for j in range(m.n):
            if node.lower[j] > node.upper[j]:
                rec.proof = ("conflict", j)
                info.update(pruned="infeasible", bound=INF, float_status=None)
                return None

        inherited = -INF
        if node.parent_y is not None:
            inherited = dual_value(m, node.parent_y, node.lower, node.upper)

        lo, hi = self.float_bounds(node)
        limit = inflate_objective_limit(self.primal, self.stats) if self.incumbent is not None else None
        t0 = time.perf_counter()
        fp = solve_fp_lp(self.fmodel, lo, hi, warm=node.basis, obj_limit=limit)
        self.times["lp"] += time.perf_counter() - t0
        info["float_status"] = fp.status
        if self.config.record_trace:
            info["y_bar"] = [float(v) for v in fp.y]

        res, fp = self.bound_node(node, fp, inherited, info)
        exact_x = None
        if res is not None and res.method == "exlp" and res.lp is not None:
            if res.lp.status == "unbounded":
                self.unbounded = True
                info["pruned"] = None
                return None
            if res.lp.status == "optimal":
                exact_x = res.lp.x

        if res is not None and res.infeasible:
            rec.proof = ("conflict", res.conflict) if res.conflict is not None else ("farkas", res.y)
            info.update(pruned="infeasible", bound=INF, method=res.method)
            return None

        own = res.bound if res is not None else -INF
        if own >= inherited and res is not None:
            proof_y, bound = res.y, own
            info["method"] = res.method
        else:
            proof_y, bound = node.parent_y, inherited
            info["method"] = "inherited"
        bound = self.round_bound(bound)
        rec.proof = ("dual", proof_y)
        info["bound"] = bound
        node_bound = max(bound, node.bound)

        if self.can_prune(node_bound):
            info.update(pruned="bound", incumbent=self.primal)
            return None

        fp_ok = fp.status == "optimal"
        if fp_ok and fp.objective is not None and node.branched is not None:
            self.update_pseudocost(node, fp.objective)

        # decide the point to branch on
        if exact_x is None and not fp_ok:
            res, exact_x = self.escalate(node, info)
            if res is None:
                return None
            proof_y, node_bound = res.y, max(self.round_bound(res.bound), node.bound)
            rec.proof = ("dual", proof_y)
            info["bound"] = node_bound

        fractional = self.fractional(exact_x, fp.x if fp_ok else None)
        if not fractional:
            if exact_x is not None:
                sol = Solution.of(m, exact_x, "lp-integral")
                if check_solution(m, sol.x, self.fmodel):
                    self.new_incumbent(sol)
            else:
                self.try_candidate(fp.x)
            if self.can_prune(node_bound):
                info.update(pruned="bound", incumbent=self.primal)
                return None
            if exact_x is None:
                res, exact_x = self.escalate(node, info)
                if res is None:
                    return None
                proof_y, node_bound = res.y, max(self.round_bound(res.bound), node.bound)
                rec.proof = ("dual", proof_y)
                info["bound"] = node_bound
                fractional = self.fractional(exact_x, None)
                if not fractional:
                    sol = Solution.of(m, exact_x, "lp-integral")
                    if check_solution(m, sol.x, self.fmodel):
                        self.new_incumbent(sol)
                if self.can_prune(node_bound):
                    info.update(pruned="bound", incumbent=self.primal)
                    return None
            if not fractional:
                raise AssertionError("integral exact LP optimum did not close its node")

        # heuristics on schedule
        if (self.config.heuristics and fp_ok and m.integers
                and (node.depth <= self.config.heuristic_depth or self.nodes % self.config.heuristic_frequency == 0)):
            t0 = time.perf_counter()
            cand = fp_round_and_dive(self.fmodel, m.integers, fp.x, lo, hi)
            if cand is not None:
                self.try_candidate(cand)
            self.times["heuristics"] += time.perf_counter() - t0
            if self.can_prune(node_bound):
                info.update(pruned="bound", incumbent=self.primal)
                return None

        values = {j: (exact_x[j] if exact_x is not None else fp.x[j]) for j in fractional}
        j = self.choose(node, fractional, values, fp, lo, hi)
        v = values[j]
        k = Fraction(math.floor(v))
        rec.branch = (j, k)
        frac = float(v) - float(k)
        left = self.child(node, j, "upper", k, node_bound, proof_y, fp, (j, -1, frac))
        right = self.child(node, j, "lower", k + 1, node_bound, proof_y, fp, (j, 1, 1 - frac))
        rec.children = (left.id, right.id)
        info["branch"] = (j, k)
        return (left, right) if frac < 0.5 else (right, left)

    def can_prune(self, bound) -> bool:
        return self.incumbent is not None and bound >= self.primal

    def escalate(self, node, info):
        res = bounding.exact_lp_bound(self.model, node.lower, node.upper, warm=node.basis, fmodel=self.fmodel)
        self.budget.exact_lp_calls += 1
        self.stats.record(res)
        info["methods"].append(("exlp", res.success))
        info["escalated"] = True
        if res.lp.status == "unbounded":
            self.unbounded = True
            return None, None
        rec = self.records[node.id]
        if res.infeasible:
            rec.proof = ("conflict", res.conflict) if res.conflict is not None else ("farkas", res.y)
            info.update(pruned="infeasible", bound=INF)
            return None, None
        return res, res.lp.x

    def fractional(self, exact_x, float_x) -> list:
        if exact_x is not None:
            return [j for j in self.ints if not _is_integral(exact_x[j])]
        return [j for j in self.ints if abs(float_x[j] - math.floor(float_x[j] + 0.5)) > INT_TOL]

    def try_candidate(self, cand):
        if self.budget.permits():
            sol = repair(self.model, cand, self.budget)
            self.repair_events.append((self.budget.repair_calls, self.budget.exact_lp_calls))
        else:
            x = [Fraction(math.floor(v + 0.5)) if j in self.model.integers else Fraction(float(v))
                 for j, v in enumerate(cand)]
            sol = Solution.of(self.model, x, "heuristic-check") if check_solution(self.model, x, self.fmodel) else None
        if sol is not None:
            self.new_incumbent(sol)

    def child(self, node, j, side, value, bound, proof_y, fp, branched):
        lower, upper = list(node.lower), list(node.upper)
        if side == "upper":
            upper[j] = min(upper[j], value)
        else:
            lower[j] = max(lower[j], value)
        c = Node(next(self.ids), node.id, node.depth + 1, tuple(lower), tuple(upper), bound,
                 basis=fp.basis or node.basis, parent_y=proof_y,
                 parent_float=fp.objective if fp.status == "optimal" else math.nan, branched=branched)
        self.records[c.id] = NodeRecord(c.id, c.lower, c.upper)
        return c

    # -- branching --------------------------------------------------------------

    def update_pseudocost(self, node, obj):
        j, d, dist = node.branched
        if math.isnan(node.parent_float) or dist <= 0:
            return
        gain = max(obj - node.parent_float, 0.0) / dist
        self.pc[d][j][0] += gain
        self.pc[d][j][1] += 1

    def pc_estimate(self, j, d):
        s, c = self.pc[d][j]
        if c:
            return s / c
        means = [s / c for s, c in self.pc[d] if c]
        return sum(means) / len(means) if means else 1.0

    def choose(self, node, fractional, values, fp, lo, hi) -> int:
        best, best_key = None, None
        for j in sorted(fractional, key=lambda c: self.rank[c]):
            v = float(values[j])
            f_down = v - math.floor(v)
            f_up = 1 - f_down
            if min(self.pc[-1][j][1], self.pc[1][j][1]) < self.config.reliability and fp.status == "optimal":
                g_down, g_up = self.strong_branch(j, v, fp, lo, hi, f_down, f_up)
            else:
                g_down = self.pc_estimate(j, -1) * f_down
                g_up = self.pc_estimate(j, 1) * f_up
            score = max(g_down, 1e-6) * max(g_up, 1e-6)
            key = (score, -self.rank[j])
            if best_key is None or key > best_key:
                best, best_key = j, key
        return best

    def strong_branch(self, j, v, fp, lo, hi, f_down, f_up):
        t0 = time.perf_counter()
        gains = []
        for d, dist in ((-1, f_down), (1, f_up)):
            l2, h2 = lo.copy(), hi.copy()
            if d < 0:
                h2[j] = math.floor(v)
            else:
                l2[j] = math.floor(v) + 1
            r = solve_fp_lp(self.fmodel, l2, h2, warm=fp.basis, iteration_limit=STRONG_ITERATION_LIMIT)
            if r.status == "optimal":
                g = max(r.objective - fp.objective, 0.0)
                if dist > 0:
                    self.pc[d][j][0] += g / dist
                    self.pc[d][j][1] += 1
                gains.append(g)
            elif r.status == "infeasible-claimed":
                gains.append(1e6 * (1 + abs(fp.objective)))
            else:
                gains.append(self.pc_estimate(j, d) * dist)
        self.times["strong"] += time.perf_counter() - t0
        return gains[0], gains[1]


def solve(model: RationalMIP, config: Optional[Config] = None) -> SolveResult:
    """Solve ``model`` to exact optimality (or until a limit is reached)."""
    config = config or Config()
    t_start = time.perf_counter()
    warnings = []
    use_presolve = config.presolve
    if config.certificate and use_presolve:
        warnings.append("certificates need the original model: presolve disabled")
        use_presolve = False
    times = {}
    stack = None
    pstats = None
    work = model
    if use_presolve:
        t0 = time.perf_counter()
        pres = presolve(model)
        times["presolve"] = time.perf_counter() - t0
        pstats = pres.stats
        if pres.status == "infeasible":
            times["total"] = time.perf_counter() - t_start
            return SolveResult("infeasible", None, INF, INF, 0, times, bounding_stats=BoundingStats(),
                               repair=RepairBudget(), presolve_stats=pstats,
                               warnings=warnings + [pres.witness])
        work, stack = pres.model, pres.stack

    search = _Search(work, config, t_start)
    status = search.run()
    times.update(search.times)
    times["dbtime"] = dict(search.stats.times)
    times["total"] = time.perf_counter() - t_start

    incumbent = search.incumbent
    if incumbent is not None and stack is not None:
        x = postsolve(stack, incumbent.x)
        incumbent = Solution.of(model, x, incumbent.origin)
    if incumbent is not None and check_solution_exact(model, incumbent.x) is not None:
        raise AssertionError("incumbent failed the exact feasibility check")
    primal = incumbent.objective if incumbent is not None else INF
    if status == "optimal":
        dual = primal
    elif status == "infeasible":
        dual = INF
    elif status == "unbounded-relaxation":
        dual = -INF
    else:
        dual = search.global_dual()

    result = SolveResult(status, incumbent, primal, dual, search.nodes, times, search.trace,
                         bounding_stats=search.stats, repair=search.budget, presolve_stats=pstats,
                         warnings=warnings, repair_events=search.repair_events,
                         dual_history=search.dual_history)
    if config.certificate and status in ("optimal", "infeasible"):
        from .certificate import emit_certificate
        t0 = time.perf_counter()
        result.certificate = emit_certificate(model, search.records, 0, incumbent)
        times["certificate"] = time.perf_counter() - t0
    return result


# ---------------------------------------------------------------------------
# brute-force oracle

MAX_ORACLE_INTEGERS = 20
MAX_ORACLE_BOX = 10 ** 6


def solve_oracle(model: RationalMIP) -> SolveResult:
    """Enumerate every integer assignment and solve the continuous rest
    exactly.  Only for small models with finite integer bounds."""
    t0 = time.perf_counter()
    ints = sorted(model.integers)
    if len(ints) > MAX_ORACLE_INTEGERS:
        raise ValueError("oracle refuses models with more than 20 integer columns")
    ranges = []
    volume = 1
    for j in ints:
        lo, up = model.lower[j], model.upper[j]
        if not (is_finite(lo) and is_finite(up)):
            raise ValueError("oracle needs finite integer bounds")
        a, b = math.ceil(lo), math.floor(up)
        if a > b:
            return SolveResult("infeasible", None, INF, INF, 0, {"total": time.perf_counter() - t0})
        ranges.append(range(a, b + 1))
        volume *= b - a + 1
    if volume > MAX_ORACLE_BOX:
        raise ValueError("oracle box volume exceeds 10^6")
    cont = [j for j in range(model.n) if j not in model.integers]
    if any(model.lower[j] > model.upper[j] for j in cont):
        return SolveResult("infeasible", None, INF, INF, 0, {"total": time.perf_counter() - t0})

    # integer-scaled rows for fast exact screening
    scaled = []
    for i, row in enumerate(model.rows):
        den = 1
        for _, a in row:
            den = den * a.denominator // math.gcd(den, a.denominator)
        b = model.rhs[i] * den
        int_part = [(ints.index(j), int(a * den)) for j, a in row if j in model.integers]
        cont_part = [(j, a * den) for j, a in row if j not in model.integers]
        cmin = cmax = Fraction(0)
        for j, a in cont_part:
            p1, p2 = ext_prod(a, model.lower[j]), ext_prod(a, model.upper[j])
            cmin, cmax = ext_add(cmin, min(p1, p2)), ext_add(cmax, max(p1, p2))
        scaled.append((model.senses[i], b, int_part, cmin, cmax))
    cobj_min = Fraction(0)
    cobj_finite = True
    for j in cont:
        c = model.obj[j]
        if c > 0:
            if is_finite(model.lower[j]):
                cobj_min += c * model.lower[j]
            else:
                cobj_finite = False
        elif c < 0:
            if is_finite(model.upper[j]):
                cobj_min += c * model.upper[j]
            else:
                cobj_finite = False

    candidates = []
    for values in itertools.product(*ranges):
        ok = True
        for s, b, int_part, cmin, cmax in scaled:
            act = sum(a * values[k] for k, a in int_part)
            if (s in ("G", "E") and act + cmax < b) or (s in ("L", "E") and act + cmin > b):
                ok = False
                break
        if ok:
            iobj = sum((model.obj[j] * values[k] for k, j in enumerate(ints)), Fraction(0))
            candidates.append((iobj, values))
    candidates.sort(key=lambda t: t[0])

    best, best_x = INF, None
    lps = 0
    for iobj, values in candidates:
        if cobj_finite and best != INF and iobj + cobj_min + model.offset >= best:
            break
        fixed = {j: Fraction(v) for j, v in zip(ints, values)}
        if not cont:
            x = [fixed[j] for j in range(model.n)]
            if check_solution_exact(model, x) is None:
                val = model.objective(x)
                if val < best:
                    best, best_x = val, x
            continue
        sub, free = restrict_to_continuous(model, fixed)
        if sub is None:
            continue
        lps += 1
        lp = solve_exact_lp(sub)
        if lp.status == "unbounded":
            raise ValueError("oracle met an unbounded continuous restriction")
        if lp.status == "optimal" and lp.objective < best:
            x = [Fraction(0)] * model.n
            for j, v in fixed.items():
                x[j] = v
            for k, j in enumerate(free):
                x[j] = lp.x[k]
            best, best_x = lp.objective, x
    times = {"total": time.perf_counter() - t0, "lps": lps}
    if best_x is None:
        return SolveResult("infeasible", None, INF, INF, 0, times)
    sol = Solution.of(model, best_x, "oracle")
    return SolveResult("optimal", sol, sol.objective, sol.objective, 0, times)


def ext_prod(a: Fraction, v: ExtQ) -> ExtQ:
    if is_finite(v):
        return a * v
    return v if a > 0 else -v

