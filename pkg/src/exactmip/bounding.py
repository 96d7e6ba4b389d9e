"""Safe dual bounds from untrusted float LP duals.

Three methods turn a float dual vector into a bound that holds in exact
arithmetic:

* bound-shift clips the signs of the float duals, checks with interval
  arithmetic that no reduced cost can pair with an infinite bound, and then
  evaluates the Lagrangian bound of those multipliers exactly;
* project-and-shift first fixes free-column equalities exactly and then moves
  the point toward a dual interior point until every dual inequality holds;
* the exact LP solve, which always succeeds.

Every bound is a Lagrangian value ``offset + b.y + sum_j min(r_j l_j, r_j u_j)``
so the multipliers ``y`` alone reproduce it in the certificate.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exact_lp import (InteriorPoint, dual_constraints, dual_value, reduced_costs,
                       sign_feasible, solve_exact_lp)
from .model import FloatMIP, RationalMIP
from .numerics import INF, FloatInterval, is_finite, nearest_float
from .simplex import Basis

METHODS = ("bshift", "pshift", "exlp")
EXLP_EVERY = 5
BSHIFT_MIN_CALLS = 20
BSHIFT_MIN_RATE = Fraction(1, 5)
NEAR_CUTOFF_REL = 1e-6
GAP_WINDOW = 32


@dataclass
class DualBoundResult:
    bound: object                    # Fraction, or -inf on failure, +inf for a proven empty node
    method: str
    success: bool
    y: Optional[list] = None
    reduced_costs: Optional[list] = None
    farkas: bool = False             # y proves infeasibility (objective ignored)
    conflict: Optional[int] = None   # column with lower > upper
    time: float = 0.0
    message: str = ""
    lp: object = None                # the ExactLpResult behind an exlp bound

    @property
    def infeasible(self) -> bool:
        return self.success and self.bound == INF


@dataclass
class BoundingStats:
    calls: dict = field(default_factory=lambda: dict.fromkeys(METHODS, 0))
    successes: dict = field(default_factory=lambda: dict.fromkeys(METHODS, 0))
    times: dict = field(default_factory=lambda: dict.fromkeys(METHODS, 0.0))
    gaps: deque = field(default_factory=lambda: deque(maxlen=GAP_WINDOW))
    bshift_disabled: bool = False
    min_rate: Fraction = BSHIFT_MIN_RATE
    min_calls: int = BSHIFT_MIN_CALLS

    def record(self, res: DualBoundResult, float_objective: Optional[float] = None):
        self.calls[res.method] += 1
        self.times[res.method] += res.time
        if res.success:
            self.successes[res.method] += 1
            if float_objective is not None and math.isfinite(float_objective) and is_finite(res.bound):
                self.gaps.append(abs(float_objective - nearest_float(res.bound)))
        if res.method == "bshift":
            c = self.calls["bshift"]
            if c >= self.min_calls and Fraction(self.successes["bshift"], c) < self.min_rate:
                self.bshift_disabled = True

    def success_rate(self, method: str) -> Optional[Fraction]:
        c = self.calls[method]
        return Fraction(self.successes[method], c) if c else None


def _failure(method, t0, message):
    return DualBoundResult(-INF, method, False, time=time.perf_counter() - t0, message=message)


def _clip_signs(model: RationalMIP, y_bar) -> list:
    out = []
    for s, v in zip(model.senses, y_bar):
        v = float(v)
        if not math.isfinite(v):
            v = 0.0
        if (s == "G" and v < 0) or (s == "L" and v > 0):
            v = 0.0
        out.append(v)
    return out


def _interval_reduced_costs(model: RationalMIP, y_hat, objective: bool):
    cols = model.columns()
    r = []
    for j in range(model.n):
        acc = FloatInterval.of_rational(model.obj[j]) if objective else FloatInterval.point(0.0)
        for i, a in cols[j]:
            if y_hat[i] != 0.0:
                acc = acc - FloatInterval.of_rational(a) * FloatInterval.point(y_hat[i])
        r.append(acc)
    return r


def _finish(model, y, lower, upper, objective, method, t0):
    bound = dual_value(model, y, lower, upper, objective=objective)
    if bound == -INF:
        return _failure(method, t0, "multipliers pair a reduced cost with an infinite bound")
    if not objective:
        if not bound > 0:
            return _failure(method, t0, "multipliers do not prove infeasibility")
        bound = INF
    r = reduced_costs(model, y, None if objective else [Fraction(0)] * model.n)
    return DualBoundResult(bound, method, True, y=list(y), reduced_costs=r, farkas=not objective,
                           time=time.perf_counter() - t0)


def bound_shift(model: RationalMIP, y_bar: Sequence[float], lower=None, upper=None,
                objective: bool = True) -> DualBoundResult:
    """Bound-shift bound from float duals ``y_bar``.

    The interval reduced costs decide applicability: a column whose interval
    can be positive needs a finite lower bound, one whose interval can be
    negative needs a finite upper bound.  With ``objective=False`` the duals
    are read as a float Farkas ray and success means the node is empty.
    """
    t0 = time.perf_counter()
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    y_hat = _clip_signs(model, y_bar)
    for j, r in enumerate(_interval_reduced_costs(model, y_hat, objective)):
        if (r.hi > 0 and not is_finite(lower[j])) or (r.lo < 0 and not is_finite(upper[j])):
            return _failure("bshift", t0, f"column {j}: reduced cost meets an infinite bound")
    return _finish(model, [Fraction(v) for v in y_hat], lower, upper, objective, "bshift", t0)


def _solve_rational_system(rows: list, rhs: list) -> Optional[list]:
    """Some solution of ``rows @ x = rhs`` (free unknowns set to zero), or None."""
    if not rows:
        return []
    k = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        p = aug[r][c]
        aug[r] = [v / p for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == len(aug):
            break
    for i in range(r, len(aug)):
        if aug[i][k] != 0:
            return None
    x = [Fraction(0)] * k
    for i, c in enumerate(pivots):
        x[c] = aug[i][k]
    return x


def _eval(g, y):
    coef, const = g
    return const + sum((a * y[i] for i, a in coef.items()), Fraction(0))


def project_and_shift(model: RationalMIP, y_bar: Sequence[float], interior: Optional[InteriorPoint],
                      lower=None, upper=None) -> DualBoundResult:
    """Project-and-shift bound: correct ``y_bar`` exactly on the free-column
    equalities, then take the smallest step toward the interior point that
    satisfies every dual inequality."""
    t0 = time.perf_counter()
    if interior is None:
        return _failure("pshift", t0, "no dual interior point")
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    y = [Fraction(float(v)) if math.isfinite(float(v)) else Fraction(0) for v in y_bar]
    ineq, eq = dual_constraints(model, lower, upper)
    if eq:
        rows = [[g[0].get(i, Fraction(0)) for i in range(model.m)] for g in eq]
        resid = [-_eval(g, y) for g in eq]
        if any(resid):
            delta = _solve_rational_system(rows, resid)
            if delta is None:
                return _failure("pshift", t0, "free-column equalities are inconsistent")
            y = [a + b for a, b in zip(y, delta)]
    y0 = interior.y
    lam = Fraction(0)
    for g in ineq:
        v = _eval(g, y)
        if v < 0:
            slack = _eval(g, y0)
            lam = max(lam, -v / (slack - v))
    y_tilde = [lam * a + (1 - lam) * b for a, b in zip(y0, y)]
    res = _finish(model, y_tilde, lower, upper, True, "pshift", t0)
    res.message = f"lambda={lam}"
    return res


def exact_lp_bound(model: RationalMIP, lower=None, upper=None, warm: Optional[Basis] = None,
                   fmodel: Optional[FloatMIP] = None) -> DualBoundResult:
    t0 = time.perf_counter()
    lp = solve_exact_lp(model, lower, upper, warm=warm, fmodel=fmodel)
    dt = time.perf_counter() - t0
    if lp.status == "optimal":
        r = reduced_costs(model, lp.y)
        return DualBoundResult(lp.objective, "exlp", True, y=lp.y, reduced_costs=r, time=dt, lp=lp)
    if lp.status == "infeasible":
        zero = [Fraction(0)] * model.n
        r = reduced_costs(model, lp.farkas, zero)
        return DualBoundResult(INF, "exlp", True, y=lp.farkas, reduced_costs=r, farkas=True,
                               conflict=lp.conflict, time=dt, lp=lp)
    # unbounded relaxation: the valid bound is -inf, which never prunes
    return DualBoundResult(-INF, "exlp", True, time=dt, lp=lp, message="relaxation unbounded")


def has_free_column(model: RationalMIP, lower=None, upper=None) -> bool:
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    return any(not is_finite(lower[j]) and not is_finite(upper[j]) for j in range(model.n))


def select_bounding_method(depth: int, stats: BoundingStats, free_column: bool = False,
                           exlp_every: int = EXLP_EVERY) -> list:
    """Ordered list of methods to try at a node; ``exlp`` is always last so a
    bound is always produced."""
    if exlp_every > 0 and depth % exlp_every == 0:
        return ["exlp"]
    methods = []
    if not stats.bshift_disabled and not free_column:
        methods.append("bshift")
    methods += ["pshift", "exlp"]
    return methods


def near_cutoff(float_objective: float, incumbent: Optional[Fraction]) -> bool:
    """Float LP value within tolerance of (or above) the incumbent."""
    if incumbent is None or not math.isfinite(float_objective):
        return False
    inc = nearest_float(incumbent)
    return float_objective >= inc - NEAR_CUTOFF_REL * (1 + abs(inc))


def needs_escalation(float_objective: float, safe_bound, incumbent: Optional[Fraction]) -> bool:
    """The float LP says the node is cut off but the safe bound does not."""
    return near_cutoff(float_objective, incumbent) and not safe_bound >= incumbent


def inflate_objective_limit(incumbent: Fraction, stats: BoundingStats) -> float:
    inc = nearest_float(incumbent)
    floor = 1e-9 * (1 + abs(inc))
    mean_gap = sum(stats.gaps) / len(stats.gaps) if stats.gaps else 0.0
    margin = max(floor, 2 * mean_gap)
    limit = inc + margin
    if Fraction(limit) != Fraction(inc) + Fraction(margin):
        limit = math.nextafter(limit, INF)
    return limit


def verify_multipliers(model: RationalMIP, res: DualBoundResult, lower=None, upper=None) -> bool:
    """Recompute a successful bound from its stored multipliers."""
    if not res.success or res.y is None:
        return False
    if res.conflict is not None:
        return True
    if not sign_feasible(model, res.y):
        return False
    val = dual_value(model, res.y, lower, upper, objective=not res.farkas)
    if res.farkas:
        return val > 0
    return val == res.bound
