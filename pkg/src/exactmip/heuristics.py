"""Primal heuristics: float rounding and diving, the exact repair step, and a
solution check that uses running error bounds before falling back to exact
arithmetic."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exact_lp import solve_exact_lp
from .fp_lp import solve_fp_lp
from .model import FloatMIP, RationalMIP, Solution, approximate, check_solution_exact
from .numerics import FloatInterval, float_up, is_finite, nearest_float, running_error_dot

FEAS_TOL = 1e-6
MAX_DIVES = 10
FRACTIONALITY_LIMIT = 1e-4
MAX_CONTINUOUS_FRACTION = Fraction(4, 5)


# ---------------------------------------------------------------------------
# float heuristics

def float_feasible(fmodel: FloatMIP, x: np.ndarray, lower=None, upper=None, tol: float = FEAS_TOL) -> bool:
    lo = fmodel.lower if lower is None else np.asarray(lower, dtype=float)
    hi = fmodel.upper if upper is None else np.asarray(upper, dtype=float)
    if np.any(x < lo - tol) or np.any(x > hi + tol):
        return False
    act = fmodel.A @ x if fmodel.m else np.zeros(0)
    for a, s, b in zip(act, fmodel.senses, fmodel.rhs):
        scale = tol * (1 + abs(b))
        if (s in ("G", "E") and a < b - scale) or (s in ("L", "E") and a > b + scale):
            return False
    return True


def _round(x: np.ndarray, integers) -> np.ndarray:
    out = np.array(x, dtype=float)
    for j in integers:
        out[j] = float(np.floor(out[j] + 0.5))
    return out


def fp_round_and_dive(fmodel: FloatMIP, integers, x_lp: np.ndarray, lower=None, upper=None,
                      max_dives: int = MAX_DIVES) -> Optional[np.ndarray]:
    """Round the LP point; if that is not float-feasible, dive by fixing the
    least fractional integer column to its nearest value and re-solving."""
    lo = np.array(fmodel.lower if lower is None else lower, dtype=float)
    hi = np.array(fmodel.upper if upper is None else upper, dtype=float)
    integers = sorted(integers)
    x = np.asarray(x_lp, dtype=float)
    for _ in range(max_dives + 1):
        cand = _round(x, integers)
        if float_feasible(fmodel, cand, lo, hi):
            return cand
        frac = [(abs(x[j] - np.floor(x[j] + 0.5)), j) for j in integers
                if abs(x[j] - np.floor(x[j] + 0.5)) > FEAS_TOL and lo[j] < hi[j]]
        if not frac:
            return None
        _, j = min(frac)
        v = float(np.floor(x[j] + 0.5))
        lo[j] = hi[j] = min(max(v, lo[j]), hi[j])
        res = solve_fp_lp(fmodel, lo, hi)
        if res.status != "optimal":
            return None
        x = res.x
    return None


# ---------------------------------------------------------------------------
# exact repair

def restrict_to_continuous(model: RationalMIP, fixed: dict) -> tuple:
    """LP over the unfixed columns with ``fixed`` values moved to the rhs.

    Returns ``(sub_model, free_columns)``; rows left without free columns are
    checked exactly and reported by returning ``(None, free_columns)`` when one
    is violated.
    """
    free = [j for j in range(model.n) if j not in fixed]
    index = {j: k for k, j in enumerate(free)}
    rows, senses, rhs, names = [], [], [], []
    for i, row in enumerate(model.rows):
        b = model.rhs[i]
        new = []
        for j, a in row:
            if j in fixed:
                b -= a * fixed[j]
            else:
                new.append((index[j], a))
        s = model.senses[i]
        if not new:
            if (s == "G" and b > 0) or (s == "L" and b < 0) or (s == "E" and b != 0):
                return None, free
            continue
        rows.append(tuple(new))
        senses.append(s)
        rhs.append(b)
        names.append(model.row_names[i])
    offset = model.offset + sum((model.obj[j] * v for j, v in fixed.items()), Fraction(0))
    sub = RationalMIP(name=model.name + "-restricted", rows=tuple(rows), senses=tuple(senses),
                      rhs=tuple(rhs), obj=tuple(model.obj[j] for j in free),
                      lower=tuple(model.lower[j] for j in free), upper=tuple(model.upper[j] for j in free),
                      integers=frozenset(), col_names=tuple(model.col_names[j] for j in free),
                      row_names=tuple(names), offset=offset)
    return sub, free


@dataclass
class RepairBudget:
    repair_calls: int = 0
    successes: int = 0
    exact_lp_calls: int = 0
    continuous_fraction: Fraction = Fraction(0)
    time_success: float = 0.0
    time_fail: float = 0.0
    rejected_fractional: int = 0
    ratio: Fraction = Fraction(1, 2)
    cutoff: Fraction = MAX_CONTINUOUS_FRACTION

    def permits(self) -> bool:
        return (self.repair_calls <= self.ratio * self.exact_lp_calls
                and self.continuous_fraction <= self.cutoff)

    @property
    def success_rate(self) -> Optional[float]:
        return self.successes / self.repair_calls if self.repair_calls else None


def round_integers(model: RationalMIP, candidate: Sequence[float]) -> Optional[dict]:
    """Nearest integers for the integer columns, or None if some value is
    more than the fractionality limit away from an integer or out of bounds."""
    fixed = {}
    for j in sorted(model.integers):
        v = float(candidate[j])
        if not math.isfinite(v):
            return None
        r = math.floor(v + 0.5)
        if abs(v - r) > FRACTIONALITY_LIMIT:
            return None
        q = Fraction(r)
        if q < model.lower[j] or q > model.upper[j]:
            return None
        fixed[j] = q
    return fixed


def repair(model: RationalMIP, candidate: Sequence[float], budget: Optional[RepairBudget] = None) -> Optional[Solution]:
    """Fix the integer columns of a float candidate and solve the continuous
    rest exactly; returns an exactly feasible solution or None."""
    fixed = round_integers(model, candidate)
    if fixed is None:
        if budget is not None:
            budget.rejected_fractional += 1
        return None
    t0 = time.perf_counter()
    if budget is not None:
        budget.repair_calls += 1
    sol = None
    sub, free = restrict_to_continuous(model, fixed)
    if sub is not None:
        if not free:
            sol = Solution.of(model, [fixed[j] for j in range(model.n)], "heuristic-repair")
        else:
            lp = solve_exact_lp(sub)
            if lp.status == "optimal":
                x = [Fraction(0)] * model.n
                for j, v in fixed.items():
                    x[j] = v
                for k, j in enumerate(free):
                    x[j] = lp.x[k]
                sol = Solution.of(model, x, "heuristic-repair")
    if sol is not None and check_solution_exact(model, sol.x) is not None:
        raise AssertionError("repair produced an infeasible solution")
    if budget is not None:
        dt = time.perf_counter() - t0
        if sol is not None:
            budget.successes += 1
            budget.time_success += dt
        else:
            budget.time_fail += dt
    return sol


# ---------------------------------------------------------------------------
# hybrid solution check

@dataclass
class CheckResult:
    accepted: bool
    float_rows: int = 0
    exact_rows: int = 0
    reason: str = ""

    def __bool__(self):
        return self.accepted


def check_solution(model: RationalMIP, x_star: Sequence[Fraction], fmodel: Optional[FloatMIP] = None) -> CheckResult:
    """Decide exact feasibility of ``x_star``.

    Bounds and integrality are compared exactly.  Each row activity is first
    computed in floating point with a running error bound ``mu``; the exact
    activity is only formed when ``[s - mu, s + mu]`` straddles the rhs.
    """
    x_star = [Fraction(v) for v in x_star]
    if len(x_star) != model.n:
        raise ValueError("solution length differs from column count")
    for j, v in enumerate(x_star):
        if v < model.lower[j] or v > model.upper[j]:
            return CheckResult(False, reason=f"bound {j}")
    for j in model.integers:
        if x_star[j].denominator != 1:
            return CheckResult(False, reason=f"integrality {j}")
    fmodel = fmodel if fmodel is not None else approximate(model)
    x_bar = [nearest_float(v) for v in x_star]
    if any(math.isinf(v) for v in x_bar):
        return _exact_rows(model, x_star, CheckResult(True))
    delta_x = [float_up(abs(Fraction(xb) - v)) for xb, v in zip(x_bar, x_star)]
    res = CheckResult(True)
    for i, row in enumerate(model.rows):
        cols = [j for j, _ in row]
        a_bar = [fmodel.A[i, j] for j in cols]
        da = [fmodel.delta_A[i, j] for j in cols]
        if any(math.isinf(v) for v in a_bar) or any(math.isinf(v) for v in da):
            verdict = None
        else:
            s, mu = running_error_dot(a_bar, [x_bar[j] for j in cols], da, [delta_x[j] for j in cols])
            verdict = _float_verdict(s, mu, model.senses[i], model.rhs[i])
        if verdict is None:
            res.exact_rows += 1
            act = sum((a * x_star[j] for j, a in row), Fraction(0))
            s_, b = model.senses[i], model.rhs[i]
            verdict = not ((s_ == "G" and act < b) or (s_ == "L" and act > b) or (s_ == "E" and act != b))
        else:
            res.float_rows += 1
        if not verdict:
            res.accepted = False
            res.reason = f"row {i}"
            return res
    return res


def _exact_rows(model, x_star, res):
    for i in range(model.m):
        res.exact_rows += 1
        act = model.activity(i, x_star)
        s, b = model.senses[i], model.rhs[i]
        if (s == "G" and act < b) or (s == "L" and act > b) or (s == "E" and act != b):
            res.accepted = False
            res.reason = f"row {i}"
            return res
    return res


def _float_verdict(s: float, mu: float, sense: str, b: Fraction) -> Optional[bool]:
    """True/False when ``[s - mu, s + mu]`` settles the row, None otherwise."""
    if not (math.isfinite(s) and math.isfinite(mu)):
        return None
    act = FloatInterval.point(s) + FloatInterval(-mu, mu)
    bi = FloatInterval.of_rational(b)
    if sense == "G":
        if act.lo >= bi.hi:
            return True
        if act.hi < bi.lo:
            return False
    elif sense == "L":
        if act.hi <= bi.lo:
            return True
        if act.lo > bi.hi:
            return False
    else:
        if act.hi < bi.lo or act.lo > bi.hi:
            return False
        if act.lo == act.hi == bi.lo == bi.hi:
            return True
    return None
