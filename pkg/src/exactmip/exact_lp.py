"""Exact rational LP solves by iterative refinement with a rational simplex
finish, and the dual interior point used by project-and-shift.

A float solve proposes a basis; the basis is verified in rational arithmetic.
If it is not optimal, scaled correction LPs are solved in floating point and
their exact corrections accumulated (each correction LP also proposes a
basis).  Once the violations stop halving, rational simplex pivots finish
from the last basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .fp_lp import slack_bounds, solve_fp_lp, standard_form
from .model import FloatMIP, RationalMIP, approximate, build_model
from .numerics import INF, ExtQ, ext_add, ext_mul, is_finite, nearest_float
from .simplex import AT_LOWER, AT_UPPER, AT_ZERO, BASIC, Basis, BoundedSimplex, SingularBasis

SCALE_CAP = Fraction(2) ** 1024
MAX_ROUNDS = 8


@dataclass
class ExactLpResult:
    status: str                             # optimal | infeasible | unbounded
    x: Optional[list] = None
    y: Optional[list] = None
    objective: Optional[Fraction] = None    # c.x + offset
    basis: Optional[Basis] = None
    farkas: Optional[list] = None           # row multipliers proving infeasibility
    conflict: Optional[int] = None          # column with lower > upper
    ray: Optional[list] = None
    rounds: int = 0
    rational_pivots: int = 0
    stats: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Lagrangian dual values

def reduced_costs(model: RationalMIP, y: Sequence[Fraction], obj=None) -> list:
    c = model.obj if obj is None else obj
    r = list(c)
    for i, row in enumerate(model.rows):
        yi = y[i]
        if yi:
            for j, a in row:
                r[j] -= a * yi
    return r


def sign_feasible(model: RationalMIP, y: Sequence[Fraction]) -> bool:
    for s, yi in zip(model.senses, y):
        if (s == "G" and yi < 0) or (s == "L" and yi > 0):
            return False
    return True


def dual_value(model: RationalMIP, y: Sequence[Fraction], lower=None, upper=None,
               objective: bool = True) -> ExtQ:
    """Exact lower bound ``offset + b.y + sum_j min(r_j l_j, r_j u_j)`` with
    ``r = c - A^T y``; valid for every sign-feasible ``y``.  With
    ``objective=False`` the objective is taken as zero, so a positive value
    proves infeasibility."""
    if not sign_feasible(model, y):
        raise ValueError("multipliers violate row-sense sign conditions")
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    zero = [Fraction(0)] * model.n
    r = reduced_costs(model, y, None if objective else zero)
    total: ExtQ = (model.offset if objective else Fraction(0))
    total += sum((b * yi for b, yi in zip(model.rhs, y) if yi), Fraction(0))
    for j, rj in enumerate(r):
        if rj > 0:
            total = ext_add(total, ext_mul(rj, lower[j]))
        elif rj < 0:
            total = ext_add(total, ext_mul(rj, upper[j]))
    return total


# ---------------------------------------------------------------------------
# exact engine set-up

def _exact_arrays(model: RationalMIP, lower, upper):
    m, n = model.m, model.n
    M = np.empty((m, n + m), dtype=object)
    M[:, :] = Fraction(0)
    for i, row in enumerate(model.rows):
        for j, a in row:
            M[i, j] = a
        M[i, n + i] = Fraction(-1)
    slo, shi = slack_bounds(model.senses, model.rhs)
    cost = list(model.obj) + [Fraction(0)] * m
    return M, cost, list(lower) + slo, list(upper) + shi


def _engine(model, lower, upper, cost=None):
    M, c, lo, hi = _exact_arrays(model, lower, upper)
    return BoundedSimplex(M, [Fraction(0)] * model.m, c if cost is None else cost, lo, hi, exact=True)


def verify_basis(model: RationalMIP, statuses: Sequence[int], lower=None, upper=None):
    """Exact primal/dual check of a basis.  Returns ``(x, y)`` of the basic
    solution when it is optimal, else ``None``."""
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    eng = _engine(model, lower, upper)
    try:
        eng._install(statuses)
    except SingularBasis:
        return None
    eng._compute_x()
    for j in eng.head:
        if eng.x[j] < eng.lo[j] or eng.x[j] > eng.hi[j]:
            return None
    y = eng._duals(eng.cost)
    d = eng.cost - (y @ eng.M if eng.m else 0)
    j, _ = eng._price(d)
    if j is not None:
        return None
    return list(eng.x[:model.n]), list(y)


def _float_bounds(values):
    return np.array([nearest_float(v) for v in values])


def _result_from_engine(model, res, lower, upper, rounds, extra_stats) -> ExactLpResult:
    n, m = model.n, model.m
    basis = None
    if sum(1 for s in res.statuses if s == BASIC) == m:
        basis = Basis(tuple(res.statuses[:n]), tuple(res.statuses[n:n + m]))
    if res.status == "optimal":
        x = list(res.z[:n])
        y = list(res.y)
        return ExactLpResult("optimal", x, y, model.objective(x), basis, rounds=rounds,
                             rational_pivots=res.iterations, stats=extra_stats)
    if res.status == "infeasible":
        farkas = list(res.y)
        if not dual_value(model, farkas, lower, upper, objective=False) > 0:
            raise ArithmeticError("phase-1 duals do not prove infeasibility")
        return ExactLpResult("infeasible", farkas=farkas, rounds=rounds,
                             rational_pivots=res.iterations, stats=extra_stats)
    if res.status == "unbounded":
        return ExactLpResult("unbounded", x=list(res.z[:n]), ray=list(res.ray[:n]), basis=basis,
                             rounds=rounds, rational_pivots=res.iterations, stats=extra_stats)
    raise ArithmeticError(f"rational simplex ended with status {res.status}")


def _violations(model, M, z, y, lo, hi):
    """Max primal and dual violation of the exact iterate ``(z, y)``."""
    m = model.m
    pviol = Fraction(0)
    if m:
        resid = -(M @ z)
        pviol = max(abs(v) for v in resid)
    else:
        resid = np.array([], dtype=object)
    for j, v in enumerate(z):
        if v < lo[j]:
            pviol = max(pviol, lo[j] - v)
        elif v > hi[j]:
            pviol = max(pviol, v - hi[j])
    cost = np.array(list(model.obj) + [Fraction(0)] * m, dtype=object)
    d = cost - (y @ M if m else 0)
    dviol = Fraction(0)
    for j, dj in enumerate(d):
        if dj > 0 and z[j] > lo[j]:
            dviol = max(dviol, dj)
        elif dj < 0 and z[j] < hi[j]:
            dviol = max(dviol, -dj)
    return pviol, dviol, resid, d


def solve_exact_lp(model: RationalMIP, lower=None, upper=None, warm: Optional[Basis] = None,
                   fmodel: Optional[FloatMIP] = None, max_rounds: int = MAX_ROUNDS) -> ExactLpResult:
    """Solve the LP relaxation of ``model`` (under optional local bounds) exactly."""
    lower = tuple(model.lower if lower is None else lower)
    upper = tuple(model.upper if upper is None else upper)
    n, m = model.n, model.m
    for j in range(n):
        if lower[j] > upper[j]:
            return ExactLpResult("infeasible", farkas=[Fraction(0)] * m, conflict=j)
    fmodel = fmodel if fmodel is not None else approximate(model)
    flo, fhi = _float_bounds(lower), _float_bounds(upper)
    stats = {"float_status": None, "verified": False}

    fres = solve_fp_lp(fmodel, flo, fhi, warm=warm)
    stats["float_status"] = fres.status
    last_basis = fres.basis if fres.basis is not None else warm
    rounds = 0
    if fres.status == "optimal" and fres.basis is not None:
        rounds = 1
        ok = verify_basis(model, fres.basis.status, lower, upper)
        if ok is not None:
            x, y = ok
            stats["verified"] = True
            return ExactLpResult("optimal", x, y, model.objective(x), fres.basis, rounds=rounds, stats=stats)

        # iterative refinement on the scaled residual problem
        M, cost, lo, hi = _exact_arrays(model, lower, upper)
        z = np.array([Fraction(float(v)) for v in fres.x] +
                     [Fraction(0)] * m, dtype=object)
        for i, row in enumerate(model.rows):
            z[n + i] = sum((a * z[j] for j, a in row), Fraction(0))
        y = np.array([Fraction(float(v)) for v in fres.y], dtype=object)
        Mf = standard_form(fmodel.A)
        prev = None
        basis = fres.basis
        while rounds < max_rounds:
            pviol, dviol, resid, d = _violations(model, M, z, y, lo, hi)
            viol = max(pviol, dviol)
            if prev is not None and viol * 2 > prev:
                break
            prev = viol
            sp = SCALE_CAP if pviol == 0 else min(SCALE_CAP, 1 / pviol)
            sd = SCALE_CAP if dviol == 0 else min(SCALE_CAP, 1 / dviol)
            clo = [nearest_float(ext_mul(sp, ext_add(lo[j], -z[j]))) for j in range(n + m)]
            chi = [nearest_float(ext_mul(sp, ext_add(hi[j], -z[j]))) for j in range(n + m)]
            ccost = np.array([nearest_float(sd * dj) for dj in d])
            eng = BoundedSimplex(Mf, np.array([nearest_float(sp * r) for r in resid]), ccost,
                                 clo, chi, exact=False)
            cres = eng.solve(statuses=basis.status, slack_head=range(n, n + m))
            rounds += 1
            if cres.status != "optimal":
                break
            if sum(1 for s in cres.statuses if s == BASIC) == m:
                basis = Basis(tuple(cres.statuses[:n]), tuple(cres.statuses[n:n + m]))
                last_basis = basis
                ok = verify_basis(model, basis.status, lower, upper)
                if ok is not None:
                    x, yy = ok
                    stats["verified"] = True
                    return ExactLpResult("optimal", x, yy, model.objective(x), basis,
                                         rounds=rounds, stats=stats)
            z = z + np.array([Fraction(float(v)) / sp for v in cres.z], dtype=object)
            y = y + np.array([Fraction(float(v)) / sd for v in cres.y], dtype=object)

    # rational simplex finish
    eng = _engine(model, lower, upper)
    res = eng.solve(statuses=last_basis.status if last_basis is not None else None,
                    slack_head=range(n, n + m))
    return _result_from_engine(model, res, lower, upper, rounds, stats)


def rational_simplex(model: RationalMIP, lower=None, upper=None, warm: Optional[Basis] = None) -> ExactLpResult:
    """Exact LP solve by rational simplex pivots only (no float guidance)."""
    lower = tuple(model.lower if lower is None else lower)
    upper = tuple(model.upper if upper is None else upper)
    for j in range(model.n):
        if lower[j] > upper[j]:
            return ExactLpResult("infeasible", farkas=[Fraction(0)] * model.m, conflict=j)
    eng = _engine(model, lower, upper)
    res = eng.solve(statuses=warm.status if warm is not None else None,
                    slack_head=range(model.n, model.n + model.m))
    return _result_from_engine(model, res, lower, upper, 0, {})


# ---------------------------------------------------------------------------
# interior point of the dual region

@dataclass(frozen=True)
class InteriorPoint:
    y: tuple            # row multipliers
    slack: Fraction     # delta: every inequality of the dual region holds with this slack


def dual_constraints(model: RationalMIP, lower=None, upper=None):
    """Inequalities ``g(y) >= 0`` and equalities ``g(y) = 0`` describing the
    multipliers with a finite dual value.  Each ``g`` is ``(coef dict, const)``
    meaning ``sum coef[i] y_i + const``."""
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    ineq, eq = [], []
    for i, s in enumerate(model.senses):
        if s == "G":
            ineq.append(({i: Fraction(1)}, Fraction(0)))
        elif s == "L":
            ineq.append(({i: Fraction(-1)}, Fraction(0)))
    cols = model.columns()
    for j in range(model.n):
        lo_fin, up_fin = is_finite(lower[j]), is_finite(upper[j])
        if lo_fin and up_fin:
            continue
        # r_j = c_j - sum_i a_ij y_i
        g = ({i: -a for i, a in cols[j]}, model.obj[j])
        if lo_fin:
            ineq.append(g)
        elif up_fin:
            ineq.append(({i: -v for i, v in g[0].items()}, -g[1]))
        else:
            eq.append(g)
    return ineq, eq


def interior_point(model: RationalMIP, lower=None, upper=None) -> Optional[InteriorPoint]:
    """Point of the dual region maximizing the common slack ``delta <= 1`` of
    all its inequalities; ``None`` when the best slack is zero or the region
    is empty."""
    ineq, eq = dual_constraints(model, lower, upper)
    m = model.m
    rows, senses, rhs = [], [], []
    for coef, const in ineq:
        rows.append([coef.get(i, 0) for i in range(m)] + [-1])
        senses.append("G")
        rhs.append(-const)
    for coef, const in eq:
        rows.append([coef.get(i, 0) for i in range(m)] + [0])
        senses.append("E")
        rhs.append(-const)
    aux = build_model(rows, senses, rhs, [0] * m + [-1],
                      lower=[-INF] * m + [0], upper=[INF] * m + [1], name="dual-interior")
    res = solve_exact_lp(aux)
    if res.status != "optimal":
        return None
    delta = res.x[m]
    if delta <= 0:
        return None
    return InteriorPoint(tuple(res.x[:m]), delta)
