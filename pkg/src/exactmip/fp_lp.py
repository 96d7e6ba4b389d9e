"""Untrusted floating-point LP solves of node relaxations.

The relaxation ``min c.x  s.t.  A x (>=|<=|=) b,  l <= x <= u`` is put in
bounded standard form ``[A  -I] (x, s) = 0`` with slack bounds taken from the
row senses.  Nothing returned here is ever used for an exact decision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import FloatMIP
from .simplex import BASIC, Basis, BoundedSimplex

INF = np.inf


@dataclass
class FpLpResult:
    status: str             # optimal | infeasible-claimed | unbounded-claimed | objective-limit | iteration-limit
    x: np.ndarray
    y: np.ndarray
    reduced_costs: np.ndarray
    basis: Optional[Basis]
    iterations: int
    objective: float = np.nan
    message: str = ""


def slack_bounds(senses: Sequence[str], rhs) -> tuple:
    lo, hi = [], []
    for s, b in zip(senses, rhs):
        lo.append(b if s in ("G", "E") else -INF)
        hi.append(b if s in ("L", "E") else INF)
    return lo, hi


def standard_form(A: np.ndarray) -> np.ndarray:
    m = A.shape[0]
    return np.hstack([A, -np.eye(m)])


_STATUS = {"infeasible": "infeasible-claimed", "unbounded": "unbounded-claimed"}


def solve_fp_lp(fmodel: FloatMIP, lower=None, upper=None, warm: Optional[Basis] = None,
                obj_limit: Optional[float] = None, obj=None,
                iteration_limit: Optional[int] = None) -> FpLpResult:
    """Solve the float relaxation with optional node-local bounds.

    With ``obj_limit`` the solve stops early once a Lagrangian dual bound of the
    current iterate exceeds the limit (status ``objective-limit``).
    """
    m, n = fmodel.m, fmodel.n
    lo = np.asarray(fmodel.lower if lower is None else lower, dtype=float)
    hi = np.asarray(fmodel.upper if upper is None else upper, dtype=float)
    c = np.asarray(fmodel.obj if obj is None else obj, dtype=float)
    if np.any(lo > hi):
        return FpLpResult("infeasible-claimed", np.zeros(n), np.zeros(m), c.copy(), None, 0,
                          message="empty bound box")
    slo, shi = slack_bounds(fmodel.senses, fmodel.rhs)
    eng = BoundedSimplex(standard_form(fmodel.A), np.zeros(m), np.concatenate([c, np.zeros(m)]),
                         list(lo) + slo, list(hi) + shi, exact=False,
                         iteration_limit=iteration_limit, obj_limit=obj_limit)
    res = eng.solve(statuses=warm.status if warm is not None else None,
                    slack_head=range(n, n + m))
    status = _STATUS.get(res.status, res.status)
    x = np.asarray(res.z[:n], dtype=float)
    basis = None
    if sum(1 for s in res.statuses if s == BASIC) == m:
        basis = Basis(tuple(res.statuses[:n]), tuple(res.statuses[n:n + m]))
    objective = float(c @ x) if status in ("optimal", "objective-limit", "iteration-limit") else np.nan
    return FpLpResult(status, x, np.asarray(res.y, dtype=float), np.asarray(res.d[:n], dtype=float),
                      basis, res.iterations, objective, res.message)
