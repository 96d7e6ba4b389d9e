"""Bounded-variable primal simplex, shared by the float and the exact LP solvers.

Solves ``min cost.z  s.t.  M z = q,  lo <= z <= hi`` over a dense matrix.  In
float mode the arrays are ``float64`` and every test uses a tolerance; in exact
mode they are object arrays of ``Fraction`` and all tolerances are zero.

Phase 1 replaces each basic variable that violates a bound by an artificial
twin (the same column, scaled by the sign of the violation) and minimizes the
sum of artificials.  This works identically from the slack basis and from a
warm-start basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

BASIC, AT_LOWER, AT_UPPER, AT_ZERO = 0, 1, 2, 3

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50


class SingularBasis(ArithmeticError):
    pass


@dataclass(frozen=True)
class Basis:
    """Statuses of structural columns and of row slacks.

    A row whose slack is basic is loose; otherwise it is tight (slack at its
    lower or upper end).
    """

    cols: tuple
    rows: tuple

    @property
    def status(self) -> tuple:
        return self.cols + self.rows

    @property
    def row_is_basic(self) -> tuple:
        return tuple(s == BASIC for s in self.rows)

    def __post_init__(self):
        if sum(1 for s in self.status if s == BASIC) != len(self.rows):
            raise ValueError("basis must have exactly one basic entry per row")


@dataclass
class SimplexResult:
    status: str                   # optimal | infeasible | unbounded | objective-limit | iteration-limit
    z: np.ndarray
    y: np.ndarray                 # row duals (phase-1 duals when infeasible)
    d: np.ndarray                 # reduced costs
    statuses: list
    iterations: int
    objective: object = None
    ray: Optional[np.ndarray] = None
    message: str = ""


def rational_inverse(B: Sequence[Sequence[Fraction]]) -> list:
    """Gauss-Jordan inverse over the rationals; raises :class:`SingularBasis`."""
    m = len(B)
    aug = [list(B[i]) + [Fraction(int(i == k)) for k in range(m)] for i in range(m)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if piv is None:
            raise SingularBasis("singular basis matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        prow = [v / p for v in aug[col]]
        aug[col] = prow
        for r in range(m):
            if r != col:
                f = aug[r][col]
                if f != 0:
                    row = aug[r]
                    aug[r] = [a - f * b for a, b in zip(row, prow)]
    return [row[m:] for row in aug]


class BoundedSimplex:
    """One LP solve; construct, then call :meth:`solve` once."""

    def __init__(self, M, q, cost, lo, hi, exact: bool = False,
                 iteration_limit: Optional[int] = None, obj_limit: Optional[float] = None):
        self.exact = exact
        if exact:
            self.M = np.array(M, dtype=object)
            self.q = np.array(q, dtype=object)
            self.cost = np.array(cost, dtype=object)
            self.zero = Fraction(0)
        else:
            self.M = np.asarray(M, dtype=float)
            self.q = np.asarray(q, dtype=float)
            self.cost = np.asarray(cost, dtype=float)
            self.zero = 0.0
        self.m, self.N = self.M.shape
        self.lo = list(lo)
        self.hi = list(hi)
        self.ftol = 0 if exact else FEAS_TOL
        self.otol = 0 if exact else OPT_TOL
        self.ptol = 0 if exact else PIVOT_TOL
        self.iteration_limit = iteration_limit or 50 * (self.m + self.N) + 500
        self.obj_limit = obj_limit
        self.iterations = 0
        self.bland = False
        self.n_orig = self.N
        self.twin: dict = {}

    # -- linear algebra ---------------------------------------------------

    def _refactor(self):
        B = self.M[:, self.head]
        if self.exact:
            self.Binv = np.array(rational_inverse(B.tolist()), dtype=object).reshape(self.m, self.m)
        else:
            if self.m == 0:
                self.Binv = np.zeros((0, 0))
                return
            try:
                if np.linalg.cond(B) > 1e14:
                    raise SingularBasis("ill-conditioned basis")
                self.Binv = np.linalg.inv(B)
            except np.linalg.LinAlgError:
                raise SingularBasis("singular basis matrix") from None
        self.since_refactor = 0

    def _nonbasic_value(self, j):
        s = self.stat[j]
        if s == AT_LOWER:
            return self.lo[j]
        if s == AT_UPPER:
            return self.hi[j]
        return self.zero

    def _compute_x(self):
        x = np.array([self.zero] * self.N, dtype=object if self.exact else float)
        for j in range(self.N):
            if self.stat[j] != BASIC:
                x[j] = self._nonbasic_value(j)
        nb = [j for j in range(self.N) if self.stat[j] != BASIC]
        r = self.q - (self.M[:, nb] @ x[nb] if nb else self.zero)
        xb = self.Binv @ r if self.m else np.array([], dtype=x.dtype)
        for k, j in enumerate(self.head):
            x[j] = xb[k]
        self.x = x

    def _duals(self, cost):
        cb = cost[self.head]
        return cb @ self.Binv if self.m else np.array([], dtype=cost.dtype)

    # -- set-up -----------------------------------------------------------

    def _default_status(self, j):
        if not _isinf(self.lo[j]):
            return AT_LOWER
        if not _isinf(self.hi[j]):
            return AT_UPPER
        return AT_ZERO

    def _install(self, statuses):
        stat = []
        head = []
        for j, s in enumerate(statuses):
            if s == BASIC:
                head.append(j)
                stat.append(BASIC)
            elif s == AT_LOWER and not _isinf(self.lo[j]):
                stat.append(AT_LOWER)
            elif s == AT_UPPER and not _isinf(self.hi[j]):
                stat.append(AT_UPPER)
            else:
                stat.append(self._default_status(j))
        if len(head) != self.m:
            raise SingularBasis("wrong number of basic variables")
        self.stat = stat
        self.head = head
        self._refactor()

    def _add_artificials(self):
        """Swap every bound-violating basic variable for an artificial twin."""
        added = []
        for k, j in enumerate(list(self.head)):
            v = self.x[j]
            if v < self.lo[j] - self.ftol:
                bound, st, sigma = self.lo[j], AT_LOWER, -1
            elif v > self.hi[j] + self.ftol:
                bound, st, sigma = self.hi[j], AT_UPPER, 1
            else:
                continue
            added.append((k, j, bound, st, sigma, v))
        if not added:
            return False
        cols = []
        for idx, (k, j, bound, st, sigma, v) in enumerate(added):
            a = self.N + idx
            cols.append(self.M[:, j] * sigma)
            self.twin[a] = (j, sigma)
            self.stat[j] = st
            self.head[k] = a
            self.Binv[k, :] = self.Binv[k, :] * sigma
        extra = np.column_stack(cols)
        self.M = np.hstack([self.M, extra])
        self.cost = np.concatenate([self.cost, np.array([self.zero] * len(added), dtype=self.cost.dtype)])
        self.lo += [self.zero] * len(added)
        self.hi += [math.inf] * len(added)
        self.stat += [BASIC] * len(added)
        self.N += len(added)
        self._compute_x()
        return True

    # -- iterations -------------------------------------------------------

    def _price(self, d):
        best, best_j, best_dir = None, None, 0
        for j in range(self.N):
            s = self.stat[j]
            if s == BASIC or self.lo[j] == self.hi[j]:
                continue
            dj = d[j]
            if s == AT_LOWER:
                dirn = 1 if dj < -self.otol else 0
            elif s == AT_UPPER:
                dirn = -1 if dj > self.otol else 0
            else:
                dirn = 1 if dj < -self.otol else (-1 if dj > self.otol else 0)
            if dirn == 0:
                continue
            if self.bland:
                return j, dirn
            score = abs(dj)
            if best is None or score > best:
                best, best_j, best_dir = score, j, dirn
        return best_j, best_dir

    def _ratio(self, j, dirn):
        alpha = self.Binv @ self.M[:, j] if self.m else np.array([])
        t_best = None
        if not _isinf(self.lo[j]) and not _isinf(self.hi[j]):
            t_best = self.hi[j] - self.lo[j]
        cands = []
        for k in range(self.m):
            rate = -dirn * alpha[k]
            if -self.ptol <= rate <= self.ptol:
                continue
            b = self.head[k]
            if rate < 0:
                if _isinf(self.lo[b]):
                    continue
                t = (self.x[b] - self.lo[b]) / (-rate)
            else:
                if _isinf(self.hi[b]):
                    continue
                t = (self.hi[b] - self.x[b]) / rate
            if not self.exact and t < 0:
                t = 0.0
            cands.append((t, k, rate))
        leave = None
        if cands:
            tmin = min(c[0] for c in cands)
            if t_best is None or tmin < t_best:
                slack = 0 if self.exact else 1e-12 * (1 + abs(tmin))
                ties = [c for c in cands if c[0] <= tmin + slack]
                if self.bland:
                    leave = min(ties, key=lambda c: self.head[c[1]])
                else:
                    leave = max(ties, key=lambda c: (abs(c[2]), -self.head[c[1]]))
                t_best = tmin
        return t_best, leave, alpha

    def _pivot(self, j, dirn, t, leave, alpha):
        if t is not None and t != 0:
            self.x[j] = self.x[j] + dirn * t
            for k, b in enumerate(self.head):
                if alpha[k] != 0:
                    self.x[b] = self.x[b] - dirn * t * alpha[k]
        if leave is None:
            # bound flip of the entering variable
            self.stat[j] = AT_UPPER if dirn > 0 else AT_LOWER
            self.x[j] = self._nonbasic_value(j)
            return
        _, r, rate = leave
        b = self.head[r]
        self.stat[b] = AT_LOWER if rate < 0 else AT_UPPER
        self.x[b] = self._nonbasic_value(b)
        self.stat[j] = BASIC
        self.head[r] = j
        piv = alpha[r]
        row = self.Binv[r, :] / piv
        self.Binv = self.Binv - np.outer(alpha, row)
        self.Binv[r, :] = row
        self.since_refactor += 1
        if not self.exact and self.since_refactor >= REFACTOR_EVERY:
            self._refactor()
            self._compute_x()

    def _lagrangian(self, y, d):
        total = float(y @ self.q) if self.m else 0.0
        for j in range(self.N):
            dj = d[j]
            if dj > 0:
                total += dj * self.lo[j]
            elif dj < 0:
                total += dj * self.hi[j]
        return total

    def _run(self, cost, phase):
        degenerate = 0
        while True:
            y = self._duals(cost)
            d = cost - (y @ self.M if self.m else 0)
            if phase == 2 and self.obj_limit is not None and not self.exact:
                if self._lagrangian(y, d) > self.obj_limit:
                    return "objective-limit", y, d, None
            j, dirn = self._price(d)
            if j is None:
                return "optimal", y, d, None
            if self.iterations >= self.iteration_limit:
                return "iteration-limit", y, d, None
            t, leave, alpha = self._ratio(j, dirn)
            if t is None:
                ray = np.array([self.zero] * self.N, dtype=self.cost.dtype)
                ray[j] = dirn
                for k, b in enumerate(self.head):
                    ray[b] = -dirn * alpha[k]
                return "unbounded", y, d, ray
            self.iterations += 1
            degenerate = degenerate + 1 if t == 0 or (not self.exact and t <= self.ftol) else 0
            if degenerate > 3 * self.n_orig:
                self.bland = True
            self._pivot(j, dirn, t, leave, alpha)

    # -- driver -----------------------------------------------------------

    def solve(self, statuses: Optional[Sequence[int]] = None, slack_head: Optional[Sequence[int]] = None):
        """``statuses`` warm-starts from a basis; otherwise ``slack_head``
        names the columns of the initial (identity-like) basis."""
        installed = False
        if statuses is not None:
            try:
                self._install(statuses)
                installed = True
            except SingularBasis:
                installed = False
        if not installed:
            head = set(slack_head)
            self._install([BASIC if j in head else AT_LOWER for j in range(self.N)])
        self._compute_x()

        if self._add_artificials():
            phase1 = np.array([self.zero] * self.N, dtype=self.cost.dtype)
            for a in self.twin:
                phase1[a] = Fraction(1) if self.exact else 1.0
            try:
                status, y, d, _ = self._run(phase1, 1)
            except SingularBasis as e:
                return self._result("iteration-limit", message=str(e))
            if status == "iteration-limit":
                return self._result(status, y, d)
            infeas = sum((self.x[a] for a in self.twin), self.zero)
            if infeas > (0 if self.exact else 1e-7):
                return self._result("infeasible", y, d)
            try:
                self._drop_artificials()
            except SingularBasis as e:
                return self._result("iteration-limit", message=str(e))

        try:
            status, y, d, ray = self._run(self.cost, 2)
        except SingularBasis as e:
            return self._result("iteration-limit", message=str(e))
        return self._result(status, y, d, ray)

    def _drop_artificials(self):
        for a, (j, sigma) in self.twin.items():
            if self.stat[a] == BASIC:
                k = self.head.index(a)
                self.head[k] = j
                self.stat[j] = BASIC
                self.stat[a] = AT_LOWER
                self.Binv[k, :] = self.Binv[k, :] * sigma
            self.x[a] = self.zero
            self.hi[a] = self.zero
            self.cost[a] = self.zero
        if not self.exact:
            self._refactor()
        self._compute_x()

    def _result(self, status, y=None, d=None, ray=None, message=""):
        n = self.n_orig
        z = self.x[:n]
        if y is None:
            y = np.array([self.zero] * self.m, dtype=self.cost.dtype)
        if d is None:
            d = np.array([self.zero] * n, dtype=self.cost.dtype)
        obj = sum((self.cost[j] * z[j] for j in range(n)), self.zero) if status != "infeasible" else None
        return SimplexResult(status=status, z=z, y=y, d=d[:n], statuses=list(self.stat[:n]),
                             iterations=self.iterations, objective=obj,
                             ray=None if ray is None else ray[:n], message=message)


def _isinf(v) -> bool:
    return isinstance(v, float) and math.isinf(v)
