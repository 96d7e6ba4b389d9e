"""Exact presolving with a postsolve stack.

The presolver works on a mutable copy of the model and applies, round by
round: bound propagation, coefficient strengthening, singleton columns,
substitution of doubleton equations, gcd simplification of integer rows,
parallel rows and dual fixing.  Every comparison is exact.  Reductions that
change the meaning of a variable (fixings and substitutions) are pushed to a
stack that :func:`postsolve` undoes in reverse order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .model import RationalMIP
from .numerics import INF, ExtQ, is_finite


@dataclass(frozen=True)
class Reduction:
    """One presolve step.

    kind is one of ``fix``, ``substitute``, ``bound_change``, ``delete_row``,
    ``merge_parallel``, ``scale_row``, ``strengthen_coef``.  Only ``fix`` and
    ``substitute`` matter to postsolve; the others are kept as a log.
    ``substitute`` stores ``x_col = const + sum(coef * x_k)``.
    """

    kind: str
    col: Optional[int] = None
    row: Optional[int] = None
    value: Optional[Fraction] = None
    terms: tuple = ()
    detail: tuple = ()


@dataclass
class PostsolveStack:
    n_original: int
    col_map: list = field(default_factory=list)     # reduced index -> original index
    row_map: list = field(default_factory=list)
    reductions: list = field(default_factory=list)

    def push(self, red: Reduction):
        self.reductions.append(red)

    def __len__(self):
        return len(self.reductions)


@dataclass
class PresolveResult:
    status: str                         # reduced | infeasible
    model: Optional[RationalMIP]
    stack: PostsolveStack
    stats: dict
    witness: str = ""


class Infeasible(Exception):
    pass


def _ceil(q: Fraction) -> Fraction:
    return Fraction(math.ceil(q))


def _floor(q: Fraction) -> Fraction:
    return Fraction(math.floor(q))


class _Work:
    """Mutable model copy with column index and liveness flags."""

    def __init__(self, model: RationalMIP):
        self.model = model
        self.rows = [dict(r) for r in model.rows]
        self.senses = list(model.senses)
        self.rhs = list(model.rhs)
        self.obj = list(model.obj)
        self.lower = list(model.lower)
        self.upper = list(model.upper)
        self.ints = set(model.integers)
        self.offset = model.offset
        self.row_alive = [True] * model.m
        self.col_alive = [True] * model.n
        self.cols = [set() for _ in range(model.n)]
        for i, r in enumerate(self.rows):
            for j in r:
                self.cols[j].add(i)
        self.stack = PostsolveStack(model.n)
        self.stats = {"rnds": 0, "fixed": 0, "agg": 0, "bdchg": 0, "rows_deleted": 0,
                      "coef": 0, "scaled": 0, "parallel": 0}
        self.changed = 0

    # -- primitive edits ----------------------------------------------------

    def live_rows(self):
        return [i for i, a in enumerate(self.row_alive) if a]

    def live_cols(self):
        return [j for j, a in enumerate(self.col_alive) if a]

    def set_coef(self, i, j, a):
        if a == 0:
            self.rows[i].pop(j, None)
            self.cols[j].discard(i)
        else:
            self.rows[i][j] = a
            self.cols[j].add(i)

    def delete_row(self, i, why=""):
        for j in list(self.rows[i]):
            self.cols[j].discard(i)
        self.rows[i] = {}
        self.row_alive[i] = False
        self.stats["rows_deleted"] += 1
        self.stack.push(Reduction("delete_row", row=i, detail=(why,)))
        self.changed += 1

    def change_bound(self, j, side, value):
        if side == "lower":
            self.lower[j] = value
        else:
            self.upper[j] = value
        self.stats["bdchg"] += 1
        self.stack.push(Reduction("bound_change", col=j, value=value, detail=(side,)))
        self.changed += 1
        if self.lower[j] > self.upper[j]:
            raise Infeasible(f"empty domain for column {self.model.col_names[j]}")

    def fix(self, j, value):
        if value < self.lower[j] or value > self.upper[j]:
            raise Infeasible(f"fixing {self.model.col_names[j]} outside its domain")
        if j in self.ints and value.denominator != 1:
            raise Infeasible(f"fractional fixing of integer {self.model.col_names[j]}")
        for i in list(self.cols[j]):
            a = self.rows[i].pop(j)
            self.rhs[i] -= a * value
        self.cols[j] = set()
        self.offset += self.obj[j] * value
        self.obj[j] = Fraction(0)
        self.col_alive[j] = False
        self.stack.push(Reduction("fix", col=j, value=value))
        self.stats["fixed"] += 1
        self.changed += 1

    def substitute(self, j, const, terms):
        """Eliminate ``x_j = const + sum(coef * x_k)`` from rows and objective."""
        for i in list(self.cols[j]):
            a = self.rows[i].pop(j)
            self.rhs[i] -= a * const
            for k, t in terms:
                self.set_coef(i, k, self.rows[i].get(k, Fraction(0)) + a * t)
        self.cols[j] = set()
        cj = self.obj[j]
        if cj:
            self.offset += cj * const
            for k, t in terms:
                self.obj[k] += cj * t
        self.obj[j] = Fraction(0)
        self.col_alive[j] = False
        self.stack.push(Reduction("substitute", col=j, value=const, terms=tuple(terms)))
        self.stats["agg"] += 1
        self.changed += 1

    # -- activities -----------------------------------------------------------

    def contrib(self, j, a):
        """(min, max) of a * x_j over the domain, as extended rationals."""
        lo, up = self.lower[j], self.upper[j]
        if a > 0:
            return (a * lo if is_finite(lo) else -INF), (a * up if is_finite(up) else INF)
        return (a * up if is_finite(up) else -INF), (a * lo if is_finite(lo) else INF)

    def activity(self, i):
        """Finite parts and infinity counts of min and max activity."""
        mn, mx, nmn, nmx = Fraction(0), Fraction(0), 0, 0
        for j, a in self.rows[i].items():
            lo, hi = self.contrib(j, a)
            if is_finite(lo):
                mn += lo
            else:
                nmn += 1
            if is_finite(hi):
                mx += hi
            else:
                nmx += 1
        return mn, nmn, mx, nmx

    def min_activity(self, i) -> ExtQ:
        mn, nmn, _, _ = self.activity(i)
        return mn if nmn == 0 else -INF

    def max_activity(self, i) -> ExtQ:
        _, _, mx, nmx = self.activity(i)
        return mx if nmx == 0 else INF


# ---------------------------------------------------------------------------
# techniques

def _row_bounds(w: _Work, i: int):
    """Yield ``(j, side, value)`` bound candidates implied by row i."""
    mn, nmn, mx, nmx = w.activity(i)
    s, b = w.senses[i], w.rhs[i]
    for j, a in w.rows[i].items():
        clo, chi = w.contrib(j, a)
        if s in ("G", "E"):
            # a x_j >= b - maxact(-j)
            if nmx == 0:
                rest = mx - chi
            elif nmx == 1 and not is_finite(chi):
                rest = mx
            else:
                rest = None
            if rest is not None:
                v = (b - rest) / a
                yield (j, "lower", v) if a > 0 else (j, "upper", v)
        if s in ("L", "E"):
            if nmn == 0:
                rest = mn - clo
            elif nmn == 1 and not is_finite(clo):
                rest = mn
            else:
                rest = None
            if rest is not None:
                v = (b - rest) / a
                yield (j, "upper", v) if a > 0 else (j, "lower", v)


def _round_bound(w, j, side, v):
    if j in w.ints:
        return _ceil(v) if side == "lower" else _floor(v)
    return v


def _tighter(w, j, side, v) -> bool:
    cur = w.lower[j] if side == "lower" else w.upper[j]
    return v > cur if side == "lower" else v < cur


def propagate_bounds(model: RationalMIP) -> list:
    """One sweep of activity-based bound tightening over all rows.

    Returns ``bound_change`` reductions (integer bounds rounded inward); the
    model itself is not modified.  Raises :class:`Infeasible` on an empty
    domain.
    """
    w = _Work(model)
    out = []
    for i in range(model.m):
        for j, side, v in list(_row_bounds(w, i)):
            v = _round_bound(w, j, side, v)
            if _tighter(w, j, side, v):
                w.change_bound(j, side, v)
                out.append(Reduction("bound_change", col=j, value=v, detail=(side,)))
    return out


def _check_row(w, i):
    s, b = w.senses[i], w.rhs[i]
    mn, mx = w.min_activity(i), w.max_activity(i)
    if (s in ("G", "E") and mx < b) or (s in ("L", "E") and mn > b):
        raise Infeasible(f"row {w.model.row_names[i]} cannot be satisfied")
    redundant = (s == "G" and mn >= b) or (s == "L" and mx <= b) or (s == "E" and mn == mx == b)
    if redundant:
        w.delete_row(i, "redundant")


def _propagate(w: _Work):
    for i in w.live_rows():
        if not w.row_alive[i]:
            continue
        single = len(w.rows[i]) == 1
        for j, side, v in list(_row_bounds(w, i)):
            v = _round_bound(w, j, side, v)
            cur = w.lower[j] if side == "lower" else w.upper[j]
            # continuous bounds only move from infinite to finite here (or from
            # singleton rows), which keeps the round loop finite
            if j not in w.ints and not single and is_finite(cur):
                continue
            if _tighter(w, j, side, v):
                w.change_bound(j, side, v)
        if single:
            if w.senses[i] == "E":
                # the equation is now captured by the bounds of its column
                (j,) = w.rows[i]
                if w.lower[j] == w.upper[j]:
                    w.delete_row(i, "singleton")
            else:
                w.delete_row(i, "singleton")
        elif w.row_alive[i]:
            _check_row(w, i)
    _remove_fixed(w)


def _remove_fixed(w: _Work):
    for j in w.live_cols():
        if w.lower[j] == w.upper[j]:
            w.fix(j, w.lower[j])
    for i in w.live_rows():
        if not w.rows[i]:
            s, b = w.senses[i], w.rhs[i]
            if (s == "G" and b > 0) or (s == "L" and b < 0) or (s == "E" and b != 0):
                raise Infeasible(f"empty row {w.model.row_names[i]} violated")
            w.delete_row(i, "empty")


def _parallel_key(row: dict) -> tuple:
    """Row coefficients scaled so the first entry has absolute value one."""
    norm = abs(row[min(row)])
    return tuple(sorted((j, a / norm) for j, a in row.items())), norm


def _strengthen(w: _Work):
    # rows with a parallel twin are left to the parallel-row step, which
    # would otherwise no longer recognize them after strengthening
    seen: dict = {}
    for i in w.live_rows():
        if w.rows[i]:
            key = _parallel_key(w.rows[i])[0]
            seen[key] = seen.get(key, 0) + 1
    for i in w.live_rows():
        s = w.senses[i]
        if s == "E" or (w.rows[i] and seen[_parallel_key(w.rows[i])[0]] > 1):
            continue
        sign = 1 if s == "L" else -1   # work on sign * row <= sign * b
        for j in list(w.rows[i]):
            if j not in w.ints:
                continue
            maxact = w.max_activity(i) if sign == 1 else -w.min_activity(i)
            if not is_finite(maxact):
                break
            b = sign * w.rhs[i]
            a = sign * w.rows[i][j]
            if maxact <= b:
                break
            if a > 0 and is_finite(w.upper[j]) and maxact - a < b:
                d = b - (maxact - a)
                new_a, new_b = a - d, b - d * w.upper[j]
            elif a < 0 and is_finite(w.lower[j]) and maxact + a < b:
                d = b - (maxact + a)
                new_a, new_b = a + d, b + d * w.lower[j]
            else:
                continue
            w.stack.push(Reduction("strengthen_coef", row=i, col=j,
                                   detail=(sign * a, sign * new_a, sign * new_b)))
            w.set_coef(i, j, sign * new_a)
            w.rhs[i] = sign * new_b
            w.stats["coef"] += 1
            w.changed += 1


def _implied_range(w, i, j):
    """Range of x_j implied by equation i and the other columns' bounds."""
    a = w.rows[i][j]
    lo, hi = Fraction(0), Fraction(0)
    lo_inf = hi_inf = False
    for k, ak in w.rows[i].items():
        if k == j:
            continue
        clo, chi = w.contrib(k, ak)
        if is_finite(clo):
            lo += clo
        else:
            lo_inf = True
        if is_finite(chi):
            hi += chi
        else:
            hi_inf = True
    b = w.rhs[i]
    # x_j = (b - rest) / a with rest in [lo, hi]
    v1 = (b - hi) / a if not hi_inf else None
    v2 = (b - lo) / a if not lo_inf else None
    if a > 0:
        return (v1 if v1 is not None else -INF), (v2 if v2 is not None else INF)
    return (v2 if v2 is not None else -INF), (v1 if v1 is not None else INF)


def _singleton_columns(w: _Work):
    """Continuous column in a single equation whose row-implied range fits
    inside its own bounds: solve the equation for it and drop the row."""
    for j in w.live_cols():
        if j in w.ints or len(w.cols[j]) != 1:
            continue
        (i,) = w.cols[j]
        if w.senses[i] != "E" or len(w.rows[i]) < 2:
            continue
        ilo, ihi = _implied_range(w, i, j)
        if ilo < w.lower[j] or ihi > w.upper[j]:
            continue
        a = w.rows[i][j]
        terms = [(k, -ak / a) for k, ak in w.rows[i].items() if k != j]
        const = w.rhs[i] / a
        w.substitute(j, const, terms)
        w.delete_row(i, "free singleton column")


def _substitution(w: _Work):
    """Eliminate one column of every two-column equation."""
    for i in w.live_rows():
        if not w.row_alive[i] or w.senses[i] != "E" or len(w.rows[i]) != 2:
            continue
        (j1, a1), (j2, a2) = sorted(w.rows[i].items())
        b = w.rhs[i]
        choice = None
        for (j, a), (k, ak) in (((j2, a2), (j1, a1)), ((j1, a1), (j2, a2))):
            # x_j = b/a - (ak/a) x_k
            const, t = b / a, -ak / a
            if j not in w.ints:
                choice = (j, a, k, const, t)
                break
            if k in w.ints and const.denominator == 1 and t.denominator == 1:
                choice = (j, a, k, const, t)
                break
        if choice is None:
            continue
        j, a, k, const, t = choice
        # move the bounds of x_j onto x_k
        for bound, side in ((w.lower[j], "lower"), (w.upper[j], "upper")):
            if not is_finite(bound):
                continue
            v = (bound - const) / t
            kside = side if t > 0 else ("upper" if side == "lower" else "lower")
            v = _round_bound(w, k, kside, v)
            if _tighter(w, k, kside, v):
                w.change_bound(k, kside, v)
        w.delete_row(i, "doubleton equation")
        w.substitute(j, const, [(k, t)])


def _gcd_simplify(w: _Work):
    for i in w.live_rows():
        row = w.rows[i]
        if not row or any(j not in w.ints for j in row):
            continue
        den = 1
        for a in row.values():
            den = den * a.denominator // math.gcd(den, a.denominator)
        g = 0
        for a in row.values():
            g = math.gcd(g, int(a * den))
        scale = Fraction(den, g)
        b = w.rhs[i] * scale
        s = w.senses[i]
        if s == "E" and b.denominator != 1:
            raise Infeasible(f"row {w.model.row_names[i]} has no integer solution")
        nb = _floor(b) if s == "L" else _ceil(b) if s == "G" else b
        if scale == 1 and nb == b:
            continue
        for j in list(row):
            row[j] = row[j] * scale
        w.rhs[i] = nb
        w.stack.push(Reduction("scale_row", row=i, value=scale))
        w.stats["scaled"] += 1
        w.changed += 1


def _parallel_rows(w: _Work):
    groups: dict = {}
    for i in w.live_rows():
        row = w.rows[i]
        if not row:
            continue
        key, norm = _parallel_key(row)
        groups.setdefault(key, []).append((i, norm))
    for key, members in groups.items():
        if len(members) < 2:
            continue
        # collect the implied range lo <= key.x <= hi
        lo, hi = -INF, INF
        lo_row = hi_row = None
        for i, norm in members:
            b = w.rhs[i] / norm
            if w.senses[i] in ("G", "E") and (lo_row is None or b > lo):
                lo, lo_row = b, i
            if w.senses[i] in ("L", "E") and (hi_row is None or b < hi):
                hi, hi_row = b, i
        if lo > hi:
            raise Infeasible("parallel rows contradict each other")
        if lo_row is not None and hi_row is not None and lo == hi:
            keep = lo_row if w.senses[lo_row] == "E" else hi_row if w.senses[hi_row] == "E" else lo_row
            w.senses[keep] = "E"
            keepers = {keep}
        else:
            keepers = {r for r in (lo_row, hi_row) if r is not None}
        for i, norm in members:
            if i not in keepers:
                kept = min(keepers)
                w.stack.push(Reduction("merge_parallel", row=kept, detail=(i, norm)))
                w.stats["parallel"] += 1
                w.delete_row(i, "parallel")


def _dual_fixing(w: _Work):
    for f in dual_fix_candidates(w):
        j, v = f
        if w.col_alive[j]:
            w.fix(j, v)


def dual_fix_candidates(w: _Work) -> list:
    out = []
    for j in w.live_cols():
        c = w.obj[j]
        down_ok = up_ok = True     # may x_j move down / up without breaking any row
        for i in w.cols[j]:
            a, s = w.rows[i][j], w.senses[i]
            if s == "E":
                down_ok = up_ok = False
                break
            # decreasing x_j keeps a G row feasible iff a <= 0, an L row iff a >= 0
            if (s == "G" and a > 0) or (s == "L" and a < 0):
                down_ok = False
            if (s == "G" and a < 0) or (s == "L" and a > 0):
                up_ok = False
        if c >= 0 and down_ok and is_finite(w.lower[j]):
            out.append((j, w.lower[j]))
        elif c <= 0 and up_ok and is_finite(w.upper[j]):
            out.append((j, w.upper[j]))
        elif c == 0 and not w.cols[j]:
            # unconstrained and objective-free column with two infinite bounds
            out.append((j, Fraction(0)))
    return out


def dual_fix(model: RationalMIP) -> list:
    """Fixings justified by the objective sign and the column's sign pattern."""
    w = _Work(model)
    return [Reduction("fix", col=j, value=v) for j, v in dual_fix_candidates(w)]


TECHNIQUES = (_propagate, _strengthen, _singleton_columns, _substitution,
              _gcd_simplify, _parallel_rows, _dual_fixing)


def presolve(model: RationalMIP, max_rounds: int = 10, parallel: bool = False,
             threshold: Fraction = Fraction(1, 100)) -> PresolveResult:
    """Run presolve rounds until a round changes fewer than ``threshold`` of
    rows plus columns (and at least one thing) or ``max_rounds`` is reached.

    ``parallel`` is accepted for interface compatibility; application order is
    always deterministic and single-threaded.
    """
    w = _Work(model)
    try:
        if model.trivially_infeasible:
            raise Infeasible("a column has lower bound above upper bound")
        for j in w.live_cols():
            if j in w.ints:
                for side, v in (("lower", w.lower[j]), ("upper", w.upper[j])):
                    if is_finite(v) and v.denominator != 1:
                        w.change_bound(j, side, _round_bound(w, j, side, v))
        for _ in range(max_rounds):
            w.changed = 0
            for tech in TECHNIQUES:
                tech(w)
                _remove_fixed(w)
            w.stats["rnds"] += 1
            if w.changed == 0 or w.changed < threshold * (model.m + model.n):
                break
    except Infeasible as e:
        return PresolveResult("infeasible", None, w.stack, w.stats, witness=str(e))
    return PresolveResult("reduced", _extract(w), w.stack, w.stats)


def _extract(w: _Work) -> RationalMIP:
    m0 = w.model
    cols = w.live_cols()
    rows = w.live_rows()
    index = {j: k for k, j in enumerate(cols)}
    w.stack.col_map = cols
    w.stack.row_map = rows
    new_rows = tuple(tuple(sorted((index[j], a) for j, a in w.rows[i].items())) for i in rows)
    return RationalMIP(
        name=m0.name, rows=new_rows, senses=tuple(w.senses[i] for i in rows),
        rhs=tuple(w.rhs[i] for i in rows), obj=tuple(w.obj[j] for j in cols),
        lower=tuple(w.lower[j] for j in cols), upper=tuple(w.upper[j] for j in cols),
        integers=frozenset(index[j] for j in cols if j in w.ints),
        col_names=tuple(m0.col_names[j] for j in cols), row_names=tuple(m0.row_names[i] for i in rows),
        offset=w.offset, maximize=m0.maximize, obj_name=m0.obj_name)


def postsolve(stack: PostsolveStack, reduced_x) -> list:
    """Map a reduced-space solution back to the original columns."""
    if len(reduced_x) != len(stack.col_map):
        raise ValueError("reduced solution has the wrong length")
    x: list = [None] * stack.n_original
    for k, j in enumerate(stack.col_map):
        x[j] = Fraction(reduced_x[k])
    for red in reversed(stack.reductions):
        if red.kind == "fix":
            x[red.col] = red.value
        elif red.kind == "substitute":
            x[red.col] = red.value + sum((t * x[k] for k, t in red.terms), Fraction(0))
    if any(v is None for v in x):
        raise ValueError("postsolve stack does not determine every column")
    return x
