"""Seeded random instances and small named fixtures."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .model import RationalMIP, build_model
from .numerics import INF


def _rational(rng, max_den: int, lo: int = -10, hi: int = 10) -> Fraction:
    den = int(rng.integers(1, max_den + 1))
    return Fraction(int(rng.integers(lo * den, hi * den + 1)), den)


def random_mip(seed: int, n_bin: int = None, n_cont: int = None, m: int = None,
               max_den: int = 100, density: float = 0.6, free_prob: float = 0.0) -> RationalMIP:
    """Random MIP with binaries, a few bounded-or-not continuous columns and
    rational coefficients with denominators up to ``max_den``.

    Rows are mostly built around a planted point, so most instances are
    feasible; a few rows ignore it and make some instances infeasible.
    """
    rng = np.random.default_rng(seed)
    n_bin = int(rng.integers(2, 11)) if n_bin is None else n_bin
    n_cont = int(rng.integers(0, 3)) if n_cont is None else n_cont
    m = int(rng.integers(1, 9)) if m is None else m
    n = n_bin + n_cont
    lower = [Fraction(0)] * n
    upper = [Fraction(1)] * n_bin
    for _ in range(n_cont):
        r = rng.random()
        if r < free_prob:
            lower[len(upper)] = -INF
            upper.append(INF)
        elif r < 0.5:
            upper.append(Fraction(int(rng.integers(1, 6))))
        else:
            upper.append(INF)
    point = [Fraction(int(rng.integers(0, 2))) for _ in range(n_bin)] + \
            [_rational(rng, 4, 0, 3) for _ in range(n_cont)]
    for j in range(n_bin, n):
        if point[j] > upper[j]:
            point[j] = upper[j]
        if lower[j] == -INF:
            point[j] = Fraction(0)
    A, senses, rhs = [], [], []
    for i in range(m):
        row = [(_rational(rng, max_den) if rng.random() < density else Fraction(0)) for _ in range(n)]
        if all(a == 0 for a in row):
            row[int(rng.integers(0, n))] = _rational(rng, max_den, 1, 10)
        act = sum((a * x for a, x in zip(row, point)), Fraction(0))
        if rng.random() < 0.12:
            # a row that ignores the planted point, so some instances are infeasible
            act = _rational(rng, 10, 0, 15)
        u = rng.random()
        if u < 0.15 and n_cont:
            senses.append("E")
            rhs.append(act)
        elif u < 0.6:
            senses.append("L")
            rhs.append(act + _rational(rng, 10, 0, 3))
        else:
            senses.append("G")
            rhs.append(act - _rational(rng, 10, 0, 3))
        A.append(row)
    obj = [_rational(rng, max_den) for _ in range(n)]
    # keep unbounded continuous columns from making the relaxation unbounded
    for j in range(n_bin, n):
        if upper[j] == INF and obj[j] < 0:
            obj[j] = -obj[j]
        if lower[j] == -INF:
            obj[j] = Fraction(0)
            A.append([Fraction(int(k == j)) for k in range(n)])
            senses.append("L")
            rhs.append(Fraction(5))
            A.append([Fraction(int(k == j)) for k in range(n)])
            senses.append("G")
            rhs.append(Fraction(-5))
    return build_model(A, senses, rhs, obj, lower=lower, upper=upper, integers=range(n_bin),
                       name=f"rand{seed}")


def random_lp(seed: int, n: int = None, m: int = None, max_den: int = 20) -> RationalMIP:
    """Random LP with n, m <= 8 and box bounds of mixed finiteness.

    Three instances in four are built around a planted point inside the
    bounds, so the set mixes optimal, infeasible and unbounded LPs.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9)) if n is None else n
    m = int(rng.integers(1, 9)) if m is None else m
    A = [[(_rational(rng, max_den, -5, 5) if rng.random() < 0.7 else Fraction(0)) for _ in range(n)]
         for _ in range(m)]
    senses = [str(rng.choice(["G", "L", "E"], p=[0.4, 0.4, 0.2])) for _ in range(m)]
    obj = [_rational(rng, max_den, -5, 5) for _ in range(n)]
    lower, upper, point = [], [], []
    for _ in range(n):
        r = rng.random()
        lo = _rational(rng, 4, -3, 0)
        up = lo + _rational(rng, 4, 0, 4)
        point.append(lo + (up - lo) * _rational(rng, 4, 0, 1))
        if r < 0.6:
            lower.append(lo)
            upper.append(up)
        elif r < 0.8:
            lower.append(lo)
            upper.append(INF)
        elif r < 0.9:
            lower.append(-INF)
            upper.append(up)
        else:
            lower.append(-INF)
            upper.append(INF)
    planted = rng.random() < 0.75
    rhs = []
    for row, s in zip(A, senses):
        if planted:
            act = sum((a * x for a, x in zip(row, point)), Fraction(0))
            slack = _rational(rng, max_den, 0, 2) if s != "E" else Fraction(0)
            rhs.append(act - slack if s == "G" else act + slack)
        else:
            rhs.append(_rational(rng, max_den, -5, 5))
    return build_model(A, senses, rhs, obj, lower=lower, upper=upper, name=f"lp{seed}")


def knapsack() -> RationalMIP:
    return build_model([[2, 3]], ["L"], [4], [-5, -4], upper=[1, 1], integers=[0, 1],
                       name="knapsack", col_names=["x1", "x2"], row_names=["cap"])


def parity() -> RationalMIP:
    return build_model([[2, -2]], ["E"], [1], [0, 0], upper=[10, 10], integers=[0, 1],
                       name="parity", col_names=["x", "y"], row_names=["odd"])


def exactness_showcase() -> RationalMIP:
    return build_model([[1000000001]], ["G"], [1000000000], [1], upper=[1], name="showcase",
                       col_names=["y"], row_names=["tight"])


def tenths() -> RationalMIP:
    """Mixed model whose data are decimal tenths (not representable in binary)."""
    return build_model([["0.1", "0.2", "0.3"], ["0.3", "0.1", "0"]], ["L", "G"], ["0.7", "0.1"],
                       ["-0.1", "-0.3", "-0.2"], upper=[3, 3, "2.5"], integers=[0, 1],
                       name="tenths", col_names=["a", "b", "c"], row_names=["r1", "r2"])


def free_column_knapsack(k: int = 12, seed: int = 3) -> RationalMIP:
    """Binary knapsack plus one free column ``z`` with cost 1/10 and row
    coefficient 3/10.

    At every node the exact reduced cost of ``z`` is zero, but a float dual
    never makes its interval reduced cost exactly zero, so bound-shift fails
    on every call while the branching keeps the tree busy.
    """
    rng = np.random.default_rng(seed)
    w = rng.integers(20, 60, k)
    v = w + rng.integers(-5, 6, k)
    A = [[int(a) for a in w] + [0], [-1] * k + [Fraction(3, 10)]]
    return build_model(A, ["L", "G"], [int(w.sum()) // 2, 0], [-int(a) for a in v] + [Fraction(1, 10)],
                       lower=[0] * k + [-INF], upper=[1] * k + [INF], integers=range(k),
                       name="freeknap")
