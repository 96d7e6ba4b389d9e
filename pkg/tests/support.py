"""Independent oracles and helpers shared by the test modules.

Nothing here calls the solver's LP code: the vertex enumeration, the
optimality checks and the certificate mutations are written from scratch.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction

import numpy as np

from exactmip.numerics import is_finite


# ---------------------------------------------------------------------------
# exact linear algebra

def rref(rows):
    """Reduced row echelon form over the rationals; returns (matrix, pivots)."""
    a = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [v / piv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [u - f * v for u, v in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def nullspace(rows, n):
    if not rows:
        return [[Fraction(int(i == k)) for i in range(n)] for k in range(n)]
    a, piv = rref(rows)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = -a[i][f]
        basis.append(v)
    return basis


def solve_square(mat, rhs):
    aug = [list(r) + [b] for r, b in zip(mat, rhs)]
    a, piv = rref(aug)
    n = len(mat)
    if piv[:n] != list(range(n)) or len(piv) > n:
        return None
    return [a[i][n] for i in range(n)]


# ---------------------------------------------------------------------------
# vertex enumeration LP oracle

def _constraints(model):
    """All constraints as (coef list, sense, rhs) with bounds appended."""
    n = model.n
    cons = []
    for i, row in enumerate(model.rows):
        a = [Fraction(0)] * n
        for j, v in row:
            a[j] = v
        cons.append((a, model.senses[i], model.rhs[i]))
    for j in range(n):
        e = [Fraction(int(k == j)) for k in range(n)]
        if is_finite(model.lower[j]):
            cons.append((e, "G", model.lower[j]))
        if is_finite(model.upper[j]):
            cons.append((e, "L", model.upper[j]))
    return cons


def _satisfied(cons, x):
    for a, s, b in cons:
        act = sum((u * v for u, v in zip(a, x)), Fraction(0))
        if (s == "G" and act < b) or (s == "L" and act > b) or (s == "E" and act != b):
            return False
    return True


def _direction_groups(cons):
    """Group id per constraint; constraints in one group are parallel."""
    ids, out = {}, []
    for a, _, _ in cons:
        lead = next((v for v in a if v != 0), Fraction(1))
        key = tuple(v / lead for v in a)
        out.append(ids.setdefault(key, len(ids)))
    return np.array(out, dtype=int)


def _without_parallel_pairs(combos, groups):
    if combos.shape[1] < 2:
        return combos
    g = np.sort(groups[combos], axis=1)
    return combos[~np.any(g[:, 1:] == g[:, :-1], axis=1)]


def _integer_rows(rows):
    out = []
    for r in rows:
        den = math.lcm(*(Fraction(v).denominator for v in r)) if r else 1
        out.append([int(Fraction(v) * den) for v in r])
    return out


def bareiss_det(mat):
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [list(r) for r in mat]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if sw is None:
                return 0
            a[k], a[sw] = a[sw], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1] if n else 1


def _float_screen(A, senses, b, combos, tol=1e-7):
    """Float solutions of the square subsystems plus a mask of the subsets
    whose conditioning is too poor to trust floating point."""
    M = A[combos]
    rhs = b[combos]
    cond = np.linalg.cond(M)
    ok = np.isfinite(cond) & (cond < 1e10)
    xs = np.full((len(combos), A.shape[1]), np.nan)
    if ok.any():
        xs[ok] = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    act = xs @ A.T
    scale = tol * (1 + np.abs(b))
    feas = np.ones(len(combos), dtype=bool)
    for i, s in enumerate(senses):
        if s in ("G", "E"):
            feas &= act[:, i] >= b[i] - scale[i]
        if s in ("L", "E"):
            feas &= act[:, i] <= b[i] + scale[i]
    return xs, feas & ok, ~ok


def _vertices(cons, n, obj):
    """Exact feasible vertices whose objective lies within a small window of
    the best exactly verified vertex."""
    A = np.array([[float(v) for v in a] for a, _, _ in cons]).reshape(len(cons), n)
    b = np.array([float(v) for _, _, v in cons])
    senses = [s for _, s, _ in cons]
    int_rows = _integer_rows([a for a, _, _ in cons])
    eq = [i for i, s in enumerate(senses) if s == "E"]
    # an independent subset of the equations belongs to every active set
    eq_keep = [eq[k] for k in rref([[cons[i][0][c] for i in eq] for c in range(n)])[1]] if eq else []
    pool = [i for i in range(len(cons)) if i not in eq_keep]
    combos = [tuple(eq_keep) + c for c in itertools.combinations(pool, n - len(eq_keep))]
    if not combos or n == 0:
        return []
    combos = np.array(combos, dtype=int).reshape(len(combos), n)
    combos = _without_parallel_pairs(combos, _direction_groups(cons))
    c = np.array([float(v) for v in obj])
    cands = []
    seen_keys = set()
    for start in range(0, len(combos), 200000):
        chunk = combos[start:start + 200000]
        xs, feas, uncertain = _float_screen(A, senses, b, chunk)
        for k in np.flatnonzero(feas):
            key = tuple(np.round(xs[k], 9))
            if key in seen_keys:
                continue          # a degenerate vertex reached from another active set
            seen_keys.add(key)
            cands.append((float(xs[k] @ c), tuple(chunk[k])))
        for k in np.flatnonzero(uncertain):
            sub = tuple(chunk[k])
            if bareiss_det([int_rows[i] for i in sub]) != 0:
                cands.append((-math.inf, sub))
    cands.sort()
    out = {}
    best = None
    for val, sub in cands:
        if best is not None and val > best + 1e-6 * (1 + abs(best)):
            break
        x = solve_square([cons[i][0] for i in sub], [cons[i][2] for i in sub])
        if x is None or not _satisfied(cons, x):
            continue
        out[tuple(x)] = x
        v = float(sum((u * w for u, w in zip(obj, x)), Fraction(0)))
        best = v if best is None else min(best, v)
    return list(out.values())


def _improving_ray(cone, n, c):
    """An exact extreme ray ``d`` of the pointed cone with ``c.d < 0``, or None.

    Each extreme ray spans the kernel of ``n - 1`` independent active
    constraints; float SVD screens the subsets, and poorly conditioned
    subsets as well as every candidate are settled exactly.
    """
    if n == 0:
        return None

    def exact_check(sub):
        ns = nullspace([cone[i][0] for i in sub], n)
        if len(ns) != 1:
            return None
        for sg in (1, -1):
            ray = [sg * v for v in ns[0]]
            if _satisfied(cone, ray) and sum((u * v for u, v in zip(c, ray)), Fraction(0)) < 0:
                return ray
        return None

    if n == 1:
        return exact_check(())
    subsets = np.array(list(itertools.combinations(range(len(cone)), n - 1)), dtype=int)
    if subsets.size == 0:
        return None
    subsets = _without_parallel_pairs(subsets, _direction_groups(cone))
    A = np.array([[float(v) for v in a] for a, _, _ in cone]).reshape(len(cone), n)
    senses = [s for _, s, _ in cone]
    cf = np.array([float(v) for v in c])
    tried = set()
    for start in range(0, len(subsets), 100000):
        chunk = subsets[start:start + 100000]
        _, sv, vt = np.linalg.svd(A[chunk])
        ratio = sv[:, n - 2] / np.maximum(sv[:, 0], 1e-300)
        clear = ratio > 1e-9
        d = vt[:, -1, :]
        for sign in (1.0, -1.0):
            dd = sign * d
            act = dd @ A.T
            ok = clear & (dd @ cf < 1e-9)
            for i, s in enumerate(senses):
                if s in ("G", "E"):
                    ok &= act[:, i] >= -1e-7
                if s in ("L", "E"):
                    ok &= act[:, i] <= 1e-7
            for k in np.flatnonzero(ok):
                key = tuple(np.round(dd[k] / np.abs(dd[k]).max(), 9))
                if key in tried:
                    continue
                tried.add(key)
                ray = exact_check(chunk[k])
                if ray is not None:
                    return ray
        # rank deficient in floating point, possibly not exactly
        for k in np.flatnonzero(~clear & (ratio > 1e-17)):
            ray = exact_check(chunk[k])
            if ray is not None:
                return ray
    return None


def lp_oracle(model):
    """Exact LP status and optimum by enumerating vertices and extreme rays.

    Returns ``(status, value)`` with status optimal, infeasible or unbounded.
    """
    n = model.n
    cons = _constraints(model)
    c = list(model.obj)
    if any(lo > up for lo, up in zip(model.lower, model.upper)):
        return "infeasible", None
    lin = nullspace([a for a, _, _ in cons], n)
    lineal_unbounded = any(sum((u * v for u, v in zip(c, d)), Fraction(0)) != 0 for d in lin)
    # restrict to the orthogonal complement of the lineality space
    cons_p = cons + [(d, "E", Fraction(0)) for d in lin]
    verts = _vertices(cons_p, n, c)
    if not verts:
        return "infeasible", None
    if lineal_unbounded:
        return "unbounded", None
    boxed = all(is_finite(lo) and is_finite(up) for lo, up in zip(model.lower, model.upper))
    if not boxed:
        cone = [(a, s, Fraction(0)) for a, s, _ in cons_p]
        if _improving_ray(cone, n, c) is not None:
            return "unbounded", None
    best = min(sum((u * v for u, v in zip(c, x)), Fraction(0)) for x in verts)
    return "optimal", best + model.offset


# ---------------------------------------------------------------------------
# optimality and infeasibility checks written from first principles

def row_activity(model, i, x):
    return sum((a * x[j] for j, a in model.rows[i]), Fraction(0))


def primal_feasible(model, x, lower=None, upper=None):
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    if any(v < lo or v > up for v, lo, up in zip(x, lower, upper)):
        return False
    for i in range(model.m):
        act, s, b = row_activity(model, i, x), model.senses[i], model.rhs[i]
        if (s == "G" and act < b) or (s == "L" and act > b) or (s == "E" and act != b):
            return False
    return True


def kkt_holds(model, x, y, lower=None, upper=None):
    """Primal feasibility, dual sign feasibility and complementary slackness."""
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    if not primal_feasible(model, x, lower, upper):
        return False
    r = list(model.obj)
    for i, row in enumerate(model.rows):
        s, yi = model.senses[i], y[i]
        if (s == "G" and yi < 0) or (s == "L" and yi > 0):
            return False
        if yi != 0 and row_activity(model, i, x) != model.rhs[i]:
            return False
        for j, a in row:
            r[j] -= a * yi
    for j, rj in enumerate(r):
        if rj > 0 and x[j] != lower[j]:
            return False
        if rj < 0 and x[j] != upper[j]:
            return False
    return True


def farkas_holds(model, y, lower=None, upper=None):
    """``b.y + sum_j min(r_j l_j, r_j u_j) > 0`` with ``r = -A^T y``."""
    lower = model.lower if lower is None else lower
    upper = model.upper if upper is None else upper
    r = [Fraction(0)] * model.n
    total = Fraction(0)
    for i, row in enumerate(model.rows):
        s, yi = model.senses[i], y[i]
        if (s == "G" and yi < 0) or (s == "L" and yi > 0):
            return False
        total += yi * model.rhs[i]
        for j, a in row:
            r[j] -= a * yi
    for j, rj in enumerate(r):
        if rj > 0:
            if not is_finite(lower[j]):
                return False
            total += rj * lower[j]
        elif rj < 0:
            if not is_finite(upper[j]):
                return False
            total += rj * upper[j]
    return total > 0


# ---------------------------------------------------------------------------
# certificate mutations

MUTATIONS = ("multiplier", "sense", "rhs", "drop", "reorder", "goal")


def _split(text):
    lines = text.rstrip("\n").split("\n")
    der = next(i for i, l in enumerate(lines) if l.startswith("DER "))
    return lines, der


def _parse_der(line):
    m = re.match(r"^(\S+) (\S+) (\d+)((?: \S+ \S+)*?) \{ (.*) \}$", line)
    return m


def _frac(tok):
    return Fraction(tok)


def _fmt(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def mutate(text: str, kind: str, rng) -> list:
    """All (or a random sample of) mutants of one class; each is a full text."""
    lines, der = _split(text)
    entries = list(range(der + 1, len(lines)))
    con = next(i for i, l in enumerate(lines) if l.startswith("CON "))
    m_total = int(lines[con].split()[1])
    out = []
    if kind == "multiplier":
        for li in entries:
            tok = lines[li].split()
            k = tok.index("{")
            if tok[k + 1] in ("lin", "rnd") and int(tok[k + 2]) > 0:
                t = tok[:]
                p = k + 4 + 2 * int(rng.integers(0, int(tok[k + 2])))
                t[p] = _fmt(_frac(t[p]) + Fraction(1, 10 ** 6))
                out.append(_replace(lines, li, " ".join(t)))
    elif kind == "sense":
        for li in entries + list(range(con + 1, con + 1 + m_total)):
            tok = lines[li].split()
            if int(tok[2]) == 0:
                continue              # flipping an empty row can keep it a contradiction
            t = tok[:]
            t[0] = {"G": "L", "L": "G", "E": "G"}[t[0]]
            out.append(_replace(lines, li, " ".join(t)))
    elif kind == "rhs":
        # strengthen a derived inequality with variables, or change a model row
        for li in entries:
            tok = lines[li].split()
            if int(tok[2]) == 0:
                continue              # a contradiction implies every strengthening
            t = tok[:]
            delta = Fraction(1) if t[0] == "G" else Fraction(-1)
            t[1] = _fmt(_frac(t[1]) + delta)
            out.append(_replace(lines, li, " ".join(t)))
        for li in range(con + 1, con + 1 + m_total):
            t = lines[li].split()
            t[1] = _fmt(_frac(t[1]) + 1)
            out.append(_replace(lines, li, " ".join(t)))
    elif kind == "drop":
        for li in entries:
            new = lines[:li] + lines[li + 1:]
            new[der] = f"DER {len(entries) - 1}"
            out.append("\n".join(new) + "\n")
    elif kind == "reorder":
        # move an entry in front of an entry it depends on
        for pos, li in enumerate(entries):
            idx = m_total + pos
            tok = lines[li].split()
            k = tok.index("{")
            refs = _references(tok[k + 1:-1])
            derived_refs = [r for r in refs if r >= m_total]
            if not derived_refs:
                continue
            target = entries[max(derived_refs) - m_total]
            new = lines[:]
            new[target], new[li] = new[li], new[target]
            out.append("\n".join(new) + "\n")
    elif kind == "goal":
        rtp = next(i for i, l in enumerate(lines) if l.startswith("RTP "))
        tok = lines[rtp].split()
        if tok[1] == "infeas":
            out.append(_replace(lines, rtp, "RTP range 0 0"))
        else:
            lo, up = _frac(tok[2]), _frac(tok[3])
            out.append(_replace(lines, rtp, f"RTP range {_fmt(lo + 1)} {_fmt(up + 1)}"))
            out.append(_replace(lines, rtp, f"RTP range {_fmt(lo - 1)} {_fmt(up - 1)}"))
            out.append(_replace(lines, rtp, "RTP infeas"))
    else:
        raise ValueError(kind)
    return out


def _references(reason):
    kind = reason[0]
    if kind == "asm":
        return []
    if kind in ("lin", "rnd"):
        k = int(reason[1])
        return [int(reason[2 + 2 * i]) for i in range(k)]
    return [int(v) for v in reason[1:5]]


def _replace(lines, li, new):
    out = lines[:]
    out[li] = new
    return "\n".join(out) + "\n"
