"""Tree-less branch-and-bound certificates: writer and independent checker.

File layout (whitespace separated tokens, one section keyword per line)::

    VER 1
    VAR n            followed by n column names
    INT k            followed by k column indices
    OBJ min          followed by nnz (idx coef)*
    CON m            followed by m lines: sense rhs nnz (idx coef)*
    RTP infeas | RTP range L U
    SOL s            followed by s lines: nnz (idx value)*
    DER d            followed by d lines:
                     sense rhs nnz (idx coef)* { asm | lin t (idx mult)* | rnd t (idx mult)* | uns i1 a1 i2 a2 }

The constraint section holds the model rows followed by one constraint per
finite bound (``x_j >= l_j`` then ``-x_j >= -u_j``).  Derivations are numbered
after the constraints.  Objective values in ``RTP`` refer to ``c.x`` without
the model's constant offset.

The checker below only relies on exact rationals and the model parser; it
never calls an LP solver or the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import RationalMIP
from .numerics import ParseError, format_rational, is_finite, parse_rational


class CertificateParseError(ParseError):
    pass


# ---------------------------------------------------------------------------
# writing

def bound_constraints(model: RationalMIP) -> tuple:
    """Constraint list of the certificate plus index maps of the bound rows."""
    cons = []
    for i, row in enumerate(model.rows):
        cons.append((model.senses[i], model.rhs[i], tuple(row)))
    lower_idx, upper_idx = {}, {}
    for j in range(model.n):
        if is_finite(model.lower[j]):
            lower_idx[j] = len(cons)
            cons.append(("G", model.lower[j], ((j, Fraction(1)),)))
        if is_finite(model.upper[j]):
            upper_idx[j] = len(cons)
            cons.append(("G", -model.upper[j], ((j, Fraction(-1)),)))
    return cons, lower_idx, upper_idx


def _fmt_ineq(sense, rhs, coefs) -> str:
    parts = [sense, format_rational(rhs), str(len(coefs))]
    for j, a in coefs:
        parts += [str(j), format_rational(a)]
    return " ".join(parts)


def _fmt_refs(pairs) -> str:
    return " ".join([str(len(pairs))] + [f"{i} {format_rational(q)}" for i, q in pairs])


class _Emitter:
    def __init__(self, model: RationalMIP, records: dict):
        self.model = model
        self.records = records
        self.cons, self.lower_idx, self.upper_idx = bound_constraints(model)
        self.ders: list = []          # (sense, rhs, coefs, reason_text)
        self.obj = tuple((j, c) for j, c in enumerate(model.obj) if c != 0)
        self.rounding = bool(model.integers) and model.objective_is_integral()
        self.conclusions: dict = {}   # derivation index -> (coefs, rhs)

    def add(self, coefs, rhs, reason) -> int:
        idx = len(self.cons) + len(self.ders)
        self.ders.append(("G", rhs, tuple(coefs), reason))
        self.conclusions[idx] = (tuple(coefs), rhs)
        return idx

    def leaf(self, rec, lsrc, usrc) -> int:
        m = self.model
        if rec.proof is None:
            rec.proof = _rederive(m, rec)
        kind, data = rec.proof
        for j in range(m.n):
            if lsrc[j][0] != rec.lower[j] or usrc[j][0] != rec.upper[j]:
                raise AssertionError("bound sources out of sync with node bounds")
        if kind == "conflict":
            j = data
            refs = [(lsrc[j][1], Fraction(1)), (usrc[j][1], Fraction(1))]
            return self.add((), rec.lower[j] - rec.upper[j], "lin " + _fmt_refs(refs))
        y = data
        farkas = kind == "farkas"
        r = [Fraction(0)] * m.n if farkas else list(m.obj)
        rhs = Fraction(0)
        refs = []
        for i, row in enumerate(m.rows):
            if y[i]:
                refs.append((i, y[i]))
                rhs += y[i] * m.rhs[i]
                for j, a in row:
                    r[j] -= a * y[i]
        for j, rj in enumerate(r):
            if rj > 0:
                refs.append((lsrc[j][1], rj))
                rhs += rj * lsrc[j][0]
            elif rj < 0:
                refs.append((usrc[j][1], -rj))
                rhs += rj * usrc[j][0]
        refs.sort()
        if farkas:
            return self.add((), rhs, "lin " + _fmt_refs(refs))
        if self.rounding and rhs.denominator != 1:
            return self.add(self.obj, Fraction(math.ceil(rhs)), "rnd " + _fmt_refs(refs))
        return self.add(self.obj, rhs, "lin " + _fmt_refs(refs))

    def node(self, nid, lsrc, usrc) -> int:
        rec = self.records[nid]
        if rec.branch is None or not rec.children:
            return self.leaf(rec, lsrc, usrc)
        j, k = rec.branch
        left, right = rec.children
        a1 = self.add(((j, Fraction(-1)),), -k, "asm")
        u2 = list(usrc)
        if k < u2[j][0]:
            u2[j] = (k, a1)
        i1 = self.node(left, lsrc, u2)
        a2 = self.add(((j, Fraction(1)),), k + 1, "asm")
        l2 = list(lsrc)
        if k + 1 > l2[j][0]:
            l2[j] = (k + 1, a2)
        i2 = self.node(right, l2, usrc)
        c1, r1 = self.conclusions[i1]
        c2, r2 = self.conclusions[i2]
        if not c1 and not c2:
            coefs, rhs = (), min(r1, r2)
        elif not c1:
            coefs, rhs = c2, r2
        elif not c2:
            coefs, rhs = c1, r1
        else:
            coefs, rhs = c1, min(r1, r2)
        return self.add(coefs, rhs, f"uns {i1} {a1} {i2} {a2}")


def _rederive(model, rec):
    """Multipliers for a leaf whose bound came without them."""
    from .bounding import exact_lp_bound  # emission only; the checker never gets here

    res = exact_lp_bound(model, rec.lower, rec.upper)
    if res.conflict is not None:
        return ("conflict", res.conflict)
    if res.y is None:
        raise AssertionError(f"node {rec.id} has no bound to certify")
    return ("farkas" if res.farkas else "dual", res.y)


def emit_certificate(model: RationalMIP, records: dict, root: int, incumbent) -> str:
    """Certificate text for a finished search (optimal or infeasible)."""
    em = _Emitter(model, records)
    lsrc = [(model.lower[j], em.lower_idx.get(j)) for j in range(model.n)]
    usrc = [(model.upper[j], em.upper_idx.get(j)) for j in range(model.n)]
    last = em.node(root, lsrc, usrc)
    coefs, rhs = em.conclusions[last]
    lines = ["VER 1", f"VAR {model.n}"]
    lines += list(model.col_names)
    ints = sorted(model.integers)
    lines.append(f"INT {len(ints)}")
    lines.append(" ".join(str(j) for j in ints))
    lines.append("OBJ min")
    lines.append(" ".join([str(len(em.obj))] + [f"{j} {format_rational(c)}" for j, c in em.obj]))
    lines.append(f"CON {len(em.cons)}")
    lines += [_fmt_ineq(s, b, co) for s, b, co in em.cons]
    if incumbent is None:
        if coefs:
            raise AssertionError("infeasibility proof does not end in a contradiction")
        lines.append("RTP infeas")
        lines.append("SOL 0")
    else:
        upper = incumbent.objective - model.offset
        lower = rhs if coefs else upper
        lines.append(f"RTP range {format_rational(lower)} {format_rational(upper)}")
        lines.append("SOL 1")
        nz = [(j, v) for j, v in enumerate(incumbent.x) if v != 0]
        lines.append(_fmt_refs(nz))
    lines.append(f"DER {len(em.ders)}")
    for s, b, co, reason in em.ders:
        lines.append(f"{_fmt_ineq(s, b, co)} {{ {reason} }}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# checking

@dataclass
class CheckReport:
    accepted: bool
    index: Optional[int] = None
    cause: str = ""

    def __bool__(self):
        return self.accepted


class _Reject(Exception):
    def __init__(self, index, cause):
        super().__init__(cause)
        self.index = index
        self.cause = cause


class _Tokens:
    def __init__(self, text: str):
        self.tok = text.split()
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.tok):
            raise CertificateParseError("unexpected end of certificate")
        t = self.tok[self.pos]
        self.pos += 1
        return t

    def expect(self, word: str):
        t = self.next()
        if t != word:
            raise CertificateParseError(f"expected {word!r}, found {t!r}")

    def int(self) -> int:
        t = self.next()
        try:
            return int(t)
        except ValueError:
            raise CertificateParseError(f"expected an integer, found {t!r}") from None

    def count(self) -> int:
        v = self.int()
        if v < 0:
            raise CertificateParseError("negative count")
        return v

    def rational(self) -> Fraction:
        t = self.next()
        try:
            v = parse_rational(t)
        except ParseError as e:
            raise CertificateParseError(str(e)) from None
        if not is_finite(v):
            raise CertificateParseError(f"infinite value {t!r}")
        return v

    def ext_rational(self):
        t = self.next()
        try:
            return parse_rational(t)
        except ParseError as e:
            raise CertificateParseError(str(e)) from None

    def pairs(self, n_max: Optional[int] = None) -> list:
        k = self.count()
        out = []
        for _ in range(k):
            i = self.int()
            if i < 0 or (n_max is not None and i >= n_max):
                raise CertificateParseError(f"index {i} out of range")
            out.append((i, self.rational()))
        return out


def _normalize(sense, rhs, coefs):
    """Return a list of ``(coef dict, rhs)`` inequalities ``a.x >= b``."""
    d = {}
    for j, a in coefs:
        if a != 0:
            d[j] = d.get(j, Fraction(0)) + a
    d = {j: a for j, a in d.items() if a != 0}
    if sense == "G":
        return [(d, rhs)]
    if sense == "L":
        return [({j: -a for j, a in d.items()}, -rhs)]
    return [(d, rhs), ({j: -a for j, a in d.items()}, -rhs)]


def _contradiction(ineq) -> bool:
    coefs, rhs = ineq
    return not coefs and rhs > 0


def _implies(have, want) -> bool:
    """Does ``have`` (a.x >= b) imply ``want`` for every x?"""
    if _contradiction(have):
        return True
    return have[0] == want[0] and have[1] >= want[1]


def _read_ineq(tk: _Tokens, n: int):
    sense = tk.next()
    if sense not in ("G", "L", "E"):
        raise CertificateParseError(f"unknown sense {sense!r}")
    rhs = tk.rational()
    coefs = tk.pairs(n)
    return sense, rhs, coefs


def _asm_bound(ineq, integers):
    """Interpret an assumption as ``(col, 'lower'|'upper', value)`` or None."""
    coefs, rhs = ineq
    if len(coefs) != 1:
        return None
    (j, a), = coefs.items()
    if j not in integers:
        return None
    return (j, "lower", rhs / a) if a > 0 else (j, "upper", rhs / a)


def check_certificate(model: RationalMIP, text: str) -> CheckReport:
    """Verify a certificate against ``model``; raises
    :class:`CertificateParseError` on malformed input."""
    tk = _Tokens(text)
    try:
        return _check(model, tk)
    except _Reject as r:
        return CheckReport(False, r.index, r.cause)


def _check(model: RationalMIP, tk: _Tokens) -> CheckReport:
    n = model.n
    tk.expect("VER")
    if tk.next() != "1":
        raise CertificateParseError("unsupported version")
    tk.expect("VAR")
    if tk.count() != n:
        raise _Reject(None, "variable count differs from the model")
    names = [tk.next() for _ in range(n)]
    if tuple(names) != tuple(model.col_names):
        raise _Reject(None, "variable names differ from the model")
    tk.expect("INT")
    k = tk.count()
    ints = set()
    for _ in range(k):
        j = tk.int()
        if not 0 <= j < n:
            raise CertificateParseError("integer index out of range")
        ints.add(j)
    if ints != set(model.integers):
        raise _Reject(None, "integer set differs from the model")
    tk.expect("OBJ")
    tk.expect("min")
    obj = {j: a for j, a in tk.pairs(n) if a != 0}
    if obj != {j: c for j, c in enumerate(model.obj) if c != 0}:
        raise _Reject(None, "objective differs from the model")

    tk.expect("CON")
    m_total = tk.count()
    expected = []
    for i, row in enumerate(model.rows):
        expected.append((model.senses[i], model.rhs[i], {j: a for j, a in row}))
    for j in range(n):
        if is_finite(model.lower[j]):
            expected.append(("G", model.lower[j], {j: Fraction(1)}))
        if is_finite(model.upper[j]):
            expected.append(("G", -model.upper[j], {j: Fraction(-1)}))
    if m_total != len(expected):
        raise _Reject(None, "constraint count differs from the model")
    senses = []
    ineqs = []          # normalized a.x >= b, per index (E rows keep the first half)
    for idx in range(m_total):
        s, b, coefs = _read_ineq(tk, n)
        cd = {j: a for j, a in coefs if a != 0}
        if (s, b, cd) != expected[idx]:
            raise _Reject(idx, "constraint differs from the model")
        senses.append(s)
        ineqs.append((cd, b) if s != "L" else ({j: -a for j, a in cd.items()}, -b))
    raw = [(s, b, cd) for s, b, cd in expected]

    tk.expect("RTP")
    kind = tk.next()
    if kind == "infeas":
        goal = ("infeas",)
    elif kind == "range":
        goal = ("range", tk.ext_rational(), tk.ext_rational())
    else:
        raise CertificateParseError(f"unknown goal {kind!r}")

    tk.expect("SOL")
    n_sol = tk.count()
    best_sol = math.inf
    for s_idx in range(n_sol):
        x = [Fraction(0)] * n
        for j, v in tk.pairs(n):
            x[j] = v
        for idx, (s, b, cd) in enumerate(raw):
            act = sum((a * x[j] for j, a in cd.items()), Fraction(0))
            if (s == "G" and act < b) or (s == "L" and act > b) or (s == "E" and act != b):
                raise _Reject(None, f"solution {s_idx} violates constraint {idx}")
        if any(x[j].denominator != 1 for j in ints):
            raise _Reject(None, f"solution {s_idx} is not integral")
        val = sum((c * x[j] for j, c in obj.items()), Fraction(0))
        best_sol = val if best_sol == math.inf or val < best_sol else best_sol

    tk.expect("DER")
    d = tk.count()
    asm_sets: list = [frozenset()] * m_total
    is_asm = [False] * m_total
    for k in range(d):
        idx = m_total + k
        s, b, coefs = _read_ineq(tk, n)
        norm = _normalize(s, b, coefs)
        tk.expect("{")
        reason = tk.next()
        if reason == "asm":
            if s == "E":
                raise _Reject(idx, "assumptions must be inequalities")
            assumptions = frozenset([idx])
            asm_flag = True
        elif reason in ("lin", "rnd"):
            refs = tk.pairs()
            comb: dict = {}
            rhs = Fraction(0)
            assumptions = frozenset()
            for i, mult in refs:
                if i >= idx:
                    raise _Reject(idx, f"reference {i} is not earlier")
                si = senses[i]
                if (si == "G" and mult < 0) or (si == "L" and mult > 0):
                    raise _Reject(idx, f"multiplier sign incompatible with constraint {i}")
                # combine the constraint as written (a.x sense b) with its multiplier
                cd, bi = raw[i][2], raw[i][1]
                for j, a in cd.items():
                    comb[j] = comb.get(j, Fraction(0)) + mult * a
                rhs += mult * bi
                assumptions |= asm_sets[i]
            comb = {j: a for j, a in comb.items() if a != 0}
            if reason == "rnd":
                for j, a in comb.items():
                    if j not in ints or a.denominator != 1:
                        raise _Reject(idx, "rounding involves a continuous variable or fractional coefficient")
                rhs = Fraction(math.ceil(rhs))
            have = (comb, rhs)
            for want in norm:
                if not _implies(have, want):
                    raise _Reject(idx, "combination does not yield the stated inequality")
            asm_flag = False
        elif reason == "uns":
            i1, a1, i2, a2 = tk.int(), tk.int(), tk.int(), tk.int()
            for i in (i1, a1, i2, a2):
                if not 0 <= i < idx:
                    raise _Reject(idx, f"reference {i} is not earlier")
            if not (is_asm[a1] and is_asm[a2]):
                raise _Reject(idx, "unsplitting needs two assumptions")
            b1 = _asm_bound(ineqs[a1], ints)
            b2 = _asm_bound(ineqs[a2], ints)
            if b1 is None or b2 is None or b1[0] != b2[0] or b1[1] == b2[1]:
                raise _Reject(idx, "assumptions are not a split on one integer variable")
            up = b1[2] if b1[1] == "upper" else b2[2]
            lo = b1[2] if b1[1] == "lower" else b2[2]
            if math.floor(up) + 1 < math.ceil(lo):
                raise _Reject(idx, "assumptions do not cover all integer values")
            for i in (i1, i2):
                for want in norm:
                    if not _implies(ineqs[i], want):
                        raise _Reject(idx, f"entry {i} does not imply the unsplit inequality")
            assumptions = (asm_sets[i1] - {a1}) | (asm_sets[i2] - {a2})
            asm_flag = False
        else:
            raise CertificateParseError(f"unknown reason {reason!r}")
        tk.expect("}")
        senses.append("G" if s != "L" else "L")
        ineqs.append(norm[0])
        raw.append(("G", norm[0][1], norm[0][0]) if s != "E" else (s, b, norm[0][0]))
        if s == "E":
            raise _Reject(idx, "derived equations are not supported")
        asm_sets.append(assumptions)
        is_asm.append(asm_flag)

    if tk.pos != len(tk.tok):
        raise CertificateParseError("trailing tokens after the derivations")
    if d == 0:
        raise _Reject(None, "no derivations")
    last = m_total + d - 1
    if asm_sets[last]:
        raise _Reject(last, "final entry still depends on assumptions")
    final = ineqs[last]
    if goal[0] == "infeas":
        if n_sol:
            raise _Reject(None, "infeasibility claimed but a solution is listed")
        if not _contradiction(final):
            raise _Reject(last, "final entry is not a contradiction")
    else:
        _, lower, upper = goal
        if is_finite(lower) and not _implies(final, (obj, lower)):
            raise _Reject(last, "final entry does not prove the lower bound")
        if is_finite(upper):
            if best_sol == math.inf or best_sol > upper:
                raise _Reject(None, "no listed solution attains the upper bound")
        if is_finite(lower) and is_finite(upper) and lower > upper:
            raise _Reject(None, "goal range is empty")
    return CheckReport(True)
