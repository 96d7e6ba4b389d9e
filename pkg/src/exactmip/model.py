"""Exact MIP data, its floating-point shadow copy, MPS input/output and
solution files.

The exact model is ``min c.x + offset`` subject to rows ``a_i.x (>=|<=|=) b_i``,
``lower <= x <= upper`` and integrality of the columns in ``integers``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .numerics import (INF, ExtQ, ParseError, float_up, format_rational, is_finite,
                       nearest_float, parse_rational)

SENSES = ("G", "L", "E")

Row = tuple  # tuple[tuple[int, Fraction], ...], sorted by column


@dataclass(frozen=True)
class RationalMIP:
    """Exact problem data, normalized to minimization."""

    name: str
    rows: tuple            # tuple[Row, ...]
    senses: tuple          # per row, one of "G", "L", "E"
    rhs: tuple             # tuple[Fraction, ...]
    obj: tuple             # tuple[Fraction, ...]
    lower: tuple           # tuple[ExtQ, ...]
    upper: tuple
    integers: frozenset
    col_names: tuple
    row_names: tuple
    offset: Fraction = Fraction(0)
    maximize: bool = False
    obj_name: str = "obj"

    def __post_init__(self):
        n, m = len(self.obj), len(self.rows)
        if not (len(self.lower) == len(self.upper) == len(self.col_names) == n):
            raise ValueError("column data lengths differ")
        if not (len(self.senses) == len(self.rhs) == len(self.row_names) == m):
            raise ValueError("row data lengths differ")
        for row in self.rows:
            prev = -1
            for j, a in row:
                if a == 0 or j <= prev or j >= n:
                    raise ValueError(f"malformed sparse row {row!r}")
                prev = j
        for s in self.senses:
            if s not in SENSES:
                raise ValueError(f"unknown row sense {s!r}")

    @property
    def n(self) -> int:
        return len(self.obj)

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def trivially_infeasible(self) -> bool:
        return any(lo > up for lo, up in zip(self.lower, self.upper))

    @property
    def continuous_fraction(self) -> Fraction:
        if self.n == 0:
            return Fraction(0)
        return Fraction(self.n - len(self.integers), self.n)

    def objective(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * xj for c, xj in zip(self.obj, x) if c), self.offset)

    def activity(self, i: int, x: Sequence[Fraction]) -> Fraction:
        return sum((a * x[j] for j, a in self.rows[i]), Fraction(0))

    def columns(self) -> list:
        """Column-major view: ``cols[j]`` is a list of ``(row, coef)``."""
        cols = [[] for _ in range(self.n)]
        for i, row in enumerate(self.rows):
            for j, a in row:
                cols[j].append((i, a))
        return cols

    def dense(self) -> list:
        A = [[Fraction(0)] * self.n for _ in range(self.m)]
        for i, row in enumerate(self.rows):
            for j, a in row:
                A[i][j] = a
        return A

    def with_bounds(self, lower: Sequence[ExtQ], upper: Sequence[ExtQ]) -> "RationalMIP":
        return replace(self, lower=tuple(lower), upper=tuple(upper))

    def objective_is_integral(self) -> bool:
        """True when c.x is an integer for every integer-feasible x."""
        for j, c in enumerate(self.obj):
            if c == 0:
                continue
            if j not in self.integers or c.denominator != 1:
                return False
        return True


def build_model(A: Sequence[Sequence], senses: Sequence[str], rhs: Sequence, obj: Sequence,
                lower: Optional[Sequence] = None, upper: Optional[Sequence] = None,
                integers: Iterable[int] = (), name: str = "model",
                col_names: Optional[Sequence[str]] = None, row_names: Optional[Sequence[str]] = None,
                offset=0, maximize: bool = False) -> RationalMIP:
    """Convenience constructor from dense data; numbers may be ints, strings
    (``"1/3"``, ``"0.1"``) or Fractions.  ``maximize`` negates the objective."""

    def conv(v) -> ExtQ:
        if isinstance(v, str):
            return parse_rational(v)
        if isinstance(v, float):
            return v if math.isinf(v) else Fraction(v)
        return Fraction(v)

    n = len(obj)
    rows = []
    for r in A:
        if len(r) != n:
            raise ValueError("row length differs from objective length")
        rows.append(tuple((j, conv(a)) for j, a in enumerate(r) if conv(a) != 0))
    c = [conv(v) for v in obj]
    off = conv(offset)
    if maximize:
        c = [-v for v in c]
        off = -off
    lower = [Fraction(0)] * n if lower is None else [conv(v) for v in lower]
    upper = [INF] * n if upper is None else [conv(v) for v in upper]
    return RationalMIP(
        name=name, rows=tuple(rows), senses=tuple(senses), rhs=tuple(conv(v) for v in rhs),
        obj=tuple(c), lower=tuple(lower), upper=tuple(upper), integers=frozenset(integers),
        col_names=tuple(col_names or (f"x{j}" for j in range(n))),
        row_names=tuple(row_names or (f"c{i}" for i in range(len(rows)))),
        offset=off, maximize=maximize)


# ---------------------------------------------------------------------------
# floating-point shadow copy

@dataclass
class FloatMIP:
    """Componentwise nearest binary64 copy of a :class:`RationalMIP`.

    ``delta_A`` holds upward-rounded bounds on ``|A_bar - A|``; ``overflow``
    lists ``(kind, index)`` of entries that saturated to infinity.
    """

    A: np.ndarray
    rhs: np.ndarray
    obj: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    senses: tuple
    delta_A: np.ndarray
    overflow: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def approximate(model: RationalMIP) -> FloatMIP:
    """Build the floating-point shadow copy of ``model``."""
    m, n = model.m, model.n
    A = np.zeros((m, n))
    dA = np.zeros((m, n))
    overflow = []
    for i, row in enumerate(model.rows):
        for j, a in row:
            f = nearest_float(a)
            if math.isinf(f):
                overflow.append(("A", (i, j)))
                dA[i, j] = INF
            else:
                dA[i, j] = float_up(abs(Fraction(f) - a))
            A[i, j] = f

    def vec(values, kind):
        out = np.empty(len(values))
        for k, v in enumerate(values):
            out[k] = nearest_float(v)
            if is_finite(v) and math.isinf(out[k]):
                overflow.append((kind, k))
        return out

    return FloatMIP(A=A, rhs=vec(model.rhs, "rhs"), obj=vec(model.obj, "obj"),
                    lower=vec(model.lower, "lower"), upper=vec(model.upper, "upper"),
                    senses=model.senses, delta_A=dA, overflow=overflow)


# ---------------------------------------------------------------------------
# solutions

@dataclass(frozen=True)
class Solution:
    x: tuple                 # exact values
    objective: Fraction
    origin: str = "file"     # heuristic-repair | lp-integral | oracle | file

    @property
    def x_bar(self) -> np.ndarray:
        return np.array([nearest_float(v) for v in self.x])

    @classmethod
    def of(cls, model: RationalMIP, x: Sequence[Fraction], origin: str) -> "Solution":
        x = tuple(Fraction(v) for v in x)
        return cls(x=x, objective=model.objective(x), origin=origin)


@dataclass(frozen=True)
class Violation:
    kind: str        # "row" | "bound" | "integrality"
    index: int
    value: Fraction

    def __str__(self):
        return f"violated({self.kind} {self.index}, {format_rational(self.value)})"


def check_solution_exact(model: RationalMIP, x: Sequence[Fraction]) -> Optional[Violation]:
    """Return ``None`` if ``x`` is exactly feasible, else the first violation."""
    if len(x) != model.n:
        raise ValueError("solution length differs from column count")
    for j, v in enumerate(x):
        if v < model.lower[j] or v > model.upper[j]:
            return Violation("bound", j, v)
    for j in sorted(model.integers):
        if x[j].denominator != 1:
            return Violation("integrality", j, x[j])
    for i, row in enumerate(model.rows):
        act = sum((a * x[j] for j, a in row), Fraction(0))
        s, b = model.senses[i], model.rhs[i]
        if (s == "G" and act < b) or (s == "L" and act > b) or (s == "E" and act != b):
            return Violation("row", i, act)
    return None


def write_solution(model: RationalMIP, sol: Solution) -> str:
    obj = sol.objective if not model.maximize else -sol.objective
    lines = [f"=obj= {format_rational(obj)}"]
    for name, v in zip(model.col_names, sol.x):
        if v != 0:
            lines.append(f"{name} {format_rational(v)}")
    return "\n".join(lines) + "\n"


def read_solution(model: RationalMIP, text: str) -> Solution:
    index = {name: j for j, name in enumerate(model.col_names)}
    x = [Fraction(0)] * model.n
    for lineno, line in enumerate(text.splitlines(), 1):
        tok = line.split()
        if not tok or tok[0] == "=obj=":
            continue
        if len(tok) != 2 or tok[0] not in index:
            raise ParseError(f"line {lineno}: bad solution entry {line!r}")
        x[index[tok[0]]] = parse_rational(tok[1])
    return Solution.of(model, x, "file")


# ---------------------------------------------------------------------------
# MPS

_SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")


def parse_mps(text: str, maximize: bool = False) -> RationalMIP:
    """Parse the free-form MPS subset (NAME, ROWS, COLUMNS with integer
    markers, RHS, RANGES, BOUNDS, ENDATA).  Numbers are read exactly; ``p/q``
    literals are accepted as well."""
    name = "model"
    section = None
    obj_name = None
    row_index: dict = {}
    row_names: list = []
    senses: list = []
    col_index: dict = {}
    col_names: list = []
    entries: list = []        # per column: dict row -> coef
    obj: dict = {}
    integer_cols: set = set()
    in_int = False
    rhs: dict = {}
    ranges: dict = {}
    lower: dict = {}
    upper: dict = {}
    binary: set = set()
    closed_cols: set = set()
    offset = Fraction(0)
    ended = False

    def num(tok, lineno):
        try:
            v = parse_rational(tok)
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}") from None
        return v

    def row_of(rname, lineno):
        if rname == obj_name:
            return -1
        if rname not in row_index:
            raise ParseError(f"line {lineno}: unknown row {rname!r}")
        return row_index[rname]

    def col_of(cname, lineno):
        if cname not in col_index:
            raise ParseError(f"line {lineno}: unknown column {cname!r}")
        return col_index[cname]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        tok = line.split()
        if not raw[0].isspace():
            head = tok[0].upper()
            if head not in _SECTIONS:
                raise ParseError(f"line {lineno}: unknown section {tok[0]!r}")
            section = head
            if head == "NAME":
                name = tok[1] if len(tok) > 1 else name
            elif head == "ENDATA":
                ended = True
                break
            continue
        if section == "ROWS":
            if len(tok) != 2:
                raise ParseError(f"line {lineno}: bad ROWS entry")
            kind, rname = tok[0].upper(), tok[1]
            if rname in row_index or rname == obj_name:
                raise ParseError(f"line {lineno}: duplicate row {rname!r}")
            if kind == "N":
                if obj_name is None:
                    obj_name = rname
                # further free rows are ignored, but names stay reserved
                else:
                    row_index[rname] = None
                continue
            if kind not in SENSES:
                raise ParseError(f"line {lineno}: unknown row type {kind!r}")
            row_index[rname] = len(row_names)
            row_names.append(rname)
            senses.append(kind)
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1].strip("'").upper() == "MARKER":
                marker = tok[2].strip("'").upper()
                if marker == "INTORG":
                    in_int = True
                elif marker == "INTEND":
                    in_int = False
                else:
                    raise ParseError(f"line {lineno}: unknown marker {tok[2]!r}")
                continue
            if len(tok) not in (3, 5):
                raise ParseError(f"line {lineno}: bad COLUMNS entry")
            cname = tok[0]
            if cname not in col_index:
                if col_names:
                    closed_cols.add(col_names[-1])
                col_index[cname] = len(col_names)
                col_names.append(cname)
                entries.append({})
                if in_int:
                    integer_cols.add(cname)
            elif cname in closed_cols:
                raise ParseError(f"line {lineno}: duplicate column {cname!r}")
            j = col_index[cname]
            for k in range(1, len(tok), 2):
                r = row_of(tok[k], lineno)
                v = num(tok[k + 1], lineno)
                if r is None:
                    continue
                if r == -1:
                    if j in obj:
                        raise ParseError(f"line {lineno}: duplicate objective entry")
                    obj[j] = v
                else:
                    if r in entries[j]:
                        raise ParseError(f"line {lineno}: duplicate entry ({tok[k]}, {cname})")
                    entries[j][r] = v
        elif section in ("RHS", "RANGES"):
            # an optional set name precedes (row, value) pairs
            pairs = tok[1:] if len(tok) % 2 == 1 else tok
            for k in range(0, len(pairs), 2):
                r = row_of(pairs[k], lineno)
                v = num(pairs[k + 1], lineno)
                if r is None:
                    continue
                target = rhs if section == "RHS" else ranges
                if r == -1:
                    if section == "RHS":
                        offset = -v
                    continue
                if r in target:
                    raise ParseError(f"line {lineno}: duplicate {section} entry for {pairs[k]!r}")
                target[r] = v
        elif section == "BOUNDS":
            if len(tok) < 3:
                raise ParseError(f"line {lineno}: bad BOUNDS entry")
            btype = tok[0].upper()
            j = col_of(tok[2], lineno)
            v = num(tok[3], lineno) if len(tok) > 3 else None
            if btype in ("UP", "LO", "FX", "LI", "UI") and v is None:
                raise ParseError(f"line {lineno}: bound value missing")
            if btype == "UP":
                upper[j] = v
            elif btype == "LO":
                lower[j] = v
            elif btype == "FX":
                lower[j] = upper[j] = v
            elif btype == "FR":
                lower[j], upper[j] = -INF, INF
            elif btype == "MI":
                lower[j] = -INF
            elif btype == "PL":
                upper[j] = INF
            elif btype == "BV":
                binary.add(j)
                lower[j], upper[j] = Fraction(0), Fraction(1)
            elif btype == "LI":
                integer_cols.add(col_names[j])
                lower[j] = v
            elif btype == "UI":
                integer_cols.add(col_names[j])
                upper[j] = v
            else:
                raise ParseError(f"line {lineno}: unknown bound type {btype!r}")
        else:
            raise ParseError(f"line {lineno}: data outside of a section")
    if not ended:
        raise ParseError("missing ENDATA")
    if obj_name is None:
        raise ParseError("no objective row")

    n = len(col_names)
    m0 = len(row_names)
    rows = [[] for _ in range(m0)]
    for j, col in enumerate(entries):
        for r, v in col.items():
            if v != 0:
                rows[r].append((j, v))
    out_rows, out_senses, out_rhs, out_names = [], [], [], []
    for i in range(m0):
        row = tuple(sorted(rows[i]))
        b = rhs.get(i, Fraction(0))
        s = senses[i]
        if i in ranges:
            r = ranges[i]
            if s == "E":
                lo_b, hi_b = (b, b + r) if r > 0 else (b + r, b)
                out_rows += [row, row]
                out_senses += ["G", "L"]
                out_rhs += [lo_b, hi_b]
                out_names += [row_names[i], row_names[i] + "_rng"]
                continue
            out_rows += [row, row]
            out_senses += [s, "G" if s == "L" else "L"]
            out_rhs += [b, b - abs(r) if s == "L" else b + abs(r)]
            out_names += [row_names[i], row_names[i] + "_rng"]
        else:
            out_rows.append(row)
            out_senses.append(s)
            out_rhs.append(b)
            out_names.append(row_names[i])

    c = [obj.get(j, Fraction(0)) for j in range(n)]
    if maximize:
        c = [-v for v in c]
        offset = -offset
    integers = frozenset(col_index[cn] for cn in integer_cols) | frozenset(binary)
    lo = tuple(lower.get(j, Fraction(0)) for j in range(n))
    up = tuple(upper.get(j, INF) for j in range(n))
    return RationalMIP(name=name, rows=tuple(out_rows), senses=tuple(out_senses), rhs=tuple(out_rhs),
                       obj=tuple(c), lower=lo, upper=up, integers=integers,
                       col_names=tuple(col_names), row_names=tuple(out_names),
                       offset=offset, maximize=maximize, obj_name=obj_name)


def _fmt_mps(q: Fraction) -> str:
    # exact decimal when the denominator is 2^a 5^b, else p/q
    d = q.denominator
    k = 0
    while d % 2 == 0:
        d //= 2
        k += 1
    k5 = 0
    while d % 5 == 0:
        d //= 5
        k5 += 1
    if d != 1:
        return format_rational(q)
    digits = max(k, k5)
    if digits == 0:
        return str(q.numerator)
    scaled = q * 10 ** digits
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def write_mps(model: RationalMIP) -> str:
    """Write ``model`` in the MPS subset understood by :func:`parse_mps`.

    The objective is written in minimization form; pass ``maximize=True`` to
    :func:`parse_mps` to read back a maximization model.
    """
    sign = -1 if model.maximize else 1
    out = [f"NAME {model.name}", "ROWS", f" N {model.obj_name}"]
    for s, rn in zip(model.senses, model.row_names):
        out.append(f" {s} {rn}")
    out.append("COLUMNS")
    cols = model.columns()
    in_int = False
    for j in range(model.n):
        is_int = j in model.integers
        if is_int != in_int:
            out.append(f" MARKER 'MARKER' '{'INTORG' if is_int else 'INTEND'}'")
            in_int = is_int
        cn = model.col_names[j]
        c = model.obj[j] * sign
        wrote = False
        if c != 0:
            out.append(f" {cn} {model.obj_name} {_fmt_mps(c)}")
            wrote = True
        for i, a in cols[j]:
            out.append(f" {cn} {model.row_names[i]} {_fmt_mps(a)}")
            wrote = True
        if not wrote:
            out.append(f" {cn} {model.obj_name} 0")
    if in_int:
        out.append(" MARKER 'MARKER' 'INTEND'")
    out.append("RHS")
    if model.offset != 0:
        out.append(f" RHS {model.obj_name} {_fmt_mps(-model.offset * sign)}")
    for i, b in enumerate(model.rhs):
        if b != 0:
            out.append(f" RHS {model.row_names[i]} {_fmt_mps(b)}")
    out.append("BOUNDS")
    for j in range(model.n):
        cn = model.col_names[j]
        lo, up = model.lower[j], model.upper[j]
        if not is_finite(lo) and not is_finite(up):
            out.append(f" FR BND {cn}")
            continue
        if lo == up:
            out.append(f" FX BND {cn} {_fmt_mps(lo)}")
            continue
        if not is_finite(lo):
            out.append(f" MI BND {cn}")
        elif lo != 0:
            out.append(f" LO BND {cn} {_fmt_mps(lo)}")
        if is_finite(up):
            out.append(f" UP BND {cn} {_fmt_mps(up)}")
        elif j in model.integers:
            out.append(f" PL BND {cn}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
