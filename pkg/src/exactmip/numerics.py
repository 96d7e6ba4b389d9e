"""Exact rationals, float conversion, outward-rounded intervals and
running-error dot products.

Rationals are :class:`fractions.Fraction` (always stored in lowest terms with a
positive denominator).  Extended rationals are a ``Fraction`` or one of the
float infinities ``INF`` / ``-INF``; never do arithmetic that mixes a finite
``Fraction`` with a float, since Python silently converts the result to float.
"""

from __future__ import annotations

import math
import sys
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

Q = Fraction
INF = math.inf
ExtQ = Union[Fraction, float]

#: unit roundoff of binary64
UNIT_ROUNDOFF = 2.0 ** -53

_DECIMAL_RE = re.compile(r"^([+-]?)(\d+)(?:\.(\d*))?(?:[eE]([+-]?\d+))?$|^([+-]?)\.(\d+)(?:[eE]([+-]?\d+))?$")


class ParseError(ValueError):
    """Malformed numeric literal or input file."""


def rational_of_decimal(text: str) -> Fraction:
    """Convert a decimal literal such as ``"-2.5e-2"`` to the exact rational it denotes."""
    m = _DECIMAL_RE.match(text.strip())
    if m is None:
        raise ParseError(f"malformed decimal literal {text!r}")
    if m.group(2) is not None:
        sign, whole, frac, exp = m.group(1), m.group(2), m.group(3) or "", m.group(4)
    else:
        sign, whole, frac, exp = m.group(5), "0", m.group(6), m.group(7)
    digits = int(whole + frac)
    scale = int(exp or 0) - len(frac)
    value = Fraction(digits * 10 ** scale) if scale >= 0 else Fraction(digits, 10 ** -scale)
    return -value if sign == "-" else value


def parse_rational(text: str) -> ExtQ:
    """Parse ``p/q``, a decimal literal, or ``inf``/``-inf``."""
    t = text.strip()
    low = t.lower()
    if low in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    if low in ("-inf", "-infinity"):
        return -INF
    if "/" in t:
        p, _, q = t.partition("/")
        try:
            num, den = int(p), int(q)
        except ValueError:
            raise ParseError(f"malformed rational literal {text!r}") from None
        if den == 0:
            raise ParseError(f"zero denominator in {text!r}")
        return Fraction(num, den)
    return rational_of_decimal(t)


def format_rational(q: ExtQ) -> str:
    """``p/q`` form, or a bare integer when the denominator is one."""
    if isinstance(q, float):
        if q == INF:
            return "inf"
        if q == -INF:
            return "-inf"
        q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def is_finite(v: ExtQ) -> bool:
    return not (isinstance(v, float) and math.isinf(v))


def ext_add(a: ExtQ, b: ExtQ) -> ExtQ:
    """Sum of two extended rationals; ``inf + -inf`` raises."""
    fa, fb = is_finite(a), is_finite(b)
    if fa and fb:
        return a + b
    if not fa and not fb and a != b:
        raise ArithmeticError("inf - inf is undefined")
    return a if not fa else b


def ext_mul(q: Fraction, v: ExtQ) -> ExtQ:
    """Product of a finite rational and an extended rational (0 * inf = 0)."""
    if is_finite(v):
        return q * v
    if q == 0:
        return Fraction(0)
    return v if q > 0 else -v


def nearest_float(q: ExtQ) -> float:
    """Nearest binary64 value (ties to even).  Overflow saturates to +-inf;
    callers detect it with :func:`math.isinf` on a finite input."""
    if isinstance(q, float):
        return q
    try:
        # int / int true division is correctly rounded
        return q.numerator / q.denominator
    except OverflowError:
        return INF if q > 0 else -INF


def float_down(q: ExtQ) -> float:
    """Largest binary64 value <= q."""
    f = nearest_float(q)
    if isinstance(q, Fraction) and math.isfinite(f) and Fraction(f) > q:
        f = math.nextafter(f, -INF)
    elif isinstance(q, Fraction) and f == INF:
        f = math.nextafter(INF, 0.0)
    return f


def float_up(q: ExtQ) -> float:
    """Smallest binary64 value >= q."""
    f = nearest_float(q)
    if isinstance(q, Fraction) and math.isfinite(f) and Fraction(f) < q:
        f = math.nextafter(f, INF)
    elif isinstance(q, Fraction) and f == -INF:
        f = math.nextafter(-INF, 0.0)
    return f


def _down(x: float) -> float:
    return math.nextafter(x, -INF) if x != -INF else x


def _up(x: float) -> float:
    return math.nextafter(x, INF) if x != INF else x


_SPLITTER = 134217729.0  # 2^27 + 1
_SPLIT_LIMIT = 2.0 ** 996
_MAX_FLOAT = sys.float_info.max


def _sum_error(a: float, b: float, s: float) -> float:
    """Rounding error ``(a + b) - s`` of ``s = fl(a + b)`` (Knuth's TwoSum)."""
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _product_error(a: float, b: float, p: float) -> float:
    """Rounding error ``a*b - p`` of ``p = fl(a*b)`` (Dekker's product)."""
    ah, al = _split(a)
    bh, bl = _split(b)
    return al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _round_out(lo: float, hi: float, err_lo: float, err_hi: float) -> tuple:
    if err_lo < 0 or err_lo != err_lo:
        lo = _down(lo)
    if err_hi > 0 or err_hi != err_hi:
        hi = _up(hi)
    return lo, hi


def _outer_lo(x: float) -> float:
    # an overflow to +inf still means "above the largest finite float"
    if x == INF:
        return _MAX_FLOAT
    return _down(x) if math.isfinite(x) else x


def _outer_hi(x: float) -> float:
    if x == -INF:
        return -_MAX_FLOAT
    return _up(x) if math.isfinite(x) else x


def _worst(errors, pick):
    return math.nan if any(math.isnan(e) for e in errors) else pick(errors)


@dataclass(frozen=True)
class FloatInterval:
    """Closed interval of binary64 values with outward-rounded arithmetic.

    An end point moves one ulp outward only when its floating-point operation
    was inexact; exactness is detected with error-free transforms (TwoSum and
    Dekker's product), so exact operations keep point intervals tight.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: float) -> "FloatInterval":
        return cls(x, x)

    @classmethod
    def of_rational(cls, q: ExtQ) -> "FloatInterval":
        return cls(float_down(q), float_up(q))

    def __add__(self, other: "FloatInterval") -> "FloatInterval":
        lo, hi = self.lo + other.lo, self.hi + other.hi
        if not (math.isfinite(lo) and math.isfinite(hi)):
            return FloatInterval(_outer_lo(lo), _outer_hi(hi))
        return FloatInterval(*_round_out(lo, hi, _sum_error(self.lo, other.lo, lo),
                                         _sum_error(self.hi, other.hi, hi)))

    def __neg__(self) -> "FloatInterval":
        return FloatInterval(-self.hi, -self.lo)

    def __sub__(self, other: "FloatInterval") -> "FloatInterval":
        return self + (-other)

    def __mul__(self, other: "FloatInterval") -> "FloatInterval":
        prods = []
        for a in (self.lo, self.hi):
            for b in (other.lo, other.hi):
                # 0 * inf is taken as 0: interval ends are finite-or-inf bounds, not values
                if a == 0.0 or b == 0.0:
                    prods.append((0.0, 0.0))
                    continue
                p = a * b
                exact = (math.isfinite(p) and abs(a) < _SPLIT_LIMIT and abs(b) < _SPLIT_LIMIT
                         and abs(p) > 2.0 ** -969)
                prods.append((p, _product_error(a, b, p) if exact else math.nan))
        lo = min(p for p, _ in prods)
        hi = max(p for p, _ in prods)
        # among tied end points keep the error that pushes outward (nan forces rounding)
        err_lo = _worst([e for p, e in prods if p == lo], min)
        err_hi = _worst([e for p, e in prods if p == hi], max)
        if not math.isfinite(lo) or not math.isfinite(hi):
            return FloatInterval(_outer_lo(lo), _outer_hi(hi))
        return FloatInterval(*_round_out(lo, hi, err_lo, err_hi))

    def contains(self, q: ExtQ) -> bool:
        if not is_finite(q):
            return (q == INF and self.hi == INF) or (q == -INF and self.lo == -INF)
        return (self.lo == -INF or Fraction(self.lo) <= q) and (self.hi == INF or q <= Fraction(self.hi))

    @property
    def is_zero(self) -> bool:
        return self.lo == 0.0 and self.hi == 0.0


def running_error_dot(a_bar: Sequence[float], x_bar: Sequence[float],
                      delta_a: Sequence[float], delta_x: Sequence[float]) -> tuple[float, float]:
    """Float dot product ``s`` of ``a_bar`` and ``x_bar`` with an error bound ``mu``.

    ``mu`` bounds ``|s - a.x|`` for every exact ``a``, ``x`` with
    ``|a - a_bar| <= delta_a`` and ``|x - x_bar| <= delta_x`` componentwise.
    Rounding errors of the products and partial sums are each at most
    ``u`` times the computed value; their magnitudes are accumulated with
    upward rounding.
    """
    n = len(a_bar)
    if not (len(x_bar) == len(delta_a) == len(delta_x) == n):
        raise ValueError("running_error_dot: vector lengths differ")
    u = UNIT_ROUNDOFF
    s = 0.0
    e = 0.0
    corr = 0.0
    for i in range(n):
        ai, xi, dai, dxi = a_bar[i], x_bar[i], delta_a[i], delta_x[i]
        if not (math.isfinite(ai) and math.isfinite(xi) and math.isfinite(dai) and math.isfinite(dxi)):
            raise ValueError("running_error_dot: non-finite input")
        p = ai * xi
        s = s + p
        e = _up(e + _up(abs(p) + abs(s))) if (p != 0.0 or s != 0.0) else e
        if dai != 0.0 or dxi != 0.0:
            t1 = _up(_up(abs(ai) + dai) * dxi) if dxi != 0.0 else 0.0
            t2 = _up(dai * abs(xi)) if dai != 0.0 and xi != 0.0 else 0.0
            corr = _up(corr + _up(t1 + t2))
    if not math.isfinite(s):
        return s, INF
    mu = _up(_up(u * e) * (1.0 + 4.0 * u)) if e != 0.0 else 0.0
    if e != 0.0:
        # gradual underflow: each of the 2n operations may lose up to 2^-1075 absolutely
        mu = _up(mu + 2 * n * 2.0 ** -1074)
    mu = _up(mu + corr) if corr != 0.0 else mu
    return s, mu


def exact_dot(a: Sequence[Fraction], x: Sequence[Fraction]) -> Fraction:
    return sum((ai * xi for ai, xi in zip(a, x)), Fraction(0))
