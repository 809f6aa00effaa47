"""Exact arithmetic primitives.

Probabilities are plain :class:`fractions.Fraction` values (aliased as
``Ratio``); Python integers are unbounded, so every probability mass, interval
endpoint and threshold in the library is exact.  Two small value types sit on
top of that:

* :class:`UnitInterval` -- a half-open subinterval ``[lo, hi)`` of ``[0, 1)``.
* :class:`DyadicExp` -- a number ``2**(-r)`` with rational ``r >= 0``; used for
  the non-stationary Bernoulli coins whose bias is ``2**(-1/i)``.

Irrational quantities that only ever get *reported* (entropy rates, logs) are
carried as :class:`Real`, a float with an absolute error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Ratio = Fraction

ONE = Fraction(1)
ZERO = Fraction(0)


def ratio(x) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are rejected: a float here almost always means an inexact
    probability slipped in.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_ratio(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact ratio")


def parse_ratio(text: str) -> Fraction:
    s = text.strip()
    if not s:
        raise ValueError("empty rational literal")
    num, sep, den = s.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"malformed rational literal {text!r}") from None
    if d == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(n, d)


def format_ratio(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def check_pmf(pmf: Sequence[Fraction], what: str = "pmf") -> tuple[Fraction, ...]:
    out = tuple(ratio(p) for p in pmf)
    if not out:
        raise ValueError(f"{what} is empty")
    for k, p in enumerate(out):
        if p < 0 or p > 1:
            raise ValueError(f"{what}[{k}] = {format_ratio(p)} outside [0, 1]")
    if sum(out) != 1:
        raise ValueError(f"{what} sums to {format_ratio(sum(out))}, not 1")
    return out


# --------------------------------------------------------------------------
# intervals


@dataclass(frozen=True)
class UnitInterval:
    """Half-open interval ``[lo, hi)`` inside ``[0, 1]``."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = ratio(self.lo), ratio(self.hi)
        if not (0 <= lo <= hi <= 1):
            raise ValueError(f"invalid unit interval [{lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def empty(self) -> bool:
        return self.lo == self.hi

    def contains(self, inner: "UnitInterval") -> bool:
        return interval_contains(self, inner)

    def intersects(self, other: "UnitInterval") -> bool:
        return interval_intersects(self, other)

    def split(self, pmf: Sequence[Fraction]) -> list["UnitInterval"]:
        """Partition into consecutive children with lengths ``len * pmf[k]``.

        Child lengths sum to the parent length exactly.
        """
        width = self.hi - self.lo
        out = []
        cum = ZERO
        lo = self.lo
        for p in pmf:
            cum += p
            hi = self.lo + width * cum
            out.append(UnitInterval(lo, hi))
            lo = hi
        return out

    def child(self, k: int, pmf: Sequence[Fraction]) -> "UnitInterval":
        """The ``k``-th child (0-based) of :meth:`split`, without building the rest."""
        width = self.hi - self.lo
        below = sum(pmf[:k], ZERO)
        return UnitInterval(self.lo + width * below, self.lo + width * (below + pmf[k]))

    def __str__(self):
        return f"[{format_ratio(self.lo)}, {format_ratio(self.hi)})"


UNIT = UnitInterval(ZERO, ONE)


def interval_contains(outer: UnitInterval, inner: UnitInterval) -> bool:
    # empty inner: outer.lo <= inner.lo == inner.hi <= outer.hi, same test
    return outer.lo <= inner.lo and inner.hi <= outer.hi


def interval_intersects(a: UnitInterval, b: UnitInterval) -> bool:
    return max(a.lo, b.lo) < min(a.hi, b.hi)


# --------------------------------------------------------------------------
# powers of two with rational exponent


@dataclass(frozen=True)
class DyadicExp:
    """The value ``2**(-exponent)`` for a rational ``exponent >= 0``."""

    exponent: Fraction

    def __post_init__(self):
        e = ratio(self.exponent)
        if e < 0:
            raise ValueError("DyadicExp exponent must be >= 0")
        object.__setattr__(self, "exponent", e)

    def __float__(self):
        return 2.0 ** (-float(self.exponent))

    def __mul__(self, other):
        if isinstance(other, DyadicExp):
            return DyadicExp(self.exponent + other.exponent)
        return NotImplemented

    def compare(self, q: Fraction) -> int:
        return dyadic_cmp(self, q)

    def is_rational(self) -> bool:
        return self.exponent.denominator == 1

    def as_ratio(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return Fraction(1, 2 ** self.exponent.numerator)

    def __str__(self):
        return f"2^-({format_ratio(self.exponent)})"


@dataclass(frozen=True)
class DyadicComplement:
    """The value ``1 - 2**(-base.exponent)``."""

    base: DyadicExp

    def __float__(self):
        return -math.expm1(-float(self.base.exponent) * math.log(2))

    def compare(self, q: Fraction) -> int:
        # sign(1 - v - q) = -sign(v - (1 - q))
        return -dyadic_cmp(self.base, ONE - ratio(q))

    def __str__(self):
        return f"1 - {self.base}"


def parse_dyadic(text: str) -> DyadicExp:
    s = text.strip().replace(" ", "")
    if not s.startswith("2^-"):
        raise ValueError(f"malformed dyadic literal {text!r}")
    body = s[3:]
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    return DyadicExp(parse_ratio(body))


def dyadic_cmp(v: DyadicExp, q: Fraction) -> int:
    """Exact sign of ``2**(-v.exponent) - q``: -1, 0 or +1.

    With ``exponent = p/d`` and ``q = a/b > 0`` the comparison is the same as
    ``2**(-p)`` against ``q**d``, i.e. ``b**d`` against ``2**p * a**d``.
    """
    q = ratio(q)
    if q <= 0:
        return 1
    p, d = v.exponent.numerator, v.exponent.denominator
    a, b = q.numerator, q.denominator
    lhs = b**d
    rhs = (a**d) << p
    return (lhs > rhs) - (lhs < rhs)


def dyadic_leq_ratio(v: DyadicExp, q: Fraction) -> bool:
    q = ratio(q)
    if q <= 0:
        raise ValueError("dyadic_leq_ratio needs q > 0")
    return dyadic_cmp(v, q) <= 0


def dyadic_bracket(v: DyadicExp, bits: int) -> tuple[int, int]:
    """Integers ``(l, u)`` with ``l / 2**bits <= 2**(-exponent) <= u / 2**bits``.

    Cheap exact path for integral exponents; otherwise mpmath at extra
    precision, widened by two units so the bracket stays sound under its
    sub-ulp error.
    """
    e = v.exponent
    if e.denominator == 1:
        k = e.numerator
        if k <= bits:
            x = 1 << (bits - k)
            return x, x
        return 0, 1
    import mpmath

    with mpmath.workprec(bits + 32):
        val = mpmath.power(2, -mpmath.mpf(e.numerator) / e.denominator)
        x = int(mpmath.floor(mpmath.ldexp(val, bits)))
    return max(x - 2, 0), min(x + 3, 1 << bits)


# --------------------------------------------------------------------------
# reported reals


@dataclass(frozen=True)
class Real:
    """A real number known to lie within ``value +/- err``."""

    value: float
    err: float = 0.0

    @property
    def lo(self) -> float:
        return self.value - self.err

    @property
    def hi(self) -> float:
        return self.value + self.err

    def __float__(self):
        return float(self.value)

    def __add__(self, other):
        other = as_real(other)
        return Real(self.value + other.value, self.err + other.err + _ulp(self.value + other.value))

    __radd__ = __add__

    def __mul__(self, other):
        other = as_real(other)
        v = self.value * other.value
        e = abs(self.value) * other.err + abs(other.value) * self.err + self.err * other.err
        return Real(v, e + _ulp(v))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_real(other)
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        v = self.value / other.value
        # |a/b - A/B| <= (|a| eb + |b| ea) / (|b| (|b| - eb))
        b = abs(other.value)
        e = (abs(self.value) * other.err + b * self.err) / (b * (b - other.err))
        return Real(v, e + _ulp(v))

    def close_to(self, other, slack: float = 0.0) -> bool:
        other = as_real(other)
        return abs(self.value - other.value) <= self.err + other.err + slack

    def __str__(self):
        return f"{self.value:.12g} +/- {self.err:.2g}"


def as_real(x) -> Real:
    if isinstance(x, Real):
        return x
    if isinstance(x, Fraction):
        v = float(x)
        return Real(v, _ulp(v))
    if isinstance(x, DyadicExp):
        v = float(x)
        return Real(v, 4 * _ulp(v))
    return Real(float(x), 0.0)


def rmax(xs: Iterable[Real]) -> Real:
    xs = list(xs)
    top = max(xs, key=lambda r: r.value)
    return Real(top.value, max(r.err for r in xs))


def rmin(xs: Iterable[Real]) -> Real:
    xs = list(xs)
    bot = min(xs, key=lambda r: r.value)
    return Real(bot.value, max(r.err for r in xs))


def _ulp(x: float) -> float:
    return math.ulp(x) if x else 0.0


def log2_ratio(q: Fraction) -> float:
    """``log2(q)`` for a positive Fraction of any size (float result)."""
    q = ratio(q)
    if q <= 0:
        raise ValueError("log of non-positive value")
    return _log2_int(q.numerator) - _log2_int(q.denominator)


def _log2_int(n: int) -> float:
    # math.log2 accepts huge ints, but shift first to keep float precision sane
    b = n.bit_length()
    if b <= 1000:
        return math.log2(n)
    shift = b - 64
    return math.log2(n >> shift) + shift


Prob = Union[Fraction, DyadicExp, DyadicComplement]
