"""Exact scalars: naturals, rationals, rational intervals and a tracked accumulator.

Rationals are :class:`fractions.Fraction` values (always normalized, unbounded
numerator and denominator).  Nothing in this package falls back to floats.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Rat = Fraction
RatLike = Union[Fraction, int]


class Rounding(enum.Enum):
    FLOOR = "floor"      # toward -inf
    CEILING = "ceiling"  # toward +inf
    NEAREST = "nearest"  # ties away from zero


def rat(value: RatLike | str, den: int = 1) -> Fraction:
    """Build a normalized rational from an int, Fraction or ``"p/q"`` string."""
    if den == 0:
        raise ZeroDivisionError("rational with zero denominator")
    if isinstance(value, float):
        raise TypeError("floats are not accepted as exact rationals")
    return Fraction(value) / den


def rat_arith(a: RatLike, b: RatLike, op: str) -> Fraction:
    a, b = Fraction(a), Fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("division by the zero rational")
        return a / b
    raise ValueError(f"unknown rational operation {op!r}")


def monus(x: int, y: int) -> int:
    """Modified subtraction on naturals: x - y if x >= y else 0."""
    return x - y if x >= y else 0


def floor_rat(q: Fraction) -> int:
    return q.numerator // q.denominator


def ceil_rat(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def round_half_up(q: Fraction) -> int:
    """[q + 1/2]."""
    return (2 * q.numerator + q.denominator) // (2 * q.denominator)


def round_rat(q: Fraction, rounding: Rounding) -> int:
    if rounding is Rounding.FLOOR:
        return floor_rat(q)
    if rounding is Rounding.CEILING:
        return ceil_rat(q)
    n = round_half_up(abs(q))
    return n if q >= 0 else -n


def to_decimal(q: RatLike, digits: int, rounding: Rounding = Rounding.NEAREST) -> str:
    """Render ``q`` with exactly ``digits`` fractional digits.

    The direction flag controls which neighbour on the 10^-digits grid is
    chosen, so FLOOR/CEILING outputs are certified lower/upper bounds.
    """
    if digits < 0:
        raise ValueError("digits must be nonnegative")
    q = Fraction(q)
    scaled = round_rat(q * 10**digits, rounding)
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def format_bound(bound: Fraction) -> str:
    """Round a positive error bound *up* to one significant digit, e.g. ``2e-6``."""
    bound = Fraction(bound)
    if bound <= 0:
        return "0"
    exp = 0
    while bound >= 10 ** (exp + 1):
        exp += 1
    while bound < Fraction(10) ** exp:
        exp -= 1
    lead = ceil_rat(bound / Fraction(10) ** exp)
    if lead == 10:
        lead, exp = 1, exp + 1
    return f"{lead}e{exp}"


def ilog2_ceil(n: int) -> int:
    """Smallest k with 2^k >= n (n >= 1)."""
    if n < 1:
        raise ValueError("ilog2_ceil needs n >= 1")
    return (n - 1).bit_length()


def iroot_ceil(n: int, k: int) -> int:
    """Smallest r >= 0 with r^k >= n."""
    if n <= 0:
        return 0
    if k == 1:
        return n
    lo, hi = 0, 1 << (n.bit_length() // k + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k >= n:
            hi = mid
        else:
            lo = mid + 1
    return lo


def iroot_floor(n: int, k: int) -> int:
    """Largest r >= 0 with r^k <= n."""
    if n <= 0:
        return 0
    if k == 2:
        return math.isqrt(n)
    r = iroot_ceil(n, k)
    return r if r**k == n else r - 1


@dataclass(frozen=True)
class RatInterval:
    """Closed interval [lo, hi] with rational endpoints.

    Every operation returns an enclosure of the pointwise results.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q: RatLike) -> "RatInterval":
        return cls(q, q)

    @classmethod
    def around(cls, center: RatLike, radius: RatLike) -> "RatInterval":
        return cls(Fraction(center) - radius, Fraction(center) + radius)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def mag(self) -> Fraction:
        """max |t| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> Fraction:
        """min |t| over the interval."""
        if self.lo <= 0 <= self.hi:
            return Fraction(0)
        return min(abs(self.lo), abs(self.hi))

    def contains(self, q: RatLike) -> bool:
        return self.lo <= q <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def __add__(self, other):
        other = _as_interval(other)
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        other = _as_interval(other)
        return RatInterval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __mul__(self, other):
        other = _as_interval(other)
        p = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return RatInterval(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_interval(other)
        if other.contains_zero():
            raise ZeroDivisionError("interval divisor contains 0")
        return self * RatInterval(1 / other.hi, 1 / other.lo)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative interval power")
        if k == 0:
            return RatInterval(1, 1)
        a, b = self.lo**k, self.hi**k
        if k % 2 == 1:
            return RatInterval(a, b)
        if self.lo >= 0:
            return RatInterval(a, b)
        if self.hi <= 0:
            return RatInterval(b, a)
        return RatInterval(0, max(a, b))

    def hull(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))


def _as_interval(v) -> RatInterval:
    if isinstance(v, RatInterval):
        return v
    return RatInterval(v, v)


class TrackedAccumulator:
    """Running sum on the grid 2^-scale with an exact record of rounding error.

    Terms are rounded to the nearest multiple of 2^-scale before being added,
    which keeps the stored integer small no matter how many terms arrive.
    Invariant: |exact partial sum - value| <= error_bound.
    """

    # rounding residuals are recorded rounded up to units of 2^-(scale + _GUARD)
    _GUARD = 16

    def __init__(self, scale: int):
        if scale < 0:
            raise ValueError("scale must be a natural number")
        self.scale = scale
        self.sum = 0
        self._error_units = 0
        self.count = 0

    @classmethod
    def for_budget(cls, precision_exp: int, n_terms: int) -> "TrackedAccumulator":
        # total rounding <= n * 2^-(p + log2 n + 2) <= 2^-p / 4
        return cls(precision_exp + ilog2_ceil(max(n_terms, 1)) + 2)

    def absorb(self, term: RatLike) -> "TrackedAccumulator":
        term = Fraction(term)
        p, q = term.numerator, term.denominator
        shifted = p << self.scale
        n = (2 * shifted + q) // (2 * q)
        residual = abs(shifted - n * q)
        if residual:
            self._error_units += -((-residual << self._GUARD) // q)
        self.sum += n
        self.count += 1
        return self

    @property
    def error_bound(self) -> Fraction:
        return Fraction(self._error_units, 1 << (self.scale + self._GUARD))

    def extend(self, terms: Iterable[RatLike]) -> "TrackedAccumulator":
        for t in terms:
            self.absorb(t)
        return self

    @property
    def value(self) -> Fraction:
        return Fraction(self.sum, 1 << self.scale)

    def enclosure(self) -> RatInterval:
        return RatInterval.around(self.value, self.error_bound)
