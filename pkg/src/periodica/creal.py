"""Computable reals as approximation oracles.

A :class:`CReal` holds a pure function ``approx: x -> Fraction`` together with
its modulus: either 1/(x+1) (``INVERSE``) or 2^-x (``DYADIC``).  The contract is
|approx(x) - alpha| <= modulus(x) for every x.  Everything here builds new
oracles out of old ones by reindexing, never by floating-point evaluation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from periodica.exact import (
    RatInterval,
    Rounding,
    ceil_rat,
    format_bound,
    ilog2_ceil,
    round_rat,
    to_decimal as rat_to_decimal,
)
from periodica.terms import LOWER_ELEMENTARY, ClassTag


class ResourceLimitError(RuntimeError):
    """A fuel or depth budget ran out before a result could be certified."""


class FuelExhausted(ResourceLimitError):
    pass


class RootIsolationError(ValueError):
    pass


class ModulusKind(enum.Enum):
    INVERSE = "1/(x+1)"
    DYADIC = "2^-x"


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Fuel:
    """Largest index a semi-decidable scan may query."""

    budget: int = 10_000

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("fuel budget must be at least 1")

    def schedule(self, start: int = 0) -> Iterator[int]:
        """start, 2 start + 1, ... (from 0: 0, 1, 3, 7, ...) capped at the budget,
        which is always visited last."""
        x = min(start, self.budget)
        while x < self.budget:
            yield x
            x = 2 * x + 1
        yield self.budget


def _geometric(start: int = 0) -> Iterator[int]:
    x = start
    while True:
        yield x
        x = 2 * x + 1


class CReal:
    def __init__(
        self,
        approx: Callable[[int], Fraction],
        modulus_kind: ModulusKind = ModulusKind.INVERSE,
        cls: ClassTag = LOWER_ELEMENTARY,
        provenance: str = "",
        exact: Optional[Fraction] = None,
    ):
        self._fn = approx
        self._memo: Dict[int, Fraction] = {}
        self.modulus_kind = modulus_kind
        self.cls = cls
        self.provenance = provenance
        self.exact = exact

    def approx(self, x: int) -> Fraction:
        v = self._memo.get(x)
        if v is None:
            v = Fraction(self._fn(x))
            self._memo[x] = v
        return v

    __call__ = approx

    def modulus(self, x: int) -> Fraction:
        if self.modulus_kind is ModulusKind.INVERSE:
            return Fraction(1, x + 1)
        return Fraction(1, 1 << x)

    def enclosure(self, x: int) -> RatInterval:
        if self.exact is not None:
            return RatInterval.point(self.exact)
        return RatInterval.around(self.approx(x), self.modulus(x))

    def as_inverse(self) -> "CReal":
        """Same real with modulus 1/(x+1)."""
        if self.modulus_kind is ModulusKind.INVERSE:
            return self
        src = self
        return CReal(
            lambda x: src.approx(ilog2_ceil(x + 1)),
            ModulusKind.INVERSE,
            self.cls,
            self.provenance,
            self.exact,
        )

    def __add__(self, other):
        return arith(self, _lift(other), "add")

    def __radd__(self, other):
        return arith(_lift(other), self, "add")

    def __sub__(self, other):
        return arith(self, _lift(other), "sub")

    def __rsub__(self, other):
        return arith(_lift(other), self, "sub")

    def __mul__(self, other):
        return arith(self, _lift(other), "mul")

    def __rmul__(self, other):
        return arith(_lift(other), self, "mul")

    def __neg__(self):
        return negate(self)

    def __repr__(self) -> str:
        tag = f"exact={self.exact}" if self.exact is not None else f"modulus={self.modulus_kind.value}"
        return f"CReal({self.provenance or 'anonymous'}, {tag}, {self.cls})"


def _lift(v) -> CReal:
    return v if isinstance(v, CReal) else from_rational(v)


def from_rational(q) -> CReal:
    q = Fraction(q)
    return CReal(lambda x: q, ModulusKind.INVERSE, LOWER_ELEMENTARY, f"rational {q}", exact=q)


def negate(a: CReal) -> CReal:
    if a.exact is not None:
        return from_rational(-a.exact)
    return CReal(lambda x: -a.approx(x), a.modulus_kind, a.cls, f"-({a.provenance})")


def _mul_constant(a: CReal, q: Fraction) -> CReal:
    k = max(1, ceil_rat(abs(q)))
    return CReal(lambda x: q * a.approx(k * x + k - 1), ModulusKind.INVERSE, a.cls, f"{q}*({a.provenance})")


def arith(a: CReal, b: CReal, op: str) -> CReal:
    """add, sub or mul with modulus 1/(x+1).

    add/sub query both operands at 2x+1.  mul uses K >= |alpha| + |beta| + 1,
    taken from the coarse bounds |alpha| <= |A(0)| + 1, and queries at Kx+K.
    """
    if op not in ("add", "sub", "mul"):
        raise ValueError(f"unknown operation {op!r}")
    if a.exact is not None and b.exact is not None:
        q = {"add": a.exact + b.exact, "sub": a.exact - b.exact, "mul": a.exact * b.exact}[op]
        return from_rational(q)
    a, b = a.as_inverse(), b.as_inverse()
    cls = a.cls.join(b.cls)
    name = f"({a.provenance}) {op} ({b.provenance})"
    if op in ("add", "sub"):
        sign = 1 if op == "add" else -1
        if b.exact is not None:
            return CReal(lambda x: a.approx(x) + sign * b.exact, ModulusKind.INVERSE, cls, name)
        if a.exact is not None:
            return CReal(lambda x: a.exact + sign * b.approx(x), ModulusKind.INVERSE, cls, name)
        return CReal(
            lambda x: a.approx(2 * x + 1) + sign * b.approx(2 * x + 1), ModulusKind.INVERSE, cls, name
        )
    if a.exact is not None:
        return _mul_constant(b, a.exact)
    if b.exact is not None:
        return _mul_constant(a, b.exact)
    k = ceil_rat(abs(a.approx(0)) + 1 + abs(b.approx(0)) + 1 + 1)
    return CReal(
        lambda x: a.approx(k * x + k) * b.approx(k * x + k), ModulusKind.INVERSE, cls, name
    )


def sum_creals(terms: Sequence[CReal], provenance: str = "") -> CReal:
    """n-ary sum: each of the k operands is queried at k(x+1) - 1."""
    terms = [t.as_inverse() for t in terms]
    if not terms:
        return from_rational(0)
    exact = [t for t in terms if t.exact is not None]
    live = [t for t in terms if t.exact is None]
    offset = sum((t.exact for t in exact), Fraction(0))
    if not live:
        return from_rational(offset)
    k = len(live)
    cls = LOWER_ELEMENTARY
    for t in live:
        cls = cls.join(t.cls)
    return CReal(
        lambda x: offset + sum(t.approx(k * (x + 1) - 1) for t in live),
        ModulusKind.INVERSE,
        cls,
        provenance or " + ".join(t.provenance for t in terms),
    )


def abs_creal(a: CReal) -> CReal:
    if a.exact is not None:
        return from_rational(abs(a.exact))
    return CReal(lambda x: abs(a.approx(x)), a.modulus_kind, a.cls, f"|{a.provenance}|")


def nonzero_witness(a: CReal, fuel: Optional[Fuel] = None) -> int:
    """Some c with (c+1)|alpha| >= 2.

    Scans for x with |A(x)| > 2/(x+1); then |alpha| > 1/(x+1), so c = 2x+1 works.
    Without fuel the scan is unbounded (it terminates iff alpha != 0).
    """
    a = a.as_inverse()
    xs = fuel.schedule() if fuel is not None else _geometric()
    for x in xs:
        if abs(a.approx(x)) * (x + 1) > 2:
            return 2 * x + 1
    raise FuelExhausted(f"could not certify {a.provenance or 'value'} != 0 within budget {fuel.budget}")


def reciprocal(a: CReal, fuel: Optional[Fuel] = None) -> CReal:
    """1/alpha for alpha != 0.

    With c from :func:`nonzero_witness`, C(k) = 1/A(k+c) is within
    ((c+1)^2/2)/(k+1) of 1/alpha; reindexing by k = Kx+K with K >= (c+1)^2/2
    brings the error to 1/(x+1).
    """
    if a.exact is not None:
        if a.exact == 0:
            if fuel is not None:
                raise FuelExhausted(f"could not certify 0 != 0 within budget {fuel.budget}")
            raise ZeroDivisionError("reciprocal of the exact rational 0")
        return from_rational(1 / a.exact)
    a = a.as_inverse()
    c = nonzero_witness(a, fuel)
    k = ceil_rat(Fraction((c + 1) ** 2, 2))
    return CReal(lambda x: 1 / a.approx(k * x + k + c), ModulusKind.INVERSE, a.cls, f"1/({a.provenance})")


def cmp_rational(a: CReal, q, fuel: Fuel) -> Ordering:
    """Semi-decide alpha < q or alpha > q; UNKNOWN when no index within fuel separates them."""
    return separate(a, q, fuel)[0]


def separate(a: CReal, q, fuel: Fuel, start: int = 0) -> Tuple[Ordering, int]:
    """:func:`cmp_rational` plus the witnessing index, scanning from ``start``.

    Any index separates once the modulus is small enough, so starting late is
    sound; callers comparing against nearby points reuse the last witness.
    """
    q = Fraction(q)
    if a.exact is not None:
        if a.exact == q:
            return Ordering.UNKNOWN, fuel.budget
        return (Ordering.GREATER if a.exact > q else Ordering.LESS), 0
    for x in fuel.schedule(start):
        d = a.approx(x) - q
        m = a.modulus(x)
        if d > m:
            return Ordering.GREATER, x
        if -d > m:
            return Ordering.LESS, x
    return Ordering.UNKNOWN, fuel.budget


# ---------------------------------------------------------------- polynomials over Q

Poly = List[Fraction]  # ascending coefficients


def poly_trim(p: Sequence[Fraction]) -> Poly:
    p = [Fraction(c) for c in p]
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p: Sequence, x):
    acc = 0 * x if not isinstance(x, RatInterval) else RatInterval.point(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_derivative(p: Sequence) -> list:
    return [i * p[i] for i in range(1, len(p))]


def poly_divmod(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    a, b = poly_trim(a), poly_trim(b)
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    quot = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    rem = list(a)
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        factor = rem[-1] / b[-1]
        quot[shift] = factor
        for i, c in enumerate(b):
            rem[shift + i] -= factor * c
        rem = poly_trim(rem)
    return poly_trim(quot), rem


def poly_gcd(a: Poly, b: Poly) -> Poly:
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if not a:
        return a
    return [c / a[-1] for c in a]


def square_free(p: Poly) -> Poly:
    p = poly_trim(p)
    g = poly_gcd(p, poly_derivative(p))
    if len(g) <= 1:
        return p
    return poly_divmod(p, g)[0]


def parse_polynomial(text: str, var: str = "X") -> Poly:
    """Univariate polynomial with rational coefficients, e.g. ``"X^2 - 2"``."""
    from periodica.semialg import parse_mpoly

    mp = parse_mpoly(text, [var])
    deg = max((e[0] for e in mp.terms), default=0)
    out = [Fraction(0)] * (deg + 1)
    for (e,), c in mp.terms.items():
        out[e] = c
    return poly_trim(out) or [Fraction(0)]


# ---------------------------------------------------------------- roots

def _coeff_intervals(coeffs: Sequence[CReal], x: int) -> List[RatInterval]:
    return [c.enclosure(x) for c in coeffs]


def _certified_sign(coeffs: Sequence[CReal], point: Fraction, fuel: Fuel) -> int:
    """Sign of P(point), or 0 when it cannot be separated from 0 within fuel."""
    if all(c.exact is not None for c in coeffs):
        v = poly_eval([c.exact for c in coeffs], point)
        return (v > 0) - (v < 0)
    for x in fuel.schedule():
        e = poly_eval(_coeff_intervals(coeffs, x), RatInterval.point(point))
        if e.lo > 0:
            return 1
        if e.hi < 0:
            return -1
    return 0


def _derivative_bounds(coeffs: Sequence[CReal], a: Fraction, b: Fraction, prec: int, pieces: int = 8):
    """(c, d) with c <= |P'| <= d on [a, b] for every polynomial inside the coefficient enclosures."""
    deriv = poly_derivative(_coeff_intervals(coeffs, prec))
    lo, hi = None, Fraction(0)
    step = (b - a) / pieces
    for i in range(pieces):
        e = poly_eval(deriv, RatInterval(a + i * step, a + (i + 1) * step))
        lo = e.mig() if lo is None else min(lo, e.mig())
        hi = max(hi, e.mag())
    return lo, hi


def _leftmost_small(p: Sequence[Fraction], a: Fraction, w: Fraction, count: int, threshold: Fraction) -> Optional[int]:
    """Least j < count with |p(a + (j + 1/2) w)| <= threshold.

    Branch and bound over ranges of midpoints; a range is dropped only when an
    interval enclosure proves every midpoint in it exceeds the threshold, so
    the answer equals that of a left-to-right scan.
    """
    stack = [(0, count - 1)]
    while stack:
        lo, hi = stack.pop()
        m_lo = a + (2 * lo + 1) * w / 2
        if lo == hi:
            if abs(poly_eval(p, m_lo)) <= threshold:
                return lo
            continue
        m_hi = a + (2 * hi + 1) * w / 2
        if poly_eval(p, RatInterval(m_lo, m_hi)).mig() > threshold:
            continue
        mid = (lo + hi) // 2
        stack.append((mid + 1, hi))
        stack.append((lo, mid))
    return None


def _monotone_root_approx(p: Poly, a: Fraction, span: Fraction, k: int, half_dspan: Fraction, direction: int):
    """The leftmost-midpoint rule for a rational P that is strictly monotone on
    the bracket, by binary search in integer arithmetic.

    With M = 2 ad sd (y+1), midpoint j is N_j / M and L M^deg P(N_j / M) is an
    integer (L clears the coefficient denominators).  The admissible midpoints
    form a contiguous run, so the leftmost one is the first j where
    direction * P reaches -threshold.
    """
    deg = len(p) - 1
    lcm = 1
    for c in p:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in p]
    an, ad, sn, sd = a.numerator, a.denominator, span.numerator, span.denominator

    def approx(x: int) -> Fraction:
        y = k * x + k
        big_m = 2 * ad * sd * (y + 1)
        powers = [big_m**i for i in range(deg + 1)]
        base = 2 * an * sd * (y + 1)
        # threshold (d span)/(2(y+1)), scaled by L M^deg
        thr = half_dspan / (y + 1)
        thr_num, thr_den = thr.numerator * lcm * powers[deg], thr.denominator

        def scaled(j: int) -> int:
            n = base + (2 * j + 1) * sn * ad
            v, npow = 0, 1
            for i, c in enumerate(ints):
                v += c * npow * powers[deg - i]
                npow *= n
            return v * direction

        lo, hi = 0, y
        while lo < hi:
            mid = (lo + hi) // 2
            if scaled(mid) * thr_den >= -thr_num:
                hi = mid
            else:
                lo = mid + 1
        if abs(scaled(lo)) * thr_den > thr_num:
            raise ArithmeticError("root approximation contract violated; no admissible midpoint")
        return a + Fraction(2 * lo + 1, 2 * (y + 1)) * span

    return approx


def poly_root(
    coeffs: Sequence[Union[CReal, Fraction, int]],
    bracket: Tuple,
    fuel: Optional[Fuel] = None,
) -> CReal:
    """The unique root in ``bracket`` of sum_i coeffs[i] X^i, as a CReal.

    Requirements: certified sign change at the endpoints and P' bounded away
    from 0 near the root.  Rational polynomials are first made square-free.
    The approximation at x scans the midpoints of y+1 equal subintervals
    (y = Kx+K) and returns the leftmost one where the approximate polynomial is
    below the threshold (d(b-a) + 2q) / (2(y+1)); c, d bound |P'| on the bracket
    and q bounds the coefficient error.
    """
    fuel = fuel or Fuel()
    a, b = Fraction(bracket[0]), Fraction(bracket[1])
    if not a < b:
        raise RootIsolationError("bracket must satisfy a < b")
    cs = [_lift(c).as_inverse() for c in coeffs]
    while len(cs) > 1 and cs[-1].exact == 0:
        cs.pop()
    if len(cs) < 2:
        raise RootIsolationError("polynomial must have degree at least 1")
    if all(c.exact is not None for c in cs):
        cs = [from_rational(c) for c in square_free([c.exact for c in cs])]
        for end in (a, b):
            if poly_eval([c.exact for c in cs], end) == 0:
                return from_rational(end)
    cls = LOWER_ELEMENTARY
    for c in cs:
        cls = cls.join(c.cls)

    sa, sb = _certified_sign(cs, a, fuel), _certified_sign(cs, b, fuel)
    if sa == 0 or sb == 0:
        raise FuelExhausted("could not certify the sign of P at the bracket endpoints")
    if sa == sb:
        raise RootIsolationError(f"no certified sign change on [{a}, {b}]")

    prec = 64
    c_low, d_high = _derivative_bounds(cs, a, b, prec)
    for _ in range(200):
        if c_low > 0:
            break
        # shrink the bracket around the root until P' is bounded away from 0
        for t in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)):
            m = a + t * (b - a)
            sm = _certified_sign(cs, m, fuel)
            if sm == 0 and all(c.exact is not None for c in cs):
                return from_rational(m)
            if sm != 0:
                break
        else:
            raise FuelExhausted("could not certify the sign of P inside the bracket")
        if sm == sa:
            a = m
        else:
            b = m
        prec = min(2 * prec + 1, fuel.budget) if prec < fuel.budget else prec
        c_low, d_high = _derivative_bounds(cs, a, b, prec)
    else:
        raise RootIsolationError("P' cannot be separated from 0 near the root (multiple root?)")

    big = max(abs(a), abs(b))
    q = sum((big**i for i, c in enumerate(cs) if c.exact is None), Fraction(0))
    span = b - a
    k = max(1, ceil_rat((d_high * span + 4 * q) / (2 * c_low)))

    if all(c.exact is not None for c in cs):
        # |P'| >= c_low > 0 on [a, b], so P is strictly monotone there
        return CReal(
            _monotone_root_approx([c.exact for c in cs], a, span, k, d_high * span / 2, sb),
            ModulusKind.INVERSE,
            cls,
            "polynomial root",
        )

    def approx(x: int) -> Fraction:
        y = k * x + k
        p = [c.exact if c.exact is not None else c.approx(y) for c in cs]
        w = span / (y + 1)
        threshold = (d_high * span + 2 * q) / (2 * (y + 1))
        j = _leftmost_small(p, a, w, y + 1, threshold)
        if j is None:
            raise ArithmeticError("root approximation contract violated; no admissible midpoint")
        return a + (2 * j + 1) * w / 2

    return CReal(approx, ModulusKind.INVERSE, cls, "polynomial root")


# ---------------------------------------------------------------- rendering

@dataclass(frozen=True)
class DecimalResult:
    text: str
    bound: Fraction
    index: int

    def __str__(self) -> str:
        return f"{self.text} ± {format_bound(self.bound)}"


def decimal_index(a: CReal, digits: int) -> int:
    """Smallest index whose modulus is at most 10^-digits."""
    if a.modulus_kind is ModulusKind.INVERSE:
        return 10**digits - 1
    return ilog2_ceil(10**digits)


def decimal_result(a: CReal, digits: int) -> DecimalResult:
    x = decimal_index(a, digits)
    v = a.approx(x)
    scaled = round_rat(v * 10**digits, Rounding.NEAREST)
    d = Fraction(scaled, 10**digits)
    return DecimalResult(rat_to_decimal(d, digits), abs(d - v) + a.modulus(x), x)


def to_decimal(a: CReal, digits: int) -> str:
    """``"D ± bound"`` with |D - alpha| <= bound <= 10^-digits + modulus(x*)."""
    return str(decimal_result(a, digits))
