"""Other presentations of a real: approximation pairs, nested intervals,
base-b digit streams and subset sums of powers of two."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from periodica.creal import CReal, Fuel, ModulusKind, Ordering, cmp_rational, separate
from periodica.exact import floor_rat
from periodica.terms import LOWER_ELEMENTARY, ClassTag

RatSeq = Callable[[int], Fraction]


class _Prefix:
    """Memoized running fold over a sequence, extended on demand."""

    def __init__(self, seq: RatSeq, pick: Callable[[Fraction, Fraction], Fraction]):
        self.seq = seq
        self.pick = pick
        self.values: List[Fraction] = []

    def __call__(self, x: int) -> Fraction:
        while len(self.values) <= x:
            v = Fraction(self.seq(len(self.values)))
            self.values.append(v if not self.values else self.pick(self.values[-1], v))
        return self.values[x]


@dataclass(frozen=True)
class ApproxPair:
    """|A(x) - alpha| <= E(x) with E nonincreasing and tending to 0."""

    A: RatSeq
    E: RatSeq

    def witness_index(self, k: int, limit: Optional[int] = None) -> int:
        """Some x with E(x) <= 2^-k (scan; unbounded unless ``limit`` is given)."""
        x = 0
        while Fraction(self.E(x)) * (1 << k) > 1:
            x += 1
            if limit is not None and x > limit:
                raise ValueError(f"E never reached 2^-{k} within {limit} indices")
        return x


@dataclass(frozen=True)
class NestedIntervals:
    """f(x) <= f(x+1) <= alpha <= g(x+1) <= g(x)."""

    f: RatSeq
    g: RatSeq


def approx_to_nested(p: ApproxPair) -> NestedIntervals:
    lower = _Prefix(lambda n: Fraction(p.A(n)) - Fraction(p.E(n)), max)
    upper = _Prefix(lambda n: Fraction(p.A(n)) + Fraction(p.E(n)), min)
    return NestedIntervals(lower, upper)


def nested_to_approx(ni: NestedIntervals) -> ApproxPair:
    return ApproxPair(lambda x: (ni.g(x) + ni.f(x)) / 2, lambda x: (ni.g(x) - ni.f(x)) / 2)


def pr_approximation(a: CReal) -> ApproxPair:
    return ApproxPair(a.approx, a.modulus)


def approx_pair_to_creal(p: ApproxPair, cls: ClassTag = LOWER_ELEMENTARY, provenance: str = "") -> CReal:
    """Query A at s(x) = min{n : E(n) <= 1/(x+1)}."""

    def s(x: int) -> int:
        n = 0
        while Fraction(p.E(n)) * (x + 1) > 1:
            n += 1
        return n

    return CReal(lambda x: Fraction(p.A(s(x))), ModulusKind.INVERSE, cls, provenance or "approximation pair")


@dataclass
class DigitStream:
    """alpha = integer_part + sum_{n>=0} digits(n) / base^n."""

    base: int
    integer_part: int
    digit_fn: Callable[[int], int]
    _memo: Dict[int, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be at least 2")

    def digit(self, n: int) -> int:
        d = self._memo.get(n)
        if d is None:
            d = self.digit_fn(n)
            if not 0 <= d < self.base:
                raise ValueError(f"digit {d} at position {n} is out of range for base {self.base}")
            self._memo[n] = d
        return d

    def partial(self, x: int) -> Fraction:
        """integer_part + sum_{n<=x+1} digits(n) / base^n."""
        total = Fraction(self.integer_part)
        for n in range(x + 2):
            d = self.digit(n)
            if d:
                total += Fraction(d, self.base**n)
        return total


def badic_to_creal(d: DigitStream, cls: ClassTag = LOWER_ELEMENTARY) -> CReal:
    """Truncation after position x+1; the rest is at most base^-(x+1) <= 2^-x."""
    return CReal(d.partial, ModulusKind.DYADIC, cls, f"base-{d.base} digits")


@dataclass(frozen=True)
class ExtractedDigits:
    """Fractional digits at positions 1..len(digits); ``unknown_at`` is the first
    position that could not be certified within the fuel, if any."""

    base: int
    integer_part: Optional[int]
    digits: List[int]
    unknown_at: Optional[int] = None

    def stream(self) -> DigitStream:
        if self.integer_part is None:
            raise ValueError("integer part is unknown")
        digits = self.digits

        def digit(n: int) -> int:
            if n == 0:
                return 0
            if n <= len(digits):
                return digits[n - 1]
            raise IndexError(f"digit {n} lies beyond the extracted prefix")

        return DigitStream(self.base, self.integer_part, digit)

    def tokens(self) -> List[str]:
        out = [str(d) for d in self.digits]
        if self.unknown_at is not None:
            out.append("?")
        return out


def _long_division(q: Fraction, base: int, positions: int) -> ExtractedDigits:
    whole = floor_rat(q)
    rem = q - whole
    num, den = rem.numerator, rem.denominator
    digits = []
    for _ in range(positions):
        num *= base
        d, num = divmod(num, den)
        digits.append(d)
    return ExtractedDigits(base, whole, digits)


def extract_digits(a: CReal, base: int, positions: int, fuel: Fuel) -> ExtractedDigits:
    """First ``positions`` base-b digits after the point.

    Known rationals use long division.  Otherwise each digit is fixed by strict
    comparisons against the cut points lo + j b^-k, scanned left to right, so the
    bracket lo < alpha < lo + b^-k is strict at every step.  A cut point that
    cannot be separated within the fuel stops extraction at that position.
    """
    if base < 2:
        raise ValueError("base must be at least 2")
    if a.exact is not None:
        return _long_division(a.exact, base, positions)

    # integer part: N < alpha < N + 1
    n = floor_rat(a.approx(0))
    for _ in range(4):
        lo = cmp_rational(a, n, fuel)
        if lo is Ordering.UNKNOWN:
            return ExtractedDigits(base, None, [], 0)
        if lo is Ordering.LESS:
            n -= 1
            continue
        hi = cmp_rational(a, n + 1, fuel)
        if hi is Ordering.UNKNOWN:
            return ExtractedDigits(base, None, [], 0)
        if hi is Ordering.GREATER:
            n += 1
            continue
        break
    else:
        raise ArithmeticError("integer part search did not settle; modulus contract violated")

    low = Fraction(n)
    digits: List[int] = []
    start = 0
    for k in range(1, positions + 1):
        step = Fraction(1, base**k)
        chosen = base - 1
        for j in range(1, base):
            r, witness = separate(a, low + j * step, fuel, start)
            start = max(start, witness // 2)
            if r is Ordering.UNKNOWN:
                return ExtractedDigits(base, n, digits, k)
            if r is Ordering.LESS:
                chosen = j - 1
                break
        digits.append(chosen)
        low += chosen * step
    return ExtractedDigits(base, n, digits)


def digit_recovery(q, k: int) -> int:
    """[([2 * 4^k * q + 1/2] mod 4) / 2]: digit k of alpha = sum f(n)/4^n, f(n) in {0, 1},
    whenever |q - alpha| <= 4^-(k+1)."""
    q = Fraction(q)
    t = 2 * 4**k * q + Fraction(1, 2)
    return (floor_rat(t) % 4) // 2


def subset_sum_nested(chi: Callable[[int], int]) -> NestedIntervals:
    """s_x <= sum_{chi(n)=1} 2^-n <= s_x + 2^-x with s_x = sum_{n<=x, chi(n)=1} 2^-n."""
    s = _Prefix(lambda n: Fraction(1, 1 << n) if chi(n) else Fraction(0), lambda acc, v: acc + v)
    return NestedIntervals(s, lambda x: s(x) + Fraction(1, 1 << x))


def subset_sum_real(chi: Callable[[int], int], kind: ClassTag = LOWER_ELEMENTARY) -> CReal:
    ni = subset_sum_nested(chi)
    return CReal(ni.f, ModulusKind.DYADIC, kind, "subset sum of powers of 2")
