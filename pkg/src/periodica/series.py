"""Series with explicit tail cutoffs, summed into computable reals.

A :class:`SeriesSpec` pairs normalized term approximations (an F-2-sequence
whose value at (x, n) is within 1/(x+1) of alpha(n), with denominator x+1)
with a cutoff xi such that the tail after xi(x) is at most 1/(x+1).
:func:`skordev_sum` turns such a spec into a :class:`CReal` using only
integer sums over a common denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Optional

import numpy as np

from periodica.creal import CReal, ModulusKind, from_rational, sum_creals, _mul_constant
from periodica.exact import TrackedAccumulator, iroot_ceil, iroot_floor
from periodica.fseq import F2Sequence, round_div
from periodica.terms import LOWER_ELEMENTARY, ClassTag

_INT64_SAFE = 1 << 62
_VECTOR_THRESHOLD = 4096
_CHUNK = 1 << 20


@dataclass(frozen=True)
class PowerFamily:
    """alpha(n) = (+-1)^n / (a n + b)^k, for the vectorized numerator kernel."""

    a: int
    b: int
    k: int
    alternating: bool

    def term(self, n: int) -> Fraction:
        s = -1 if self.alternating and n % 2 else 1
        return Fraction(s, (self.a * n + self.b) ** self.k)

    def numerator_sum(self, y: int, m: int) -> int:
        """sum_{n<=m} sign(n) * C(y+1, d_n - 1) with d_n = (a n + b)^k.

        While consecutive numerators differ they are summed directly (vectorized
        when int64 is safe); past the point where (y+1)/d_n changes by less than
        one per step, runs of equal numerators are summed in one step each.
        """
        big_y = y + 1
        # below this n the rounded quotient typically changes at every step
        split = min(m + 1, iroot_ceil(big_y, self.k + 1) * 2 + 1)
        total = self._direct_sum(y, 0, split)
        if split <= m:
            total += self._block_sum(big_y, split, m)
        return total

    def _direct_sum(self, y: int, lo: int, hi: int) -> int:
        """sum over lo <= n < hi, lo even."""
        if hi <= lo:
            return 0
        dmax = (self.a * (hi - 1) + self.b) ** self.k
        if hi - lo < _VECTOR_THRESHOLD or 2 * (y + 1) + dmax >= _INT64_SAFE:
            return self._numerator_sum_loop(y, lo, hi)
        total = 0
        two_y = 2 * (y + 1)
        for start in range(lo, hi, _CHUNK):
            n = np.arange(start, min(hi, start + _CHUNK), dtype=np.int64)
            d = (self.a * n + self.b) ** self.k
            v = (two_y + d) // (2 * d)
            if self.alternating:
                # chunks start at even n, so even offsets carry the + sign
                total += int(v[0::2].sum()) - int(v[1::2].sum())
            else:
                total += int(v.sum())
        return total

    def _numerator_sum_loop(self, y: int, lo: int, hi: int) -> int:
        total = 0
        two_y = 2 * (y + 1)
        a, b, k = self.a, self.b, self.k
        for n in range(lo, hi):
            d = (a * n + b) ** k
            v = (two_y + d) // (2 * d)
            if v == 0:
                # d grows with n, so every later numerator is 0 too
                break
            total += -v if self.alternating and n & 1 else v
        return total

    def _block_sum(self, big_y: int, lo: int, hi: int) -> int:
        """sum over lo <= n <= hi by runs of equal numerators [Y/d + 1/2]."""
        a, b, k = self.a, self.b, self.k
        total = 0
        n = lo
        while n <= hi:
            d = (a * n + b) ** k
            v = (2 * big_y + d) // (2 * d)
            if v == 0:
                break
            # [Y/d + 1/2] = v  iff  d <= 2Y/(2v-1), so the run ends at the largest such n
            root = iroot_floor(2 * big_y // (2 * v - 1), k)
            last = min(hi, (root - b) // a)
            count = last - n + 1
            if self.alternating:
                # signed count of n..last under (-1)^n
                evens = last // 2 - (n - 1) // 2
                total += v * (2 * evens - count)
            else:
                total += v * count
            n = last + 1
        return total


@dataclass
class SeriesSpec:
    """Normalized terms plus tail cutoff.

    ``term.f``/``term.g`` take (x, n) with value (f - g)/(x + 1).
    ``zero_from(y)`` (optional) is an n beyond which both numerators vanish at
    index y; ``exact_term`` gives alpha(n) when it is rational; ``tail_after(M)``
    bounds |sum_{n>M} alpha(n)|.
    """

    name: str
    term: F2Sequence
    xi: Callable[[int], int]
    cls: ClassTag = LOWER_ELEMENTARY
    provenance: str = ""
    zero_from: Optional[Callable[[int], int]] = None
    family: Optional[PowerFamily] = None
    exact_term: Optional[Callable[[int], Fraction]] = None
    tail_after: Optional[Callable[[int], Fraction]] = None

    def numerator_sum(self, y: int, m: int) -> int:
        """sum_{n<=m} (f(y, n) - g(y, n)), skipping provably zero numerators."""
        if self.family is not None:
            return self.family.numerator_sum(y, m)
        stop = m + 1
        if self.zero_from is not None:
            stop = min(stop, self.zero_from(y))
        f, g = self.term.f, self.term.g
        return sum(f(y, n) - g(y, n) for n in range(stop))


def rational_terms(alpha: Callable[[int], Fraction], tag: ClassTag = LOWER_ELEMENTARY) -> F2Sequence:
    """Normalized presentation of exact rational terms: (x+1)alpha(n) rounded by C."""

    def f(x, n):
        q = Fraction(alpha(n))
        return round_div((x + 1) * q.numerator, q.denominator - 1) if q > 0 else 0

    def g(x, n):
        q = Fraction(alpha(n))
        return round_div((x + 1) * -q.numerator, q.denominator - 1) if q < 0 else 0

    return F2Sequence(f, g, lambda x, n: x, tag)


def creal_terms(alpha: Callable[[int], CReal], tag: ClassTag = LOWER_ELEMENTARY) -> F2Sequence:
    """Normalized presentation of computable terms: query at 2x+1, then round."""

    def value(x, n):
        return alpha(n).approx(2 * x + 1)

    def f(x, n):
        q = value(x, n)
        return round_div((x + 1) * q.numerator, q.denominator - 1) if q > 0 else 0

    def g(x, n):
        q = value(x, n)
        return round_div((x + 1) * -q.numerator, q.denominator - 1) if q < 0 else 0

    return F2Sequence(f, g, lambda x, n: x, tag)


def partial_sums(alpha: F2Sequence) -> F2Sequence:
    """F(x, m) = sum_{n<=m} f(xm+x+m, n), likewise G, and H(x, m) = xm+x+m.

    Each of the m+1 summands is off by at most 1/((x+1)(m+1)), so the partial
    sum is within 1/(x+1) of sum_{n<=m} alpha(n).
    """

    def index(x, m):
        return x * m + x + m

    def f(x, m):
        y = index(x, m)
        return sum(alpha.f(y, n) for n in range(m + 1))

    def g(x, m):
        y = index(x, m)
        return sum(alpha.g(y, n) for n in range(m + 1))

    return F2Sequence(f, g, index, alpha.cls)


def skordev_sum(spec: SeriesSpec) -> CReal:
    """sum_n alpha(n) with modulus 1/(x+1).

    At x the partial sum up to xi(2x+1) is taken at accuracy 1/(2x+2); the tail
    contributes at most another 1/(2x+2).
    """

    def approx(x: int) -> Fraction:
        xx = 2 * x + 1
        m = spec.xi(xx)
        y = xx * m + xx + m
        return Fraction(spec.numerator_sum(y, m), y + 1)

    return CReal(approx, ModulusKind.INVERSE, spec.cls, spec.provenance or spec.name)


# ---------------------------------------------------------------- catalog specs

def _first_exceeding(bound: int, weight: Callable[[int], int]) -> int:
    """Least n with weight(n) > bound, for increasing weight."""
    n = 0
    while weight(n) <= bound:
        n += 1
    return n


def e_series() -> SeriesSpec:
    # f(y, n) = [(y+1)/n!]: floor keeps f/(y+1) within 1/(y+1) below 1/n!
    def f(y, n):
        return (y + 1) // math.factorial(n)

    def xi(x):
        return {0: 1, 1: 2}.get(x, x)

    return SeriesSpec(
        "e",
        F2Sequence(f, lambda y, n: 0, lambda y, n: y),
        xi,
        provenance="factorial series",
        zero_from=lambda y: _first_exceeding(y + 1, math.factorial),
        exact_term=lambda n: Fraction(1, math.factorial(n)),
        tail_after=lambda m: Fraction(2, math.factorial(m + 1)),
    )


def _family_spec(name: str, fam: PowerFamily, xi, tail_after, provenance: str) -> SeriesSpec:
    return SeriesSpec(
        name,
        rational_terms(fam.term),
        xi,
        provenance=provenance,
        family=fam,
        exact_term=fam.term,
        tail_after=tail_after,
    )


def leibniz_series() -> SeriesSpec:
    return _family_spec(
        "pi/4",
        PowerFamily(2, 1, 1, True),
        lambda x: x,
        lambda m: Fraction(1, 2 * m + 3),
        "Leibniz series",
    )


def catalan_series() -> SeriesSpec:
    return _family_spec(
        "catalan",
        PowerFamily(2, 1, 2, True),
        lambda x: x,
        lambda m: Fraction(1, (2 * m + 3) ** 2),
        "alternating odd inverse squares",
    )


def zeta_series(k: int) -> SeriesSpec:
    if k < 2:
        raise ValueError("zeta(k) needs k >= 2")
    # sum_{j > M+1} j^-k <= 1/((k-1)(M+1)^(k-1)), so xi(x) = ceil((x+1)^(1/(k-1)))
    return _family_spec(
        f"zeta({k})",
        PowerFamily(1, 1, k, False),
        lambda x: iroot_ceil(x + 1, k - 1),
        lambda m: Fraction(1, (k - 1) * (m + 1) ** (k - 1)),
        f"sum of n^-{k}",
    )


def log_step_series(big_n: int) -> SeriesSpec:
    """ln(1 + 1/N) = sum_n (-1)^n / ((n+1) N^(n+1))."""
    if big_n < 1:
        raise ValueError("N must be positive")
    if big_n == 1:
        return _family_spec(
            "ln(2)",
            PowerFamily(1, 1, 1, True),
            lambda x: x,
            lambda m: Fraction(1, m + 2),
            "alternating harmonic series",
        )

    def alpha(n):
        return Fraction(-1 if n % 2 else 1, (n + 1) * big_n ** (n + 1))

    return SeriesSpec(
        f"ln(1+1/{big_n})",
        rational_terms(alpha),
        lambda x: x,
        provenance="logarithm series",
        # numerator is [(y+1)/d + 1/2] = 0 once d > 2(y+1)
        zero_from=lambda y: _first_exceeding(2 * (y + 1), lambda n: (n + 1) * big_n ** (n + 1)),
        exact_term=alpha,
        tail_after=lambda m: Fraction(1, (m + 2) * big_n ** (m + 2)),
    )


def gamma_inner_series(n: int) -> SeriesSpec:
    """1/(n+1) - ln(1 + 1/(n+1)) = sum_m (-1)^m / ((m+2)(n+1)^(m+2))."""
    if n == 0:
        return _family_spec(
            "1-ln(2)",
            PowerFamily(1, 2, 1, True),
            lambda x: x,
            lambda m: Fraction(1, m + 3),
            "alternating harmonic tail",
        )
    base = n + 1

    def alpha(m):
        return Fraction(-1 if m % 2 else 1, (m + 2) * base ** (m + 2))

    return SeriesSpec(
        f"gamma term {n}",
        rational_terms(alpha),
        lambda x: x,
        provenance="logarithm series",
        zero_from=lambda y: _first_exceeding(2 * (y + 1), lambda m: (m + 2) * base ** (m + 2)),
        exact_term=alpha,
        tail_after=lambda m: Fraction(1, (m + 3) * base ** (m + 3)),
    )


def gamma_series() -> SeriesSpec:
    """gamma = sum_n (1/(n+1) - ln(1 + 1/(n+1))); the tail after M is at most 1/(2(M+1))."""
    inner: Dict[int, CReal] = {}

    def term(n: int) -> CReal:
        t = inner.get(n)
        if t is None:
            t = inner[n] = skordev_sum(gamma_inner_series(n))
        return t

    return SeriesSpec(
        "gamma",
        creal_terms(term),
        lambda x: x,
        provenance="harmonic minus logarithm series",
        tail_after=lambda m: Fraction(1, 2 * (m + 1)),
    )


def _decimal_length(v: int) -> int:
    return len(str(v))


def liouville_series() -> SeriesSpec:
    def alpha(n):
        return Fraction(1, 10 ** math.factorial(n + 1))

    def f(y, n):
        e = math.factorial(n + 1)
        if e > _decimal_length(2 * (y + 1)):
            return 0
        return round_div(y + 1, 10**e - 1)

    def tail_after(m):
        e = math.factorial(m + 2) if m < 8 else 10**5
        return Fraction(2, 10 ** min(e, 10**5))

    return SeriesSpec(
        "liouville",
        F2Sequence(f, lambda y, n: 0, lambda y, n: y),
        lambda x: x,
        provenance="factorial-exponent decimal series",
        # 10^((n+1)!) > 2(y+1) as soon as (n+1)! reaches the digit count of 2(y+1)
        zero_from=lambda y: _first_exceeding(_decimal_length(2 * (y + 1)) - 1, lambda n: math.factorial(n + 1)),
        exact_term=alpha,
        tail_after=tail_after,
    )


def log_pi_series(zeta_of: Callable[[int], CReal]) -> SeriesSpec:
    """ln(pi/2) = sum_n zeta(2n+2) / ((n+1) 4^(n+1)); tail after M below 1/(6M+3)."""

    def weight(n):
        return Fraction(1, (n + 1) * 4 ** (n + 1))

    def value(y, n):
        r = weight(n)
        # need r * zeta within 1/(2(y+1)) before rounding to the 1/(y+1) grid
        if r * (y + 1) <= 1:
            return r * Fraction(3, 2)  # 1 < zeta < 2
        z = math.ceil(2 * r * (y + 1)) - 1
        return r * zeta_of(2 * n + 2).approx(z)

    def f(y, n):
        q = value(y, n)
        return round_div((y + 1) * q.numerator, q.denominator - 1)

    return SeriesSpec(
        "ln(pi/2)",
        F2Sequence(f, lambda y, n: 0, lambda y, n: y),
        lambda x: x,
        provenance="Wallis product logarithm series",
        # when r(y+1) <= 1 the numerator is [3r(y+1)/2 + 1/2], zero once 3(y+1) < (n+1)4^(n+1)
        zero_from=lambda y: _first_exceeding(3 * (y + 1), lambda n: (n + 1) * 4 ** (n + 1)),
        tail_after=lambda m: Fraction(1, 6 * m + 3),
    )


# ---------------------------------------------------------------- constants

@dataclass(frozen=True)
class ConstantId:
    kind: str  # e | pi | ln | catalan | gamma | liouville | zeta | lnpi
    param: int = 0

    _KINDS = ("e", "pi", "ln", "catalan", "gamma", "liouville", "zeta", "lnpi")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown constant {self.kind!r}")
        if self.kind == "zeta" and self.param < 2:
            raise ValueError("zeta:K needs K >= 2")
        if self.kind == "ln" and self.param < 1:
            raise ValueError("ln:N needs N >= 1")

    @classmethod
    def parse(cls, text: str) -> "ConstantId":
        name, _, arg = text.strip().lower().partition(":")
        if name in ("ln", "zeta"):
            if not arg.isdigit():
                raise ValueError(f"{name} needs an integer parameter, e.g. {name}:2")
            return cls(name, int(arg))
        if arg:
            raise ValueError(f"{name} takes no parameter")
        return cls(name)

    def __str__(self) -> str:
        return f"{self.kind}:{self.param}" if self.kind in ("ln", "zeta") else self.kind


def catalog_spec(cid: ConstantId) -> SeriesSpec:
    """The series behind a catalog constant (for pi: pi/4; for ln:N with N > 1: ln 2 step;
    for lnpi: ln(pi/2))."""
    if cid.kind == "e":
        return e_series()
    if cid.kind == "pi":
        return leibniz_series()
    if cid.kind == "ln":
        return log_step_series(max(cid.param - 1, 1))
    if cid.kind == "catalan":
        return catalan_series()
    if cid.kind == "gamma":
        return gamma_series()
    if cid.kind == "liouville":
        return liouville_series()
    if cid.kind == "zeta":
        return zeta_series(cid.param)
    return log_pi_series(lambda k: constant(ConstantId("zeta", k)))


@lru_cache(maxsize=None)
def constant(cid: ConstantId) -> CReal:
    """Catalog constant as a CReal with modulus 1/(x+1) (memoized per id)."""
    if cid.kind == "pi":
        quarter = skordev_sum(leibniz_series())
        out = _mul_constant(quarter, Fraction(4))
    elif cid.kind == "ln":
        if cid.param == 1:
            return from_rational(0)
        steps = [skordev_sum(log_step_series(k)) for k in range(1, cid.param)]
        out = steps[0] if len(steps) == 1 else sum_creals(steps)
    elif cid.kind == "lnpi":
        ln2 = constant(ConstantId("ln", 2))
        out = sum_creals([ln2, skordev_sum(catalog_spec(cid))])
    else:
        out = skordev_sum(catalog_spec(cid))
    out.provenance = catalog_spec(cid).provenance if cid.kind != "ln" else "logarithm series"
    out.cls = LOWER_ELEMENTARY
    return out


# ---------------------------------------------------------------- direct summation

@dataclass(frozen=True)
class SeriesSummary:
    value: Fraction
    rounding_error: Fraction
    tail_bound: Fraction
    terms: int

    @property
    def bound(self) -> Fraction:
        return self.rounding_error + self.tail_bound


def sum_exact_terms(spec: SeriesSpec, digits: int) -> SeriesSummary:
    """Sum the exact rational terms of ``spec`` until the tail bound drops below
    10^-digits / 2, accumulating on a dyadic grid with tracked rounding."""
    if spec.exact_term is None or spec.tail_after is None:
        raise ValueError(f"{spec.name} has no exact rational terms")
    target = Fraction(1, 2 * 10**digits)
    m = 0
    while spec.tail_after(m) > target:
        m = 2 * m + 1
    lo, hi = 0, m
    while lo < hi:
        mid = (lo + hi) // 2
        if spec.tail_after(mid) <= target:
            hi = mid
        else:
            lo = mid + 1
    m = lo
    precision = math.ceil(digits * math.log2(10)) + 1
    acc = TrackedAccumulator.for_budget(precision, m + 1)
    for n in range(m + 1):
        acc.absorb(spec.exact_term(n))
    return SeriesSummary(acc.value, acc.error_bound, spec.tail_after(m), m + 1)
