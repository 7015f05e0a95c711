"""F-sequences: rational sequences presented as (f(x) - g(x)) / (h(x) + 1).

The three component functions map naturals to naturals.  They can be term
trees from :mod:`periodica.terms` or plain callables; the ``cls`` tag records
which function class the presentation is claimed to live in.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from periodica.exact import monus
from periodica.terms import (
    LOWER_ELEMENTARY,
    ClassTag,
    Evaluator,
    FunctionTerm,
)

NatFn = Callable[..., int]
Component = Union[FunctionTerm, NatFn]


def _callable(fn: Component) -> NatFn:
    if isinstance(fn, FunctionTerm):
        ev = Evaluator()
        compiled = ev.compile(fn)
        return lambda *a: compiled(*a)
    return fn


def round_div(i: int, j: int) -> int:
    """C(i, j) = [i/(j+1) + 1/2], the half-up rounded quotient."""
    return (2 * i + j + 1) // (2 * (j + 1))


@dataclass(frozen=True)
class FSequence:
    f: NatFn
    g: NatFn
    h: NatFn
    cls: ClassTag = LOWER_ELEMENTARY

    @classmethod
    def of(cls, f: Component, g: Component, h: Component, tag: ClassTag = LOWER_ELEMENTARY) -> "FSequence":
        return cls(_callable(f), _callable(g), _callable(h), tag)

    @classmethod
    def constant(cls, q) -> "FSequence":
        q = Fraction(q)
        r, s = abs(q.numerator), q.denominator
        if q >= 0:
            return cls(lambda x: r, lambda x: 0, lambda x: s - 1)
        return cls(lambda x: 0, lambda x: r, lambda x: s - 1)

    def value(self, x: int) -> Fraction:
        return Fraction(self.f(x) - self.g(x), self.h(x) + 1)

    __call__ = value


def eval_fseq(s: FSequence, x: int) -> Fraction:
    return s.value(x)


def combine(a: FSequence, b: FSequence, op: str) -> FSequence:
    """Pointwise add, sub or mul, presented over the common denominator."""
    cls = a.cls.join(b.cls)

    def h(x):
        return (a.h(x) + 1) * (b.h(x) + 1) - 1

    if op in ("add", "sub"):
        bf, bg = (b.f, b.g) if op == "add" else (b.g, b.f)

        def f(x):
            return a.f(x) * (b.h(x) + 1) + bf(x) * (a.h(x) + 1)

        def g(x):
            return a.g(x) * (b.h(x) + 1) + bg(x) * (a.h(x) + 1)

    elif op == "mul":

        def f(x):
            return a.f(x) * b.f(x) + a.g(x) * b.g(x)

        def g(x):
            return a.f(x) * b.g(x) + a.g(x) * b.f(x)

    else:
        raise ValueError(f"unknown F-sequence operation {op!r}")
    return FSequence(f, g, h, cls)


def reciprocal_fseq(a: FSequence) -> FSequence:
    """1/A by exact inversion: (h+1) over |f-g|, with the sign moved to f or g."""

    def parts(x):
        f, g, h = a.f(x), a.g(x), a.h(x)
        if f == g:
            raise ZeroDivisionError(f"F-sequence value is 0 at x={x}; reciprocal undefined")
        return f, g, h

    def f(x):
        fx, gx, hx = parts(x)
        return hx + 1 if fx > gx else 0

    def g(x):
        fx, gx, hx = parts(x)
        return 0 if fx > gx else hx + 1

    def h(x):
        fx, gx, _ = parts(x)
        return abs(fx - gx) - 1

    return FSequence(f, g, h, a.cls)


def compose_reindex(a: FSequence, phi: NatFn, phi_cls: ClassTag = LOWER_ELEMENTARY) -> FSequence:
    return FSequence(
        lambda x: a.f(phi(x)), lambda x: a.g(phi(x)), lambda x: a.h(phi(x)), a.cls.join(phi_cls)
    )


def linear_reindex(c: int) -> NatFn:
    """x -> c*x + c.  If x*|A(x) - alpha| <= c then |A(cx+c) - alpha| <= 1/(x+1)."""
    if c < 1:
        raise ValueError("reindex constant must be positive")
    return lambda x: c * x + c


@dataclass(frozen=True)
class F2Sequence:
    f: NatFn
    g: NatFn
    h: NatFn
    cls: ClassTag = LOWER_ELEMENTARY

    def value(self, x: int, n: int) -> Fraction:
        return Fraction(self.f(x, n) - self.g(x, n), self.h(x, n) + 1)

    __call__ = value

    @classmethod
    def from_terms(cls, terms: Callable[[int], Fraction], tag: ClassTag = LOWER_ELEMENTARY) -> "F2Sequence":
        """Exact rational terms alpha(n), presented with error 0."""

        def f(x, n):
            q = Fraction(terms(n))
            return q.numerator if q > 0 else 0

        def g(x, n):
            q = Fraction(terms(n))
            return -q.numerator if q < 0 else 0

        def h(x, n):
            return Fraction(terms(n)).denominator - 1

        return cls(f, g, h, tag)


def _normalized(f0: NatFn, g0: NatFn, h0: NatFn, reindex: NatFn, cls: ClassTag) -> F2Sequence:
    def f(x, n):
        y = reindex(x)
        return round_div((x + 1) * monus(f0(y, n), g0(y, n)), h0(y, n))

    def g(x, n):
        y = reindex(x)
        return round_div((x + 1) * monus(g0(y, n), f0(y, n)), h0(y, n))

    return F2Sequence(f, g, lambda x, n: x, cls)


def normalize_denominator(a: F2Sequence) -> F2Sequence:
    """Equivalent presentation with h(x, n) = x.

    Query the input at 2x+1 (error 1/(2x+2)), then round (x+1) times its value
    to the nearest integer with C.  At most one of f0 -. g0 and g0 -. f0 is
    nonzero, so the rounding error is at most 1/2 and the new value stays
    within 1/(x+1) of the limit.
    """
    return _normalized(a.f, a.g, a.h, lambda x: 2 * x + 1, a.cls)


def strict_normalize(a: FSequence) -> FSequence:
    """Unary normalization with a strict modulus: |A(x) - alpha| < 1/(x+1).

    The input is queried at 2(x+1)+1, where its error is at most 1/(2x+4),
    strictly below 1/(2x+2); rounding adds at most 1/(2(x+1)).
    """
    two = _normalized(
        lambda x, n: a.f(x), lambda x, n: a.g(x), lambda x, n: a.h(x), lambda x: 2 * (x + 1) + 1, a.cls
    )
    return FSequence(lambda x: two.f(x, 0), lambda x: two.g(x, 0), lambda x: x, a.cls)
