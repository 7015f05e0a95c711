import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from periodica.fseq import (
    F2Sequence,
    FSequence,
    combine,
    compose_reindex,
    eval_fseq,
    linear_reindex,
    normalize_denominator,
    reciprocal_fseq,
    round_div,
    strict_normalize,
)
from periodica.terms import ELEMENTARY, LOWER_ELEMENTARY, builtin


def test_constant_presentation():
    s = FSequence.constant(Fraction(3, 7))
    assert all(eval_fseq(s, x) == Fraction(3, 7) for x in range(10))
    assert FSequence.constant(-2).value(4) == -2


def test_trivial_sequences():
    same = FSequence(lambda x: x, lambda x: x, lambda x: 5)
    assert all(same(x) == 0 for x in range(10))
    ident = FSequence(lambda x: x, lambda x: 0, lambda x: 0)
    assert [ident(x) for x in range(5)] == [0, 1, 2, 3, 4]


def test_terms_as_components():
    s = FSequence.of(builtin("sgn"), builtin("sgn"), builtin("sgn"))
    assert s.value(3) == 0


def test_combine_examples():
    half, third = FSequence.constant(Fraction(1, 2)), FSequence.constant(Fraction(1, 3))
    assert combine(half, third, "add")(0) == Fraction(5, 6)
    assert combine(half, half, "sub")(9) == 0
    two3, three2 = FSequence.constant(Fraction(2, 3)), FSequence.constant(Fraction(3, 2))
    assert combine(two3, three2, "mul")(1) == 1
    with pytest.raises(ValueError):
        combine(half, half, "div")


def test_combine_joins_classes():
    a = FSequence(lambda x: 1, lambda x: 0, lambda x: 0, ELEMENTARY)
    b = FSequence.constant(1)
    assert combine(a, b, "add").cls == ELEMENTARY
    assert combine(b, b, "mul").cls == LOWER_ELEMENTARY


def test_reciprocal_examples():
    assert reciprocal_fseq(FSequence.constant(Fraction(2, 3)))(5) == Fraction(3, 2)
    assert reciprocal_fseq(FSequence.constant(-5))(0) == Fraction(-1, 5)
    inv = reciprocal_fseq(FSequence(lambda x: x + 1, lambda x: 0, lambda x: 0))
    assert [inv(x) for x in range(4)] == [Fraction(1, x + 1) for x in range(4)]
    with pytest.raises(ZeroDivisionError):
        reciprocal_fseq(FSequence.constant(0))(0)


def test_reindex_examples():
    a = FSequence(lambda x: 1, lambda x: 0, lambda x: x)
    assert compose_reindex(a, lambda x: x)(4) == a(4)
    assert compose_reindex(a, lambda x: 2 * x + 1)(3) == Fraction(1, 8)
    assert compose_reindex(a, linear_reindex(3))(2) == a(9)
    with pytest.raises(ValueError):
        linear_reindex(0)


def _random_fseq(rng):
    f = [rng.randint(0, 50) for _ in range(8)]
    g = [rng.randint(0, 50) for _ in range(8)]
    h = [rng.randint(0, 9) for _ in range(8)]
    return FSequence(lambda x: f[x % 8], lambda x: g[x % 8], lambda x: h[x % 8])


def test_operations_pointwise_exact():
    rng = random.Random(7)
    for _ in range(20):
        a, b = _random_fseq(rng), _random_fseq(rng)
        add, sub, mul = combine(a, b, "add"), combine(a, b, "sub"), combine(a, b, "mul")
        for x in range(0, 500, 7):
            assert add(x) == a(x) + b(x)
            assert sub(x) == a(x) - b(x)
            assert mul(x) == a(x) * b(x)
            if a(x) != 0:
                assert reciprocal_fseq(a)(x) == 1 / a(x)
            assert compose_reindex(a, lambda t: 3 * t + 1)(x) == a(3 * x + 1)


def test_round_div_examples():
    assert round_div(0, 9) == 0
    assert round_div(7, 2) == 2
    assert round_div(5, 1) == 3


@given(st.integers(0, 10**12), st.integers(0, 10**6))
def test_round_div_half_bound(i, j):
    assert abs(round_div(i, j) - Fraction(i, j + 1)) <= Fraction(1, 2)


def _approx_of(alpha: Fraction, seed: int) -> F2Sequence:
    """(f - g)/(h + 1) within 1/(x+1) of alpha, with irregular denominators and offsets."""

    def parts(x, n):
        r = random.Random(seed * 7919 + x * 1009 + n)
        den = r.randint(2 * x + 2, 6 * x + 9)
        # offset up to 1/(2(x+1)), rounding adds at most 1/(2 den) <= 1/(4(x+1))
        off = Fraction(r.randint(-100, 100), 200 * (x + 1))
        num = round((alpha + off) * den)
        return num, den

    def f(x, n):
        num, _ = parts(x, n)
        return max(num, 0)

    def g(x, n):
        num, _ = parts(x, n)
        return max(-num, 0)

    return F2Sequence(f, g, lambda x, n: parts(x, n)[1] - 1)


def test_normalize_denominator_on_random_constants():
    rng = random.Random(11)
    for _ in range(100):
        alpha = Fraction(rng.randint(-400, 400), rng.randint(1, 60))
        src = _approx_of(alpha, rng.randint(0, 10**9))
        for x in range(0, 201, 5):
            assert abs(src(x, x % 3) - alpha) <= Fraction(1, x + 1)
        out = normalize_denominator(src)
        for x in range(0, 201):
            n = x % 3
            assert out.h(x, n) == x
            assert abs(out(x, n) - alpha) <= Fraction(1, x + 1)


def test_normalize_exact_constant_halves_error():
    third = F2Sequence.from_terms(lambda n: Fraction(1, 3))
    out = normalize_denominator(third)
    for x in range(101):
        assert abs(out(x, 0) - Fraction(1, 3)) <= Fraction(1, 2 * (x + 1))


def test_normalize_negative_branch_zeroes_f():
    neg = F2Sequence.from_terms(lambda n: Fraction(-5, 4))
    out = normalize_denominator(neg)
    assert all(out.f(x, 0) == 0 for x in range(50))


def test_strict_normalize():
    half = strict_normalize(FSequence.constant(Fraction(1, 2)))
    assert all(abs(half(x) - Fraction(1, 2)) < Fraction(1, x + 1) for x in range(200))
    # input with the worst allowed error: A(x) = alpha + 1/(x+1)
    alpha = Fraction(2, 7)
    worst = FSequence(lambda x: 2 * (x + 1) + 7, lambda x: 0, lambda x: 7 * (x + 1) - 1)
    assert all(worst(x) == alpha + Fraction(1, x + 1) for x in range(20))
    out = strict_normalize(worst)
    for x in range(300):
        assert out.h(x) == x
        assert abs(out(x) - alpha) < Fraction(1, x + 1)
    # the reindexed input error is 1/(2x+4) < 1/(2x+2)
    assert all(Fraction(1, 2 * (x + 1) + 2) < Fraction(1, 2 * (x + 1)) for x in range(100))
