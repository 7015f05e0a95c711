import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from periodica.creal import ResourceLimitError
from periodica.exact import RatInterval
from periodica.semialg import (
    BOUNDARY,
    INSIDE,
    OUTSIDE,
    Box,
    DimensionError,
    MPoly,
    PolySyntaxError,
    SemialgSet,
    SignCondition,
    VolumeRefiner,
    classify_box,
    integrate,
    log_region,
    parse_mpoly,
    parse_set,
    period_catalog,
    set_algebra,
    unit_disk,
    volume_bounds,
    volume_creal,
    volume_nested,
)

PI = Fraction(oracles.PI)
LN2 = Fraction(oracles.LN2)
QUARTER_DISK = parse_set("vars 2\nx1 > 0 & x2 > 0 & 1 - x1^2 - x2^2 > 0")
UNIT_SQUARE = Box.of((0, 1), (0, 1))


def _rect(nvars, bounds):
    conds = []
    for i, (lo, hi) in enumerate(bounds):
        x = MPoly.var(nvars, i)
        conds += [SignCondition(x - lo, "gt"), SignCondition(hi - x, "gt")]
    return SemialgSet(nvars, (tuple(conds),))


# ---------------------------------------------------------------- polynomials and parsing

def test_parse_mpoly_and_evaluate():
    p = parse_mpoly("1 - x1^2 - 3/2 x1 x2 + (x2 - 1)^2", ["x1", "x2"])
    assert p((Fraction(1, 2), 2)) == 1 - Fraction(1, 4) - Fraction(3, 2) + 1
    assert parse_mpoly("x1 - x1", ["x1"]).is_zero()
    assert parse_mpoly("7", ["x1"]).constant_value() == 7


@pytest.mark.parametrize("text", ["x1 +", "x3", "x1^", "(x1", "x1 ^ x1"])
def test_parse_mpoly_errors(text):
    with pytest.raises(PolySyntaxError):
        parse_mpoly(text, ["x1", "x2"])


def test_parse_set_errors():
    with pytest.raises(PolySyntaxError):
        parse_set("x1 > 0")
    with pytest.raises(PolySyntaxError):
        parse_set("vars 1\nx1 < 0")
    with pytest.raises(PolySyntaxError):
        parse_set("# nothing\n")


def test_example_set_files_parse():
    from pathlib import Path

    root = Path(__file__).resolve().parent.parent / "sets"
    assert parse_set((root / "quarter_disk.sa").read_text()) == QUARTER_DISK
    assert parse_set((root / "log_region.sa").read_text()).nvars == 2
    assert parse_set((root / "unit_interval.sa").read_text()).nvars == 1


def test_dimension_errors():
    with pytest.raises(DimensionError):
        SemialgSet(2, ((SignCondition(MPoly.var(1, 0), "gt"),),))
    with pytest.raises(DimensionError):
        set_algebra(unit_disk(), _rect(1, [(0, 1)]), "union")
    with pytest.raises(DimensionError):
        classify_box(unit_disk(), Box.of((0, 1)))
    with pytest.raises(DimensionError):
        volume_bounds(unit_disk(), Box.of((0, 1)), 3)


# ---------------------------------------------------------------- set algebra

def test_union_with_empty_is_identity():
    assert set_algebra(unit_disk(), SemialgSet.empty(2), "union") == unit_disk()


def test_complement_of_positive_half_line():
    x = MPoly.var(1, 0)
    c = set_algebra(SemialgSet(1, ((SignCondition(x, "gt"),),)), None, "complement")
    assert c == SemialgSet(1, ((SignCondition(x, "eq"),), (SignCondition(-x, "gt"),)))
    for v in (-2, 0, Fraction(1, 3)):
        assert c.contains((v,)) == (not v > 0)


def test_complement_of_everything_and_empty():
    assert set_algebra(SemialgSet.everything(2), None, "complement") == SemialgSet.empty(2)
    assert set_algebra(SemialgSet.empty(2), None, "complement") == SemialgSet.everything(2)


def test_product_concatenates_variables():
    p = set_algebra(unit_disk(), _rect(1, [(0, 1)]), "product")
    assert p.nvars == 3
    assert p.contains((0, 0, Fraction(1, 2)))
    assert not p.contains((0, 0, 2))
    assert not p.contains((1, 1, Fraction(1, 2)))


def test_set_algebra_rejects_unknown_op():
    with pytest.raises(ValueError):
        set_algebra(unit_disk(), unit_disk(), "xor")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=6))
def test_boolean_ops_pointwise(points):
    a = unit_disk()
    b = _rect(2, [(0, 2), (-1, 1)])
    u = set_algebra(a, b, "union")
    i = set_algebra(a, b, "intersect")
    ca = set_algebra(a, None, "complement")
    for px, py in points:
        pt = (Fraction(px, 3), Fraction(py, 3))
        assert u.contains(pt) == (a.contains(pt) or b.contains(pt))
        assert i.contains(pt) == (a.contains(pt) and b.contains(pt))
        assert ca.contains(pt) == (not a.contains(pt))


# ---------------------------------------------------------------- classify_box

def test_classify_box_examples():
    d = unit_disk()
    assert classify_box(d, Box.of((0, Fraction(1, 4)), (0, Fraction(1, 4)))) == INSIDE
    assert classify_box(d, Box.of((2, 3), (2, 3))) == OUTSIDE
    assert classify_box(d, Box.of((Fraction(1, 2), 1), (Fraction(1, 2), 1))) == BOUNDARY


def test_almost_everywhere_reading_certifies_faces():
    half_line = _rect(1, [(0, 2)])
    box = Box.of((0, 1))
    assert classify_box(half_line, box) == BOUNDARY
    assert classify_box(half_line, box, almost_everywhere=True) == INSIDE
    assert classify_box(half_line, Box.of((-1, 0)), almost_everywhere=True) == OUTSIDE


def _random_set(rng):
    clauses = []
    for _ in range(rng.randint(1, 2)):
        conds = []
        for _ in range(rng.randint(1, 3)):
            terms = {}
            for _ in range(rng.randint(1, 4)):
                e = (rng.randint(0, 2), rng.randint(0, 2))
                terms[e] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
            conds.append(SignCondition(MPoly(2, terms), "gt"))
        clauses.append(tuple(conds))
    return SemialgSet(2, tuple(clauses))


def _random_box(rng):
    sides = []
    for _ in range(2):
        lo = Fraction(rng.randint(-16, 15), 8)
        sides.append((lo, lo + Fraction(rng.randint(1, 8), 16)))
    return Box.of(*sides)


def test_classify_box_soundness_random():
    rng = random.Random(7)
    checked = {INSIDE: 0, OUTSIDE: 0}
    for _ in range(10_000):
        s, box = _random_set(rng), _random_box(rng)
        status = classify_box(s, box)
        if status == BOUNDARY:
            continue
        pt = tuple(side.lo + (side.hi - side.lo) * Fraction(rng.randint(0, 64), 64) for side in box.sides)
        assert s.contains(pt) == (status == INSIDE)
        checked[status] += 1
    assert checked[INSIDE] > 100 and checked[OUTSIDE] > 100


def test_grid_refiner_agrees_with_classify_box():
    rng = random.Random(11)
    for _ in range(40):
        s = _random_set(rng)
        domain = Box.of((-1, Fraction(3, 2)), (Fraction(-1, 2), 1))
        r = VolumeRefiner(s, domain)
        for _ in range(3):
            before = r.pending
            r.refine()
            kids = [c for b in before for c in b.halves()]
            expected = [c for c in kids if classify_box(s, c, almost_everywhere=True) == BOUNDARY]
            assert sorted(map(str, r.pending)) == sorted(map(str, expected))


# ---------------------------------------------------------------- volumes

def test_volume_empty_set():
    x = MPoly.var(1, 0)
    empty = SemialgSet(1, ((SignCondition(x, "gt"), SignCondition(-x, "gt")),))
    r = volume_bounds(empty, Box.of((-1, 1)), 1)
    assert r.lower == r.upper == 0 and r.depth == 1


def test_volume_full_box_at_depth_zero():
    r = volume_bounds(SemialgSet.everything(2), Box.of((0, 3), (Fraction(1, 2), 1)), 0)
    assert r.lower == r.upper == Fraction(3, 2) and r.depth == 0


def test_volume_rational_rectangle_exact_at_depth_zero():
    rect = _rect(2, [(0, Fraction(1, 3)), (Fraction(1, 5), 1)])
    r = volume_bounds(rect, Box.of((0, Fraction(1, 3)), (Fraction(1, 5), 1)), 0)
    assert r.lower == r.upper == Fraction(4, 15)
    a = volume_creal(rect, Box.of((0, Fraction(1, 3)), (Fraction(1, 5), 1)))
    assert a.approx(10**6) == Fraction(4, 15)


def test_volume_rejects_equalities():
    with pytest.raises(ValueError):
        volume_bounds(parse_set("vars 1\nx1 = 0"), Box.of((-1, 1)), 3)


def test_quarter_disk_depth_12():
    r = volume_bounds(QUARTER_DISK, UNIT_SQUARE, 12)
    assert r.lower <= PI / 4 <= r.upper
    assert r.width <= Fraction(1, 1000)


def test_monotone_refinement():
    for s, box in [(QUARTER_DISK, UNIT_SQUARE), log_region(Fraction(5, 2)), (unit_disk(), Box.of((-1, 1), (-1, 1)))]:
        r = VolumeRefiner(s, box)
        prev = r.result()
        for _ in range(9):
            r.refine()
            cur = r.result()
            assert prev.lower <= cur.lower <= cur.upper <= prev.upper
            prev = cur


def test_volume_nested_brackets_pi_over_4():
    ni = volume_nested(QUARTER_DISK, UNIT_SQUARE, 10)
    for x in range(11):
        assert ni.f(x) <= ni.f(x + 1) <= PI / 4 <= ni.g(x + 1) <= ni.g(x)


def test_boolean_consistency_rectangles():
    rng = random.Random(3)
    box = Box.of((0, 1), (0, 1))
    for _ in range(20):
        def rnd():
            a, b = sorted(rng.sample(range(0, 9), 2))
            c, d = sorted(rng.sample(range(0, 9), 2))
            return _rect(2, [(Fraction(a, 8), Fraction(b, 8)), (Fraction(c, 8), Fraction(d, 8))])

        x, y = rnd(), rnd()
        vol = lambda s: volume_bounds(s, box, 4)
        u, i, vx, vy = vol(set_algebra(x, y, "union")), vol(set_algebra(x, y, "intersect")), vol(x), vol(y)
        assert u.width == i.width == vx.width == vy.width == 0
        assert u.lower + i.lower == vx.lower + vy.lower


def test_boolean_consistency_disk_pair():
    box = Box.of((-1, 2), (-1, 1))
    x = unit_disk()
    y = parse_set("vars 2\n1 - (x1 - 1)^2 - x2^2 > 0")
    vol = lambda s: volume_bounds(s, box, 7)
    u, i, vx, vy = vol(set_algebra(x, y, "union")), vol(set_algebra(x, y, "intersect")), vol(x), vol(y)
    slack = u.width + i.width + vx.width + vy.width
    assert abs((u.lower + i.lower) - (vx.lower + vy.lower)) <= slack
    assert abs((u.upper + i.upper) - (vx.upper + vy.upper)) <= slack


def test_volume_creal_modulus_and_depth_guard():
    a = volume_creal(QUARTER_DISK, UNIT_SQUARE, 14)
    for x in (0, 1, 10, 100, 999):
        assert oracles.within(a.approx(x), PI / 4, 0, Fraction(1, x + 1))
    shallow = volume_creal(QUARTER_DISK, UNIT_SQUARE, 3)
    with pytest.raises(ResourceLimitError):
        shallow.approx(10**4)


# ---------------------------------------------------------------- integrals and periods

def _poly(text, n=1):
    return parse_mpoly(text, [f"x{i + 1}" for i in range(n)])


def test_integrate_one_over_unit_interval():
    s = parse_set("vars 1\nx1 > 0 & 1 - x1 > 0")
    a = integrate(s, _poly("1"), _poly("1"), Box.of((0, 1)))
    for x in (0, 10, 200):
        assert abs(a.approx(x) - 1) <= Fraction(1, x + 1)


def test_integrate_reciprocal_gives_ln2():
    s = parse_set("vars 1\nx1 - 1 > 0 & 2 - x1 > 0")
    a = integrate(s, _poly("1"), _poly("x1"), Box.of((1, 2)))
    for x in (0, 10, 999):
        assert oracles.within(a.approx(x), LN2, oracles.ORACLE_ERROR, Fraction(1, x + 1))


def test_integrate_negative_branch():
    s = parse_set("vars 1\nx1 > 0 & 1 - x1 > 0")
    a = integrate(s, _poly("x1^2 - x1"), _poly("1"), Box.of((0, 1)))
    for x in (0, 10, 999):
        assert abs(a.approx(x) + Fraction(1, 6)) <= Fraction(1, x + 1)


def test_integrate_one_matches_volume():
    s, box = log_region(2)
    one = MPoly.constant(2, 1)
    via_integral = integrate(s, one, one, box, 14)
    via_volume = volume_creal(s, box, 14)
    for x in (0, 3, 10):
        bound = via_integral.modulus(x) + via_volume.modulus(x)
        assert abs(via_integral.approx(x) - via_volume.approx(x)) <= bound


def test_integrate_rejects_sign_changing_denominator():
    s = parse_set("vars 1\nx1 + 1 > 0 & 1 - x1 > 0")
    with pytest.raises(ValueError):
        integrate(s, _poly("1"), _poly("x1"), Box.of((-1, 1)))
    with pytest.raises(DimensionError):
        integrate(s, _poly("1", 2), _poly("1"), Box.of((-1, 1)))


def test_period_catalog():
    pi = period_catalog("PiDisk")
    ln2 = period_catalog("LnRho", 2)
    for x in (0, 10, 999):
        assert oracles.within(pi.approx(x), PI, oracles.ORACLE_ERROR, Fraction(1, x + 1))
        assert oracles.within(ln2.approx(x), LN2, oracles.ORACLE_ERROR, Fraction(1, x + 1))
    with pytest.raises(ValueError):
        period_catalog("LnRho", 1)
    with pytest.raises(ValueError):
        period_catalog("LnRho")
    with pytest.raises(ValueError):
        period_catalog("Zeta2")


def test_box_helpers():
    b = Box.parse("-1/2,1;0,2")
    assert b.volume() == 3 and b.nvars == 2
    assert len(b.halves()) == 4 and sum(h.volume() for h in b.halves()) == 3
    lo, hi = b.bisect_widest()
    assert lo.sides[1] == RatInterval(0, 1) and hi.sides[1] == RatInterval(1, 2)
    with pytest.raises(ValueError):
        Box.parse("1,1")
