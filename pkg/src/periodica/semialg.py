"""Semialgebraic sets over Q and certified volumes by box subdivision.

A set is a finite union of conjunctions of sign conditions ``p = 0`` or
``p > 0`` with rational polynomials.  Volumes are bracketed by classifying
boxes with interval arithmetic: boxes proven inside count toward both bounds,
undecided boxes are split and, at the depth limit, count toward the upper
bound only.
"""

from __future__ import annotations

import itertools
import re
from math import gcd as _gcd
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from periodica.creal import CReal, ModulusKind, ResourceLimitError, arith
from periodica.exact import RatInterval, ceil_rat
from periodica.terms import LOWER_ELEMENTARY

Exponents = Tuple[int, ...]


class DimensionError(ValueError):
    pass


class PolySyntaxError(ValueError):
    pass


# ---------------------------------------------------------------- polynomials

class MPoly:
    """Multivariate polynomial with rational coefficients; zero terms are dropped."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Optional[Dict[Exponents, Fraction]] = None):
        self.nvars = nvars
        clean: Dict[Exponents, Fraction] = {}
        for e, c in (terms or {}).items():
            if len(e) != nvars:
                raise DimensionError(f"exponent {e} does not have {nvars} entries")
            c = Fraction(c)
            if c:
                clean[tuple(e)] = clean.get(tuple(e), Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    @classmethod
    def constant(cls, nvars: int, c) -> "MPoly":
        return cls(nvars, {(0,) * nvars: Fraction(c)})

    @classmethod
    def var(cls, nvars: int, i: int) -> "MPoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def constant_value(self) -> Optional[Fraction]:
        if not self.terms:
            return Fraction(0)
        if set(self.terms) == {(0,) * self.nvars}:
            return self.terms[(0,) * self.nvars]
        return None

    def _check(self, other: "MPoly"):
        if other.nvars != self.nvars:
            raise DimensionError(f"polynomials in {self.nvars} and {other.nvars} variables")

    def __add__(self, other):
        other = _as_poly(other, self.nvars)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return MPoly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other, self.nvars))

    def __rsub__(self, other):
        return _as_poly(other, self.nvars) - self

    def __mul__(self, other):
        other = _as_poly(other, self.nvars)
        self._check(other)
        out: Dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return MPoly(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = MPoly.constant(self.nvars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, MPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def extend(self, nvars: int, offset: int = 0) -> "MPoly":
        """Same polynomial viewed in ``nvars`` variables, its own starting at ``offset``."""
        if offset + self.nvars > nvars:
            raise DimensionError("extension too small")
        pad = nvars - offset - self.nvars
        return MPoly(nvars, {(0,) * offset + e + (0,) * pad: c for e, c in self.terms.items()})

    def __call__(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for xi, k in zip(point, e):
                if k:
                    v *= Fraction(xi) ** k
            total += v
        return total

    def enclose(self, box: "Box") -> RatInterval:
        lo, hi = _enclose(self.terms.items(), [(s.lo, s.hi) for s in box.sides])
        return RatInterval(lo, hi)

    def __str__(self) -> str:
        return format_mpoly(self)

    def __repr__(self) -> str:
        return f"MPoly({self.nvars}, {format_mpoly(self)!r})"


def _as_poly(v, nvars: int) -> MPoly:
    return v if isinstance(v, MPoly) else MPoly.constant(nvars, v)


def _pow_bounds(lo: Fraction, hi: Fraction, k: int) -> Tuple[Fraction, Fraction]:
    a, b = lo**k, hi**k
    if k % 2 == 1 or lo >= 0:
        return a, b
    if hi <= 0:
        return b, a
    return Fraction(0), max(a, b)


def _enclose(terms: Iterable, sides: List[Tuple[Fraction, Fraction]]) -> Tuple[Fraction, Fraction]:
    """Interval enclosure, term by term, of a polynomial over a box."""
    total_lo = total_hi = Fraction(0)
    for e, c in terms:
        lo = hi = c
        for (slo, shi), k in zip(sides, e):
            if not k:
                continue
            plo, phi = _pow_bounds(slo, shi, k)
            p = (lo * plo, lo * phi, hi * plo, hi * phi)
            lo, hi = min(p), max(p)
        total_lo += lo
        total_hi += hi
    return total_lo, total_hi


def format_mpoly(p: MPoly, names: Optional[Sequence[str]] = None) -> str:
    names = names or [f"x{i + 1}" for i in range(p.nvars)]
    if not p.terms:
        return "0"
    parts = []
    for e in sorted(p.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
        c = p.terms[e]
        mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
        mag = abs(c)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = str(mag)
        parts.append(("-" if c < 0 else "+", body))
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return head + "".join(f" {s} {b}" for s, b in parts[1:])


_PTOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def parse_mpoly(text: str, names: Sequence[str]) -> MPoly:
    """Parse a polynomial in the given variable names.

    Grammar: sums and differences of products of factors; a factor is a
    number, a variable or a parenthesized polynomial, optionally raised to a
    natural power with ``^``.  ``*`` may be omitted (``2x1``), and ``/`` is
    allowed with a nonzero constant divisor.
    """
    n = len(names)
    index = {name: i for i, name in enumerate(names)}
    tokens: List[Tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _PTOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        if m.group(1):
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3):
            tokens.append(("sym", m.group(3), m.start(3)))
        pos = m.end()
    k = 0

    def peek():
        return tokens[k] if k < len(tokens) else ("eof", "", len(text))

    def take():
        nonlocal k
        t = peek()
        k += 1
        return t

    def expr() -> MPoly:
        sign = 1
        if peek()[:2] in (("sym", "-"), ("sym", "+")):
            sign = -1 if take()[1] == "-" else 1
        acc = term() * sign
        while peek()[:2] in (("sym", "+"), ("sym", "-")):
            op = take()[1]
            t = term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term() -> MPoly:
        acc = factor()
        while True:
            kind, val, _ = peek()
            if kind == "sym" and val == "*":
                take()
                acc = acc * factor()
            elif kind == "sym" and val == "/":
                take()
                d = factor().constant_value()
                if d is None or d == 0:
                    raise PolySyntaxError("division is only allowed by a nonzero constant")
                acc = acc * MPoly.constant(n, 1 / d)
            elif kind in ("num", "name") or (kind == "sym" and val == "("):
                acc = acc * factor()
            else:
                return acc

    def factor() -> MPoly:
        base = atom()
        if peek()[:2] == ("sym", "^"):
            take()
            kind, val, p = take()
            if kind != "num":
                raise PolySyntaxError(f"expected a natural exponent at position {p}")
            base = base ** int(val)
        return base

    def atom() -> MPoly:
        kind, val, p = take()
        if kind == "num":
            return MPoly.constant(n, int(val))
        if kind == "name":
            if val not in index:
                raise PolySyntaxError(f"unknown variable {val!r} at position {p}")
            return MPoly.var(n, index[val])
        if kind == "sym" and val == "(":
            inner = expr()
            kind, val, p = take()
            if (kind, val) != ("sym", ")"):
                raise PolySyntaxError(f"expected ')' at position {p}")
            return inner
        if kind == "sym" and val == "-":
            return -factor()
        raise PolySyntaxError(f"unexpected {val or 'end of input'!r} at position {p}")

    out = expr()
    kind, val, p = peek()
    if kind != "eof":
        raise PolySyntaxError(f"unexpected {val!r} at position {p}")
    return out


# ---------------------------------------------------------------- sets

@dataclass(frozen=True)
class SignCondition:
    poly: MPoly
    relation: str  # "eq" (p = 0) or "gt" (p > 0)

    def __post_init__(self):
        if self.relation not in ("eq", "gt"):
            raise ValueError("relation must be 'eq' or 'gt'")

    def holds(self, point: Sequence) -> bool:
        v = self.poly(point)
        return v == 0 if self.relation == "eq" else v > 0

    def negation(self) -> Tuple["SignCondition", "SignCondition"]:
        """(f = 0)^c = (f > 0) or (-f > 0); (g > 0)^c = (g = 0) or (-g > 0)."""
        if self.relation == "eq":
            return SignCondition(self.poly, "gt"), SignCondition(-self.poly, "gt")
        return SignCondition(self.poly, "eq"), SignCondition(-self.poly, "gt")

    def constant_truth(self) -> Optional[bool]:
        c = self.poly.constant_value()
        if c is None:
            return None
        return c == 0 if self.relation == "eq" else c > 0

    def __str__(self) -> str:
        return f"{self.poly} {'=' if self.relation == 'eq' else '>'} 0"


Clause = Tuple[SignCondition, ...]


@dataclass(frozen=True)
class SemialgSet:
    """Union over clauses of the conjunction of their conditions.

    An empty clause list is the empty set; an empty clause is all of R^n.
    """

    nvars: int
    dnf: Tuple[Clause, ...]

    def __post_init__(self):
        dnf = []
        for clause in self.dnf:
            kept = []
            dead = False
            for c in clause:
                if c.poly.nvars != self.nvars:
                    raise DimensionError(f"condition {c} is not in {self.nvars} variables")
                truth = c.constant_truth()
                if truth is False:
                    dead = True
                    break
                if truth is None and c not in kept:
                    kept.append(c)
            if not dead:
                dnf.append(tuple(kept))
        object.__setattr__(self, "dnf", tuple(dnf))

    @classmethod
    def empty(cls, nvars: int) -> "SemialgSet":
        return cls(nvars, ())

    @classmethod
    def everything(cls, nvars: int) -> "SemialgSet":
        return cls(nvars, ((),))

    def contains(self, point: Sequence) -> bool:
        return any(all(c.holds(point) for c in clause) for clause in self.dnf)

    def has_equalities(self) -> bool:
        return any(c.relation == "eq" for clause in self.dnf for c in clause)

    def lift(self, nvars: int, offset: int = 0) -> "SemialgSet":
        return SemialgSet(
            nvars,
            tuple(tuple(SignCondition(c.poly.extend(nvars, offset), c.relation) for c in cl) for cl in self.dnf),
        )

    def __str__(self) -> str:
        lines = [f"vars {self.nvars}"]
        for clause in self.dnf:
            lines.append(" & ".join(str(c) for c in clause) if clause else "1 > 0")
        return "\n".join(lines)


def set_algebra(a: SemialgSet, b: Optional[SemialgSet], op: str) -> SemialgSet:
    """union, intersect, complement (of ``a``; ``b`` ignored) or product."""
    if op == "complement":
        clauses: List[Clause] = [()]
        for clause in a.dnf:
            if not clause:
                return SemialgSet.empty(a.nvars)
            options = [alt for c in clause for alt in c.negation()]
            clauses = [cl + (o,) for cl in clauses for o in options]
        return SemialgSet(a.nvars, tuple(clauses))
    if b is None:
        raise ValueError(f"{op} needs two sets")
    if op == "product":
        n = a.nvars + b.nvars
        la, lb = a.lift(n, 0), b.lift(n, a.nvars)
        return SemialgSet(n, tuple(x + y for x, y in itertools.product(la.dnf, lb.dnf)))
    if a.nvars != b.nvars:
        raise DimensionError(f"sets in {a.nvars} and {b.nvars} variables")
    if op == "union":
        return SemialgSet(a.nvars, a.dnf + b.dnf)
    if op == "intersect":
        return SemialgSet(a.nvars, tuple(x + y for x, y in itertools.product(a.dnf, b.dnf)))
    raise ValueError(f"unknown set operation {op!r}")


def parse_set(text: str) -> SemialgSet:
    """Read the text format: a ``vars n`` header, then one clause per line with
    ``&``-separated atoms ``poly > 0`` or ``poly = 0`` over x1..xn.  Blank lines
    and ``#`` comments are ignored."""
    nvars: Optional[int] = None
    clauses: List[Clause] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if nvars is None:
            m = re.fullmatch(r"vars\s+(\d+)", line)
            if not m:
                raise PolySyntaxError(f"line {lineno}: expected header 'vars n'")
            nvars = int(m.group(1))
            names = [f"x{i + 1}" for i in range(nvars)]
            continue
        atoms = []
        for atom in line.split("&"):
            m = re.fullmatch(r"(.+?)\s*(>|=)\s*(.+)", atom.strip())
            if not m:
                raise PolySyntaxError(f"line {lineno}: atom {atom.strip()!r} needs '> 0' or '= 0'")
            try:
                lhs = parse_mpoly(m.group(1), names)
                rhs = parse_mpoly(m.group(3), names)
            except PolySyntaxError as exc:
                raise PolySyntaxError(f"line {lineno}: {exc}") from None
            atoms.append(SignCondition(lhs - rhs, "gt" if m.group(2) == ">" else "eq"))
        clauses.append(tuple(atoms))
    if nvars is None:
        raise PolySyntaxError("missing 'vars n' header")
    return SemialgSet(nvars, tuple(clauses))


# ---------------------------------------------------------------- boxes

@dataclass(frozen=True)
class Box:
    sides: Tuple[RatInterval, ...]

    def __post_init__(self):
        object.__setattr__(self, "sides", tuple(self.sides))

    @classmethod
    def of(cls, *bounds) -> "Box":
        return cls(tuple(RatInterval(lo, hi) for lo, hi in bounds))

    @classmethod
    def parse(cls, text: str) -> "Box":
        """``"lo,hi;lo,hi"`` with rational endpoints such as ``-1/2``."""
        sides = []
        for part in text.split(";"):
            lo, hi = (Fraction(s.strip()) for s in part.split(","))
            if lo >= hi:
                raise ValueError(f"empty or degenerate side {part!r}")
            sides.append(RatInterval(lo, hi))
        return cls(tuple(sides))

    @property
    def nvars(self) -> int:
        return len(self.sides)

    def volume(self) -> Fraction:
        v = Fraction(1)
        for s in self.sides:
            v *= s.width
        return v

    def halves(self) -> List["Box"]:
        """All 2^n boxes obtained by halving every side."""
        choices = [(RatInterval(s.lo, s.mid), RatInterval(s.mid, s.hi)) for s in self.sides]
        return [Box(c) for c in itertools.product(*choices)]

    def bisect_widest(self) -> Tuple["Box", "Box"]:
        i = max(range(self.nvars), key=lambda j: (self.sides[j].width, -j))
        s = self.sides[i]
        left = self.sides[:i] + (RatInterval(s.lo, s.mid),) + self.sides[i + 1:]
        right = self.sides[:i] + (RatInterval(s.mid, s.hi),) + self.sides[i + 1:]
        return Box(left), Box(right)

    def contains(self, point: Sequence) -> bool:
        return all(s.lo <= p <= s.hi for s, p in zip(self.sides, point))


INSIDE, OUTSIDE, BOUNDARY = "Inside", "Outside", "Boundary"


def _atom_status(c: SignCondition, sides, almost_everywhere: bool = False) -> Optional[bool]:
    """True: holds on the whole box; False: fails on the whole box; None: undecided.

    With ``almost_everywhere`` a nonconstant p with p >= 0 on the box counts as
    p > 0, since the zero set of a nonzero polynomial has measure zero.
    """
    if c.relation == "eq":
        if c.poly.is_zero():
            return True
        lo, hi = _enclose(c.poly.terms.items(), sides)
        return False if lo > 0 or hi < 0 else None
    lo, hi = _enclose(c.poly.terms.items(), sides)
    if lo > 0 or (almost_everywhere and lo == 0 and hi > 0):
        return True
    if hi <= 0:
        return False
    return None


def classify_box(s: SemialgSet, box: Box, almost_everywhere: bool = False) -> str:
    """Inside, Outside or Boundary, certified by interval enclosures.

    ``almost_everywhere`` certifies up to a null set, which is what volumes need.
    """
    if box.nvars != s.nvars:
        raise DimensionError("box and set dimensions differ")
    sides = [(b.lo, b.hi) for b in box.sides]
    all_out = True
    for clause in s.dnf:
        statuses = [_atom_status(c, sides, almost_everywhere) for c in clause]
        if all(st is True for st in statuses):
            return INSIDE
        if not any(st is False for st in statuses):
            all_out = False
    return OUTSIDE if all_out else BOUNDARY


# ---------------------------------------------------------------- volumes

@dataclass(frozen=True)
class VolumeResult:
    lower: Fraction
    upper: Fraction
    depth: int
    cells_classified: int

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


def _int_pow_bounds(lo: int, hi: int, k: int) -> Tuple[int, int]:
    a, b = lo**k, hi**k
    if k % 2 == 1 or lo >= 0:
        return a, b
    if hi <= 0:
        return b, a
    return 0, max(a, b)


class _GridAtom:
    """A strict condition p > 0 evaluated on integer grid coordinates, up to null sets.

    With x_i = N_i / D, the integer polynomial sum_e c_e D^(d-|e|) prod N_i^e_i is
    p(x) times the positive constant (lcm of denominators) * D^d, so its sign
    and its term-by-term enclosure decide exactly what the rational one does.
    """

    def __init__(self, poly: MPoly):
        scale = 1
        for c in poly.terms.values():
            scale = scale * c.denominator // _gcd(scale, c.denominator)
        self.terms = [(int(c * scale), e, sum(e)) for e, c in poly.terms.items()]
        self.degree = max((t[2] for t in self.terms), default=0)
        self.scaled: List[Tuple[int, Exponents]] = []

    def set_denominator(self, d: int) -> None:
        self.scaled = [(c * d ** (self.degree - deg), e) for c, e, deg in self.terms]

    def status(self, cell: Tuple[int, ...]) -> Optional[bool]:
        total_lo = total_hi = 0
        for c, e in self.scaled:
            lo = hi = c
            for i, k in enumerate(e):
                if not k:
                    continue
                plo, phi = _int_pow_bounds(cell[2 * i], cell[2 * i + 1], k)
                p = (lo * plo, lo * phi, hi * plo, hi * phi)
                lo, hi = min(p), max(p)
            total_lo += lo
            total_hi += hi
        if total_hi <= 0:
            return False
        # p >= 0 on the cell means p > 0 off a null set
        if total_lo >= 0:
            return True
        return None


class VolumeRefiner:
    """Incremental subdivision state; each :meth:`refine` halves every side of
    every undecided cell.  Lower bounds only grow and upper bounds only shrink.

    Cells live on the integer grid of spacing 1/D with D = base * 2^depth, so
    classification runs on integers; it agrees with :func:`classify_box` in its
    almost-everywhere reading.
    """

    def __init__(self, s: SemialgSet, domain: Box):
        if s.has_equalities():
            raise ValueError("volume needs a description by strict inequalities only")
        if domain.nvars != s.nvars:
            raise DimensionError("domain and set dimensions differ")
        self.set = s
        self.domain = domain
        self.depth = 0
        self.inside = Fraction(0)
        self.cells_classified = 0
        base = 1
        for side in domain.sides:
            for v in (side.lo, side.hi):
                base = base * v.denominator // _gcd(base, v.denominator)
        self._den = base
        self._clauses = [[_GridAtom(c.poly) for c in clause] for clause in s.dnf]
        cell = tuple(int(v * base) for side in domain.sides for v in (side.lo, side.hi))
        self._cell_volume = domain.volume()
        self.pending_cells: List[Tuple[int, ...]] = []
        self._absorb([cell])

    def _classify(self, cell: Tuple[int, ...]) -> str:
        all_out = True
        for clause in self._clauses:
            decided_false = False
            all_true = True
            for atom in clause:
                st = atom.status(cell)
                if st is False:
                    decided_false = True
                    break
                if st is None:
                    all_true = False
            if decided_false:
                continue
            if all_true:
                return INSIDE
            all_out = False
        return OUTSIDE if all_out else BOUNDARY

    def _absorb(self, cells: List[Tuple[int, ...]]) -> None:
        for clause in self._clauses:
            for atom in clause:
                atom.set_denominator(self._den)
        pending = []
        inside = 0
        for cell in cells:
            status = self._classify(cell)
            if status == INSIDE:
                inside += 1
            elif status == BOUNDARY:
                pending.append(cell)
        self.cells_classified += len(cells)
        self.inside += inside * self._cell_volume
        self.pending_cells = pending

    def refine(self) -> None:
        n = self.set.nvars
        children = []
        for cell in self.pending_cells:
            halves = []
            for i in range(n):
                lo, hi = 2 * cell[2 * i], 2 * cell[2 * i + 1]
                mid = (lo + hi) // 2
                halves.append(((lo, mid), (mid, hi)))
            for combo in itertools.product(*halves):
                children.append(tuple(v for side in combo for v in side))
        self.depth += 1
        self._den *= 2
        self._cell_volume /= 2**n
        self._absorb(children)

    @property
    def pending(self) -> List[Box]:
        d = self._den
        n = self.set.nvars
        return [
            Box(tuple(RatInterval(Fraction(c[2 * i], d), Fraction(c[2 * i + 1], d)) for i in range(n)))
            for c in self.pending_cells
        ]

    def result(self) -> VolumeResult:
        undecided = len(self.pending_cells) * self._cell_volume
        return VolumeResult(self.inside, self.inside + undecided, self.depth, self.cells_classified)


def volume_bounds(s: SemialgSet, domain: Box, max_depth: int) -> VolumeResult:
    refiner = VolumeRefiner(s, domain)
    while refiner.depth < max_depth and refiner.pending_cells:
        refiner.refine()
    return refiner.result()


def volume_creal(s: SemialgSet, domain: Box, max_depth: int = 16, provenance: str = "") -> CReal:
    """Volume as a CReal: refine until upper - lower <= 2/(x+1), return the midpoint.

    Raises :class:`ResourceLimitError` if that needs more than ``max_depth`` levels.
    """
    refiner = VolumeRefiner(s, domain)

    def approx(x: int) -> Fraction:
        while True:
            r = refiner.result()
            if r.width * (x + 1) <= 2:
                return (r.lower + r.upper) / 2
            if refiner.depth >= max_depth:
                raise ResourceLimitError(
                    f"volume width {float(r.width):.3g} still above 2/{x + 1} at depth {max_depth}"
                )
            refiner.refine()

    return CReal(approx, ModulusKind.INVERSE, LOWER_ELEMENTARY, provenance or "semialgebraic volume")


def volume_nested(s: SemialgSet, domain: Box, max_depth: int = 16):
    """(lower, upper) bound sequences indexed by depth, a nested-interval witness."""
    from periodica.expansions import NestedIntervals

    refiner = VolumeRefiner(s, domain)
    results = [refiner.result()]

    def at(x: int) -> VolumeResult:
        x = min(x, max_depth)
        while len(results) <= x:
            refiner.refine()
            results.append(refiner.result())
        return results[x]

    return NestedIntervals(lambda x: at(x).lower, lambda x: at(x).upper)


# ---------------------------------------------------------------- integrals

def _certify_sign(p: MPoly, domain: Box, max_depth: int = 12) -> Tuple[int, List[Box]]:
    """Constant sign of p on the domain by subdivision, with the certifying cover."""
    pending, cover, sign = [domain], [], 0
    for _ in range(max_depth + 1):
        nxt = []
        for b in pending:
            e = p.enclose(b)
            s = 1 if e.lo > 0 else -1 if e.hi < 0 else 0
            if s == 0:
                nxt.extend(b.halves())
            elif sign and s != sign:
                raise ValueError("denominator changes sign on the domain")
            else:
                sign = s
                cover.append(b)
        if not nxt:
            return sign, cover
        pending = nxt
    raise ValueError("denominator enclosure contains 0 on the domain")


def integrate(
    s: SemialgSet, num: MPoly, den: MPoly, domain: Box, max_depth: int = 16
) -> CReal:
    """Integral of num/den over s within the domain box, as a difference of volumes.

    With Q signed positive (P, Q multiplied by the sign of den):
    X1 = s and t > 0 and t Q < P, X2 = s and t > 0 and t Q < -P, both inside
    domain x [0, T] where T bounds |P/Q|; the integral is vol X1 - vol X2.
    """
    n = s.nvars
    if num.nvars != n or den.nvars != n or domain.nvars != n:
        raise DimensionError("integrand, set and domain dimensions differ")
    sign, cover = _certify_sign(den, domain)
    p_s, q_s = num * sign, den * sign
    bound = Fraction(0)
    for b in cover:
        qe, pe = q_s.enclose(b), p_s.enclose(b)
        bound = max(bound, pe.mag() / qe.lo)
    top = max(1, ceil_rat(bound))
    t = MPoly.var(n + 1, n)
    lifted = s.lift(n + 1)
    pl, ql = p_s.extend(n + 1), q_s.extend(n + 1)
    positive = SemialgSet(n + 1, ((SignCondition(t, "gt"), SignCondition(pl - t * ql, "gt")),))
    negative = SemialgSet(n + 1, ((SignCondition(t, "gt"), SignCondition(-pl - t * ql, "gt")),))
    box = Box(domain.sides + (RatInterval(0, top),))
    x1 = volume_creal(set_algebra(lifted, positive, "intersect"), box, max_depth, "positive part")
    x2 = volume_creal(set_algebra(lifted, negative, "intersect"), box, max_depth, "negative part")
    out = arith(x1, x2, "sub")
    out.provenance = "signed volume difference"
    return out


# ---------------------------------------------------------------- periods

def unit_disk() -> SemialgSet:
    return parse_set("vars 2\n1 - x1^2 - x2^2 > 0")


def log_region(rho) -> Tuple[SemialgSet, Box]:
    """{1 < x < rho, 0 < xy < 1}, whose area is ln(rho)."""
    rho = Fraction(rho)
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    x, y = MPoly.var(2, 0), MPoly.var(2, 1)
    conds = (
        SignCondition(x - 1, "gt"),
        SignCondition(rho - x, "gt"),
        SignCondition(x * y, "gt"),
        SignCondition(1 - x * y, "gt"),
    )
    return SemialgSet(2, (conds,)), Box.of((1, rho), (0, 1))


def period_catalog(name: str, rho=None, max_depth: int = 16) -> CReal:
    """``PiDisk`` (area of the unit disk) or ``LnRho`` (ln rho as an area)."""
    if name == "PiDisk":
        return volume_creal(unit_disk(), Box.of((-1, 1), (-1, 1)), max_depth, "unit disk area")
    if name == "LnRho":
        if rho is None:
            raise ValueError("LnRho needs rho")
        s, box = log_region(rho)
        return volume_creal(s, box, max_depth, "area under 1/x")
    raise ValueError(f"unknown period {name!r}")
