"""Natural-number function terms: initial functions plus closure operators.

Terms are immutable trees.  :func:`parse_term` reads the prefix grammar::

    term := "Z" | "S" | "proj(" nat "," nat ")" | "const(" nat ")"
          | "comp(" term ",[" term {"," term} "])"
          | "primrec(" term "," term ")" | "bprimrec(" term "," term "," term ")"
          | "bsum(" term ")" | "bprod(" term ")" | "mu(" term ")"
          | "ladder(" nat ")" | "ackermann" | name

:func:`eval_term` evaluates on naturals and :func:`classify_term` returns a
syntactic upper bound on the term's class in the chain
lower elementary <= E^2 <= E^3 = elementary <= E^n <= primitive recursive <= recursive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Callable, Dict, List, Sequence, Tuple


class TermSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ArityError(ValueError):
    pass


class BoundViolation(ArithmeticError):
    """A bounded primitive recursion produced a value above its bound."""


# ---------------------------------------------------------------- class tags

@total_ordering
@dataclass(frozen=True)
class ClassTag:
    """Function class.  ``level`` orders the chain; E(3) is the elementary class."""

    kind: str
    n: int = 0

    _PR = 10**6

    @property
    def level(self) -> int:
        if self.kind == "LowerElementary":
            return 0
        if self.kind == "Elementary":
            return 2
        if self.kind == "E":
            return self.n - 1
        if self.kind == "PrimitiveRecursive":
            return self._PR
        return self._PR + 1

    def __lt__(self, other: "ClassTag") -> bool:
        return self.level < other.level

    def join(self, other: "ClassTag") -> "ClassTag":
        return self if self.level >= other.level else other

    @property
    def symbol(self) -> str:
        return {
            "LowerElementary": "ℓEL",
            "Elementary": "EL",
            "PrimitiveRecursive": "PR",
            "Recursive": "R",
        }.get(self.kind, f"E{self.n}")

    def __str__(self) -> str:
        return self.symbol


LOWER_ELEMENTARY = ClassTag("LowerElementary")
ELEMENTARY = ClassTag("Elementary")
PRIMITIVE_RECURSIVE = ClassTag("PrimitiveRecursive")
RECURSIVE = ClassTag("Recursive")


def grzegorczyk(n: int) -> ClassTag:
    """E^n for n >= 2, with E^3 reported as the elementary class."""
    if n < 2:
        raise ValueError("the classifier only distinguishes E^n for n >= 2")
    if n == 3:
        return ELEMENTARY
    return ClassTag("E", n)


# ---------------------------------------------------------------- AST

class FunctionTerm:
    arity: int

    def children(self) -> Tuple["FunctionTerm", ...]:
        return ()

    def fits(self, n: int) -> bool:
        return self.arity == n

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True, eq=True)
class Zero(FunctionTerm):
    arity: int = field(default=1, init=False)


@dataclass(frozen=True, eq=True)
class Succ(FunctionTerm):
    arity: int = field(default=1, init=False)


@dataclass(frozen=True, eq=True)
class Proj(FunctionTerm):
    n: int
    i: int

    def __post_init__(self):
        if not 1 <= self.i <= self.n:
            raise ArityError(f"proj({self.n},{self.i}): index out of range")

    @property
    def arity(self) -> int:
        return self.n


@dataclass(frozen=True, eq=True)
class Const(FunctionTerm):
    """Constant function; fits any arity (including 0 as a recursion base)."""

    c: int
    arity: int = field(default=0, init=False)

    def fits(self, n: int) -> bool:
        return True


@dataclass(frozen=True, eq=True)
class Compose(FunctionTerm):
    g: FunctionTerm
    hs: Tuple[FunctionTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "hs", tuple(self.hs))
        if not self.hs:
            raise ArityError("comp: needs at least one inner function")
        if not self.g.fits(len(self.hs)):
            raise ArityError(
                f"comp: outer function has arity {self.g.arity} but {len(self.hs)} inner functions given"
            )
        fixed = {h.arity for h in self.hs if not isinstance(h, Const)}
        if len(fixed) > 1:
            raise ArityError(f"comp: inner functions have mixed arities {sorted(fixed)}")

    @property
    def arity(self) -> int:
        for h in self.hs:
            if not isinstance(h, Const):
                return h.arity
        return 1

    def children(self):
        return (self.g,) + self.hs


def _check_recursion(op: str, g: FunctionTerm, h: FunctionTerm) -> int:
    m = h.arity - 1
    if isinstance(h, Const) or m < 1:
        raise ArityError(f"{op}: step function must have arity >= 2")
    if not g.fits(m - 1):
        raise ArityError(f"{op}: base function has arity {g.arity}, expected {m - 1}")
    return m


@dataclass(frozen=True, eq=True)
class PrimRec(FunctionTerm):
    g: FunctionTerm
    h: FunctionTerm

    def __post_init__(self):
        _check_recursion("primrec", self.g, self.h)

    @property
    def arity(self) -> int:
        return self.h.arity - 1

    def children(self):
        return (self.g, self.h)


@dataclass(frozen=True, eq=True)
class BoundedPrimRec(FunctionTerm):
    g: FunctionTerm
    h: FunctionTerm
    j: FunctionTerm

    def __post_init__(self):
        m = _check_recursion("bprimrec", self.g, self.h)
        if not self.j.fits(m):
            raise ArityError(f"bprimrec: bound has arity {self.j.arity}, expected {m}")

    @property
    def arity(self) -> int:
        return self.h.arity - 1

    def children(self):
        return (self.g, self.h, self.j)


def _check_unary_op(op: str, f: FunctionTerm) -> None:
    if isinstance(f, Const) or f.arity < 1:
        raise ArityError(f"{op}: argument must have a fixed arity >= 1")


@dataclass(frozen=True, eq=True)
class BoundedSum(FunctionTerm):
    """F(x, xs) = sum_{t <= x} f(t, xs)."""

    f: FunctionTerm

    def __post_init__(self):
        _check_unary_op("bsum", self.f)

    @property
    def arity(self) -> int:
        return self.f.arity

    def children(self):
        return (self.f,)


@dataclass(frozen=True, eq=True)
class BoundedProd(FunctionTerm):
    """F(x, xs) = prod_{t <= x} f(t, xs)."""

    f: FunctionTerm

    def __post_init__(self):
        _check_unary_op("bprod", self.f)

    @property
    def arity(self) -> int:
        return self.f.arity

    def children(self):
        return (self.f,)


@dataclass(frozen=True, eq=True)
class Minimizer(FunctionTerm):
    """mu f (xs, b): least j <= b with f(xs, j) = 0, else b."""

    f: FunctionTerm

    def __post_init__(self):
        _check_unary_op("mu", self.f)

    @property
    def arity(self) -> int:
        return self.f.arity

    def children(self):
        return (self.f,)


@dataclass(frozen=True, eq=True)
class LadderF(FunctionTerm):
    n: int
    arity: int = field(default=2, init=False)


@dataclass(frozen=True, eq=True)
class Ackermann(FunctionTerm):
    arity: int = field(default=2, init=False)


@dataclass(frozen=True, eq=True)
class Named(FunctionTerm):
    """A catalog function with its defining term.

    ``base`` marks the generators that every class satisfying the standard
    conditions contains (add, mul, modified subtraction).
    """

    name: str
    body: FunctionTerm = field(compare=False)
    base: bool = field(default=False, compare=False)

    @property
    def arity(self) -> int:
        return self.body.arity

    def fits(self, n: int) -> bool:
        return self.body.fits(n)

    def children(self):
        return (self.body,)


# ---------------------------------------------------------------- printer

def to_source(t: FunctionTerm) -> str:
    if isinstance(t, Zero):
        return "Z"
    if isinstance(t, Succ):
        return "S"
    if isinstance(t, Proj):
        return f"proj({t.n},{t.i})"
    if isinstance(t, Const):
        return f"const({t.c})"
    if isinstance(t, Compose):
        return f"comp({to_source(t.g)},[{','.join(to_source(h) for h in t.hs)}])"
    if isinstance(t, PrimRec):
        return f"primrec({to_source(t.g)},{to_source(t.h)})"
    if isinstance(t, BoundedPrimRec):
        return f"bprimrec({to_source(t.g)},{to_source(t.h)},{to_source(t.j)})"
    if isinstance(t, BoundedSum):
        return f"bsum({to_source(t.f)})"
    if isinstance(t, BoundedProd):
        return f"bprod({to_source(t.f)})"
    if isinstance(t, Minimizer):
        return f"mu({to_source(t.f)})"
    if isinstance(t, LadderF):
        return f"ladder({t.n})"
    if isinstance(t, Ackermann):
        return "ackermann"
    if isinstance(t, Named):
        return t.name
    raise TypeError(f"not a function term: {t!r}")


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class _Parser:
    def __init__(self, src: str):
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(src):
            m = _TOKEN.match(src, pos)
            if m is None or m.end() == pos:
                break
            if m.group(1):
                self.tokens.append(("nat", m.group(1), m.start(1)))
            elif m.group(2):
                self.tokens.append(("name", m.group(2), m.start(2)))
            elif m.group(3):
                self.tokens.append(("sym", m.group(3), m.start(3)))
            pos = m.end()
        self.end = len(src)
        self.k = 0

    def peek(self):
        if self.k < len(self.tokens):
            return self.tokens[self.k]
        return ("eof", "", self.end)

    def take(self):
        tok = self.peek()
        self.k += 1
        return tok

    def expect(self, sym: str):
        kind, val, pos = self.take()
        if kind != "sym" or val != sym:
            raise TermSyntaxError(f"expected {sym!r}, found {val or 'end of input'!r}", pos)

    def nat(self) -> int:
        kind, val, pos = self.take()
        if kind != "nat":
            raise TermSyntaxError(f"expected a natural number, found {val or 'end of input'!r}", pos)
        return int(val)

    def term(self) -> FunctionTerm:
        kind, val, pos = self.take()
        if kind != "name":
            raise TermSyntaxError(f"expected a term, found {val or 'end of input'!r}", pos)
        if val == "Z":
            return Zero()
        if val == "S":
            return Succ()
        if val == "ackermann":
            return Ackermann()
        if val in ("proj", "const", "ladder"):
            self.expect("(")
            a = self.nat()
            if val == "proj":
                self.expect(",")
                b = self.nat()
                self.expect(")")
                return _build(lambda: Proj(a, b), pos)
            self.expect(")")
            if val == "const":
                return Const(a)
            return LadderF(a)
        if val == "comp":
            self.expect("(")
            g = self.term()
            self.expect(",")
            self.expect("[")
            hs = [self.term()]
            while self.peek()[:2] == ("sym", ","):
                self.take()
                hs.append(self.term())
            self.expect("]")
            self.expect(")")
            return _build(lambda: Compose(g, tuple(hs)), pos)
        if val in ("primrec", "bprimrec"):
            self.expect("(")
            args = [self.term()]
            for _ in range(1 if val == "primrec" else 2):
                self.expect(",")
                args.append(self.term())
            self.expect(")")
            cls = PrimRec if val == "primrec" else BoundedPrimRec
            return _build(lambda: cls(*args), pos)
        if val in ("bsum", "bprod", "mu"):
            self.expect("(")
            f = self.term()
            self.expect(")")
            cls = {"bsum": BoundedSum, "bprod": BoundedProd, "mu": Minimizer}[val]
            return _build(lambda: cls(f), pos)
        try:
            return builtin(val)
        except KeyError:
            raise TermSyntaxError(f"unknown function name {val!r}", pos) from None


def _build(make: Callable[[], FunctionTerm], pos: int) -> FunctionTerm:
    try:
        return make()
    except ArityError as exc:
        raise ArityError(f"{exc} (at position {pos})") from None


def parse_term(source: str) -> FunctionTerm:
    p = _Parser(source)
    t = p.term()
    kind, val, pos = p.peek()
    if kind != "eof":
        raise TermSyntaxError(f"unexpected trailing input {val!r}", pos)
    return t


# ---------------------------------------------------------------- builtins

def _p(n, i):
    return Proj(n, i)


def _comp(g, *hs):
    return Compose(g, tuple(hs))


def _catalog() -> Dict[str, Named]:
    S = Succ()
    cat: Dict[str, Named] = {}
    # add(0,y) = y ; add(x+1,y) = S(add(x,y))
    add = Named("add", PrimRec(_p(1, 1), _comp(S, _p(3, 2))), base=True)
    # mul(0,y) = 0 ; mul(x+1,y) = add(mul(x,y), y)
    mul = Named("mul", PrimRec(Zero(), _comp(add, _p(3, 2), _p(3, 3))), base=True)
    pred = Named("pred", PrimRec(Const(0), _p(2, 1)))
    # r(y, x) = x -. y by recursion on y, then swap
    rsub = PrimRec(_p(1, 1), _comp(pred, _p(3, 2)))
    sub = Named("sub", _comp(rsub, _p(2, 2), _p(2, 1)), base=True)
    swap_sub = _comp(sub, _p(2, 2), _p(2, 1))
    abs_diff = Named("abs_diff", _comp(add, sub, swap_sub))
    min_ = Named("min", _comp(sub, _p(2, 1), sub))
    max_ = Named("max", _comp(add, _p(2, 2), sub))
    sgn = Named("sgn", _comp(sub, Const(1), _comp(sub, Const(1), _p(1, 1))))
    gt = Named("gt", _comp(sgn, sub))
    # ge(a, b) = 1 -. (b -. a)
    ge = Named("ge", _comp(sub, Const(1), swap_sub))
    # div(x,y) = (sum_{i<=x} ge(x, i(y+1))) -. 1
    ge_step = _comp(ge, _p(3, 2), _comp(mul, _p(3, 1), _comp(S, _p(3, 3))))
    div = Named("div", _comp(sub, _comp(BoundedSum(ge_step), _p(2, 1), _p(2, 1), _p(2, 2)), Const(1)))
    # pow(n,m) = prod_{t<=m} f(t,n), f(0,n) = 1, f(t,n) = n for t > 0
    pow_factor = _comp(add, _comp(mul, _comp(sgn, _p(2, 1)), _p(2, 2)), _comp(sub, Const(1), _p(2, 1)))
    pow_ = Named("pow", _comp(BoundedProd(pow_factor), _p(2, 2), _p(2, 1)))
    # 0! = 1 ; (n+1)! = mul(S(n), n!)
    factorial = Named("factorial", PrimRec(Const(1), _comp(mul, _comp(S, _p(2, 1)), _p(2, 2))))
    for t in (add, mul, pred, sub, abs_diff, min_, max_, sgn, gt, ge, div, pow_, factorial):
        cat[t.name] = t
    return cat


_CATALOG = _catalog()


def builtin(name: str) -> FunctionTerm:
    """Catalog term for add, mul, sub, abs_diff, min, max, sgn, gt, ge, div, pow,
    factorial, pred, ``ladder(n)`` / ``ladderN`` and ackermann."""
    if name in _CATALOG:
        return _CATALOG[name]
    if name == "ackermann":
        return Ackermann()
    m = re.fullmatch(r"ladder\(?(\d+)\)?", name)
    if m:
        return LadderF(int(m.group(1)))
    raise KeyError(name)


def builtin_names() -> List[str]:
    return sorted(_CATALOG) + ["ladder(n)", "ackermann"]


# ---------------------------------------------------------------- evaluation

def ladder(n: int, x: int, y: int) -> int:
    if n == 0:
        return x + 1
    if n == 1:
        return x + y
    if n == 2:
        return x * y
    v = 1
    for _ in range(y):
        v = ladder(n - 1, x, v)
    return v


def ackermann(m: int, n: int, memo: Dict[Tuple[int, int], int] | None = None) -> int:
    """Iterative evaluation of A(m, n) with a memo of solved pairs."""
    memo = {} if memo is None else memo
    stack: List[Tuple[int, int]] = [(m, n)]
    while stack:
        a, b = stack[-1]
        if (a, b) in memo:
            stack.pop()
            continue
        if a == 0:
            memo[(a, b)] = b + 1
            stack.pop()
        elif b == 0:
            if (a - 1, 1) in memo:
                memo[(a, b)] = memo[(a - 1, 1)]
                stack.pop()
            else:
                stack.append((a - 1, 1))
        else:
            inner = memo.get((a, b - 1))
            if inner is None:
                stack.append((a, b - 1))
            elif (a - 1, inner) in memo:
                memo[(a, b)] = memo[(a - 1, inner)]
                stack.pop()
            else:
                stack.append((a - 1, inner))
    return memo[(m, n)]


class Evaluator:
    """Compiles terms to closures; memo tables live as long as the evaluator.

    Recursion traces (primitive recursion, bounded sums and products) are
    memoized per tuple of parameter arguments, so a trace computed up to x is
    extended rather than recomputed.

    With ``native_generators`` the catalog generators add, mul and modified
    subtraction run as machine arithmetic while every term built on them is
    still unfolded; otherwise add recurses in unary and mul(x, y) costs x*y steps.
    """

    _NATIVE: Dict[str, Callable[..., int]] = {
        "add": lambda x, y: x + y,
        "mul": lambda x, y: x * y,
        "sub": lambda x, y: x - y if x > y else 0,
    }

    def __init__(self, native_generators: bool = False):
        self.native_generators = native_generators
        self._compiled: Dict[int, Tuple[FunctionTerm, Callable[..., int]]] = {}
        self.ackermann_memo: Dict[Tuple[int, int], int] = {}

    def __call__(self, t: FunctionTerm, *args: int) -> int:
        return self.run(t, args)

    def run(self, t: FunctionTerm, args: Sequence[int]) -> int:
        args = tuple(args)
        if not isinstance(t, Const) and len(args) != t.arity:
            raise ArityError(f"{to_source(t)} expects {t.arity} arguments, got {len(args)}")
        for a in args:
            if not isinstance(a, int) or a < 0:
                raise ValueError(f"arguments must be natural numbers, got {a!r}")
        return self.compile(t)(*args)

    def compile(self, t: FunctionTerm) -> Callable[..., int]:
        hit = self._compiled.get(id(t))
        if hit is not None and hit[0] is t:
            return hit[1]
        fn = self._build(t)
        self._compiled[id(t)] = (t, fn)
        return fn

    def _build(self, t: FunctionTerm) -> Callable[..., int]:
        if isinstance(t, Zero):
            return lambda x: 0
        if isinstance(t, Succ):
            return lambda x: x + 1
        if isinstance(t, Proj):
            i = t.i - 1
            return lambda *a: a[i]
        if isinstance(t, Const):
            c = t.c
            return lambda *a: c
        if isinstance(t, Named):
            native = self._NATIVE.get(t.name) if self.native_generators and t.base else None
            if native is not None:
                return native
            return self.compile(t.body)
        if isinstance(t, Compose):
            g = self.compile(t.g)
            hs = [self.compile(h) for h in t.hs]
            if len(hs) == 1:
                h0 = hs[0]
                return lambda *a: g(h0(*a))
            if len(hs) == 2:
                h0, h1 = hs
                return lambda *a: g(h0(*a), h1(*a))
            return lambda *a: g(*[h(*a) for h in hs])
        if isinstance(t, (PrimRec, BoundedPrimRec)):
            return self._recursion(t)
        if isinstance(t, (BoundedSum, BoundedProd)):
            return self._bounded_fold(t)
        if isinstance(t, Minimizer):
            f = self.compile(t.f)

            def mu(*a):
                *xs, bound = a
                for j in range(bound + 1):
                    if f(*xs, j) == 0:
                        return j
                return bound

            return mu
        if isinstance(t, LadderF):
            n = t.n
            return lambda x, y: ladder(n, x, y)
        if isinstance(t, Ackermann):
            memo = self.ackermann_memo
            return lambda m, n: ackermann(m, n, memo)
        raise TypeError(f"cannot evaluate {t!r}")

    def _recursion(self, t) -> Callable[..., int]:
        g = self.compile(t.g)
        h = self.compile(t.h)
        bound = self.compile(t.j) if isinstance(t, BoundedPrimRec) else None
        traces: Dict[Tuple[int, ...], List[int]] = {}

        def rec(x, *rest):
            trace = traces.get(rest)
            if trace is None:
                v0 = g(*rest)
                if bound is not None and v0 > bound(0, *rest):
                    raise BoundViolation(f"{to_source(t)}: f(0, {rest}) = {v0} exceeds its bound")
                trace = traces[rest] = [v0]
            while len(trace) <= x:
                i = len(trace) - 1
                v = h(i, trace[i], *rest)
                if bound is not None and v > bound(i + 1, *rest):
                    raise BoundViolation(f"{to_source(t)}: f({i + 1}, {rest}) = {v} exceeds its bound")
                trace.append(v)
            return trace[x]

        return rec

    def _bounded_fold(self, t) -> Callable[..., int]:
        f = self.compile(t.f)
        is_sum = isinstance(t, BoundedSum)
        traces: Dict[Tuple[int, ...], List[int]] = {}

        def fold(x, *rest):
            trace = traces.get(rest)
            if trace is None:
                trace = traces[rest] = [f(0, *rest)]
            while len(trace) <= x:
                s = len(trace)
                v = f(s, *rest)
                trace.append(trace[-1] + v if is_sum else trace[-1] * v)
            return trace[x]

        return fold


def eval_term(t: FunctionTerm, args: Sequence[int], evaluator: Evaluator | None = None) -> int:
    """Evaluate ``t`` at ``args``; a fresh memo table is used unless one is passed."""
    return (evaluator or Evaluator()).run(t, args)


# ---------------------------------------------------------------- classification

def classify_term(t: FunctionTerm) -> ClassTag:
    """Conservative syntactic class of ``t`` (an upper bound, never a proof of
    a smaller class).  Lower elementary and E^2 are kept distinct."""
    if isinstance(t, (Zero, Succ, Proj, Const)):
        return LOWER_ELEMENTARY
    if isinstance(t, Named):
        return LOWER_ELEMENTARY if t.base else classify_term(t.body)
    if isinstance(t, Ackermann):
        return RECURSIVE
    if isinstance(t, LadderF):
        return LOWER_ELEMENTARY if t.n <= 2 else grzegorczyk(t.n)
    tag = LOWER_ELEMENTARY
    for c in t.children():
        tag = tag.join(classify_term(c))
    if isinstance(t, BoundedProd):
        tag = tag.join(ELEMENTARY)
    elif isinstance(t, BoundedPrimRec):
        tag = tag.join(grzegorczyk(2))
    elif isinstance(t, PrimRec):
        tag = tag.join(PRIMITIVE_RECURSIVE)
    # Minimizer carries its own bound argument, so it stays in the class of f.
    return tag
