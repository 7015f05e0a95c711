"""Command-line front end.

Every numeric answer is printed as ``value ± bound [class per source]``; with
``--json`` the same facts come out as one JSON object.  Exit codes: 0 success,
1 invalid mathematical input, 2 usage, 3 resource limit, 4 undecided comparison.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from periodica.creal import (
    CReal,
    Fuel,
    ResourceLimitError,
    RootIsolationError,
    decimal_result,
    from_rational,
    parse_polynomial,
    poly_root,
)
from periodica.exact import Rounding, format_bound, round_rat, to_decimal
from periodica.expansions import extract_digits
from periodica.semialg import (
    Box,
    PolySyntaxError,
    integrate,
    parse_mpoly,
    parse_set,
    volume_creal,
)
from periodica.series import ConstantId, catalog_spec, constant, sum_exact_terms
from periodica.terms import (
    ArityError,
    BoundViolation,
    TermSyntaxError,
    builtin,
    builtin_names,
    classify_term,
    eval_term,
    parse_term,
)

EXIT_OK, EXIT_INPUT, EXIT_USAGE, EXIT_RESOURCE, EXIT_UNKNOWN = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


class Undecided(RuntimeError):
    pass


def _emit(args, value: str, bound: Fraction, cls: str, ref: str, extra: Optional[dict] = None) -> None:
    if args.json:
        payload = {
            "value": value,
            "bound_num": bound.numerator,
            "bound_den": bound.denominator,
            "class": cls,
            "ref": ref,
        }
        payload.update(extra or {})
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    else:
        print(f"{value} ± {format_bound(bound)} [{cls} per {ref}]")


def _real_argument(text: str):
    """A catalog constant id, or a rational literal such as ``1/4``."""
    try:
        cid = ConstantId.parse(text)
    except ValueError as exc:
        try:
            q = Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise UsageError(str(exc)) from None
        return from_rational(q), f"rational {q}"
    return constant(cid), constant(cid).provenance


def _digits_count(n: int) -> int:
    if n < 0:
        raise UsageError("--digits must be nonnegative")
    return n


def _print_real(args, a: CReal, ref: str) -> None:
    res = decimal_result(a, _digits_count(args.digits))
    _emit(args, res.text, res.bound, a.cls.symbol, ref)


def cmd_digits(args) -> int:
    a, ref = _real_argument(args.constant)
    _print_real(args, a, ref)
    return EXIT_OK


def cmd_sum_series(args) -> int:
    try:
        cid = ConstantId.parse(args.constant)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cid.kind == "ln" and cid.param > 2:
        raise UsageError("sum-series covers ln:2 only; use digits for other logarithms")
    spec = catalog_spec(cid)
    # the pi series sums pi/4
    factor = 4 if cid.kind == "pi" else 1
    digits = _digits_count(args.digits)
    try:
        summary = sum_exact_terms(spec, digits + (1 if factor > 1 else 0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    total = summary.value * factor
    shown = Fraction(round_rat(total * 10**digits, Rounding.NEAREST), 10**digits)
    bound = summary.bound * factor + abs(shown - total)
    _emit(
        args,
        to_decimal(shown, digits),
        bound,
        spec.cls.symbol,
        spec.provenance,
        {"series": spec.name, "terms": summary.terms},
    )
    return EXIT_OK


def _load_text(source: str) -> str:
    path = Path(source)
    if path.is_file():
        return path.read_text()
    return source


def cmd_eval_term(args) -> int:
    text = _load_text(args.term).strip()
    term = builtin(text) if text in builtin_names() else parse_term(text)
    values = _int_list(args.args) if args.args else []
    result = eval_term(term, values)
    cls = classify_term(term).symbol
    if args.json:
        print(json.dumps({"value": result, "class": cls, "arity": term.arity}, ensure_ascii=False, sort_keys=True))
    else:
        print(result)
    return EXIT_OK


def _int_list(text: str) -> List[int]:
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated naturals, got {text!r}") from None
    if any(v < 0 for v in out):
        raise UsageError("arguments must be natural numbers")
    return out


def _bracket(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--bracket needs two rationals, e.g. 1,2")
    try:
        return Fraction(parts[0]), Fraction(parts[1])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad bracket {text!r}") from None


def cmd_root(args) -> int:
    coeffs = parse_polynomial(args.poly, args.var)
    root = poly_root(coeffs, _bracket(args.bracket), Fuel(args.fuel))
    _print_real(args, root, "polynomial root")
    return EXIT_OK


def cmd_volume(args) -> int:
    s = parse_set(_load_text(args.set_file))
    try:
        domain = Box.parse(args.domain)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad domain: {exc}") from None
    if args.num is None and args.den is None:
        a = volume_creal(s, domain, args.max_depth)
        ref = "semialgebraic volume"
    else:
        names = [f"x{i + 1}" for i in range(s.nvars)]
        num = parse_mpoly(args.num or "1", names)
        den = parse_mpoly(args.den or "1", names)
        a = integrate(s, num, den, domain, args.max_depth)
        ref = "signed volume difference"
    _print_real(args, a, ref)
    return EXIT_OK


def cmd_badic(args) -> int:
    if args.base < 2:
        raise UsageError("--base must be at least 2")
    a, ref = _real_argument(args.constant)
    ex = extract_digits(a, args.base, args.positions, Fuel(args.fuel))
    head = "?" if ex.integer_part is None else str(ex.integer_part)
    tokens = [head, "."] + ex.tokens()
    if args.json:
        payload = {
            "integer_part": ex.integer_part,
            "digits": ex.digits,
            "unknown_at": ex.unknown_at,
            "base": args.base,
            "class": a.cls.symbol,
            "ref": ref,
        }
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    else:
        print(" ".join(tokens))
    if ex.unknown_at is not None:
        where = "integer part" if ex.unknown_at == 0 else f"position {ex.unknown_at}"
        print(
            f"{where} undecided within fuel {args.fuel}; the value may sit on a cut point",
            file=sys.stderr,
        )
        raise Undecided
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    def global_flags(parser: argparse.ArgumentParser, top: bool) -> None:
        # the flags work before or after the verb; only the top level sets defaults
        def dflt(v):
            return v if top else argparse.SUPPRESS

        parser.add_argument("--fuel", type=int, default=dflt(10**4), help="max index for semi-decidable comparisons")
        parser.add_argument("--max-depth", type=int, default=dflt(16), help="subdivision depth ceiling")
        parser.add_argument("--json", action="store_true", default=dflt(False), help="emit one JSON object")

    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, top=False)
    p = argparse.ArgumentParser(prog="periodica", description=__doc__.splitlines()[0])
    global_flags(p, top=True)
    sub = p.add_subparsers(dest="verb", required=True)

    d = sub.add_parser("digits", parents=[common], help="certified decimal digits of a constant")
    d.add_argument("constant", help="e | pi | ln:N | catalan | gamma | liouville | zeta:K | lnpi | p/q")
    d.add_argument("--digits", type=int, default=6)
    d.set_defaults(run=cmd_digits)

    t = sub.add_parser("eval-term", parents=[common], help="evaluate a function term")
    t.add_argument("term", help="builtin name, term literal, or a file holding one")
    t.add_argument("--args", default="")
    t.set_defaults(run=cmd_eval_term)

    r = sub.add_parser("root", parents=[common], help="root of a rational polynomial in a bracket")
    r.add_argument("--poly", required=True)
    r.add_argument("--bracket", required=True)
    r.add_argument("--var", default="X")
    r.add_argument("--digits", type=int, default=8)
    r.set_defaults(run=cmd_root)

    v = sub.add_parser("volume", parents=[common], help="volume of, or integral over, a semialgebraic set")
    v.add_argument("set_file")
    v.add_argument("--domain", required=True, help='box such as "0,1;0,1"')
    v.add_argument("--digits", type=int, default=3)
    v.add_argument("--num", help="integrand numerator over x1..xn")
    v.add_argument("--den", help="integrand denominator over x1..xn")
    v.set_defaults(run=cmd_volume)

    b = sub.add_parser("badic", parents=[common], help="base-b digits, '?' where undecided")
    b.add_argument("constant")
    b.add_argument("--base", type=int, default=10)
    b.add_argument("--positions", type=int, default=6)
    b.set_defaults(run=cmd_badic)

    s = sub.add_parser("sum-series", parents=[common], help="direct summation of a catalog series")
    s.add_argument("constant")
    # the Leibniz series needs about 10^digits terms
    s.add_argument("--digits", type=int, default=4)
    s.set_defaults(run=cmd_sum_series)
    return p


def run(argv: Sequence[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.fuel < 1 or args.max_depth < 0:
        print("periodica: --fuel must be positive and --max-depth nonnegative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.run(args)
    except (UsageError, TermSyntaxError, PolySyntaxError, ArityError, KeyError) as exc:
        print(f"periodica: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"periodica: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except Undecided:
        return EXIT_UNKNOWN
    except (RootIsolationError, BoundViolation, ValueError, ZeroDivisionError) as exc:
        print(f"periodica: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
