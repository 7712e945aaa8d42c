"""Command-line front end.

Subcommands: ``motivic`` (evaluate an expression in ``L``), ``jets``
(groupoid counts, stabilizers, group orders), ``heights`` (profile one arc
file or a seeded batch of random arcs), ``verify-cov`` and ``resolve``.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import warnings
from fractions import Fraction

from . import crepant, heights, jets
from .errors import MotivicError, ParseError, VerificationFailed
from .grothendieck import L, MotivicElement, class_of, evaluate_at
from .series import DEFAULT_PRECISION, field

SCHEMA = "motivic-forge/1"

# -- expression parser ------------------------------------------------------------------


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
        elif ch in "+-*^()/,":
            tokens.append((ch, ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def _end_pos(self) -> int:
        return self.toks[-1][2] if self.toks else 0

    def take(self, kind=None):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self._end_pos())
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> MotivicElement:
        if not self.toks:
            raise ParseError("empty expression", 0)
        value = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return value

    def expr(self) -> MotivicElement:
        value = self.term()
        while self.peek() is not None and self.peek()[0] in "+-":
            op = self.take()[0]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> MotivicElement:
        neg = False
        while self.peek() is not None and self.peek()[0] == "-":
            self.take()
            neg = not neg
        value = self.factor()
        while self.peek() is not None and self.peek()[0] == "*":
            self.take()
            value = value * self.factor()
        return -value if neg else value

    def factor(self) -> MotivicElement:
        start = self.peek()
        base = self.atom()
        if self.peek() is not None and self.peek()[0] == "^":
            self.take()
            pos = self.peek()[2] if self.peek() else self._end_pos()
            e = self.rational()
            return self._power(base, e, start[2] if start else pos)
        return base

    def _power(self, base: MotivicElement, e: Fraction, pos: int) -> MotivicElement:
        terms = base.terms
        if len(terms) == 1 and next(iter(terms.values())) == 1:
            (a,) = terms
            return L(a * e)
        if e.denominator != 1:
            raise ParseError("fractional powers apply to powers of L only", pos)
        try:
            return base ** int(e)
        except MotivicError as exc:
            raise ParseError(str(exc), pos) from None

    def rational(self) -> Fraction:
        tok = self.peek()
        if tok is not None and tok[0] == "(":
            self.take()
            num = self._signed_int()
            den = 1
            if self.peek() is not None and self.peek()[0] == "/":
                self.take()
                den = int(self.take("int")[1])
                if den == 0:
                    raise ParseError("zero denominator", self.toks[self.i - 1][2])
            self.take(")")
            return Fraction(num, den)
        return Fraction(self._signed_int())

    def _signed_int(self) -> int:
        sign = 1
        if self.peek() is not None and self.peek()[0] == "-":
            self.take()
            sign = -1
        return sign * int(self.take("int")[1])

    def atom(self) -> MotivicElement:
        tok = self.take()
        kind, text, pos = tok
        if kind == "int":
            return MotivicElement.const(int(text))
        if kind == "(":
            value = self.expr()
            self.take(")")
            return value
        if kind == "name" and text == "L":
            return L()
        if kind == "name" and text == "e":
            self.take("(")
            name = self.take("name")[1]
            args = []
            while self.peek() is not None and self.peek()[0] != ")":
                t = self.take()
                if t[0] == ",":
                    continue
                if t[0] == "int":
                    args.append(int(t[1]))
                elif t[0] == "name":
                    args.append(t[1])
                else:
                    raise ParseError(f"unexpected {t[1]!r} in builtin arguments", t[2])
            self.take(")")
            try:
                return class_of(name, *args)
            except ValueError as exc:
                raise ParseError(str(exc), pos) from None
        raise ParseError(f"unexpected {text!r}", pos)


def parse_motivic_expression(text: str) -> MotivicElement:
    """Parse ``expr := term (('+'|'-') term)*`` over ``L``, integers and ``e(name args)``."""
    return _Parser(text).parse()


# -- argument parsing ---------------------------------------------------------------------


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="series precision N (work mod t^N)")
    p.add_argument("--prime", type=int, default=5, help="coefficient field F_p for arcs")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--seed", type=int, default=0, help="seed for random sampling")
    p.add_argument("--workers", type=int, default=1, help="worker processes for jet enumeration")
    return p


def build_parser() -> argparse.ArgumentParser:
    g = _global_flags()
    parser = argparse.ArgumentParser(prog="motivic-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("motivic", parents=[g], help="evaluate an expression in L")
    p.add_argument("expression")
    p.add_argument("--eval", type=int, action="append", default=[], metavar="Q", help="also evaluate at L = Q")

    pj = sub.add_parser("jets", help="finite-field jet counts")
    jsub = pj.add_subparsers(dest="jets_command", required=True)
    for name in ("count", "stabilizer", "group-order"):
        q = jsub.add_parser(name, parents=[g])
        q.add_argument("--r", type=int, required=True)
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--q", type=int, required=True)
        if name == "count":
            q.add_argument("--method", choices=("brute", "rowreduce", "both"), default="both")
            q.add_argument("--cylinder", choices=jets.CYLINDERS, default="valuation1")
            q.add_argument("--limit", type=int, default=jets.ENUMERATION_LIMIT)
        if name == "group-order":
            q.add_argument("--brute", action="store_true", help="also count by exhaustive search")

    p = sub.add_parser("heights", parents=[g], help="height profiles along arcs")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--arc", metavar="FILE", help="arc JSON file")
    src.add_argument("--batch", type=int, metavar="COUNT", help="number of random slr arcs")
    p.add_argument("--r", type=int, default=2, help="matrix size for --batch")
    p.add_argument("--min-val", type=int, default=1)
    p.add_argument("--max-val", type=int, default=4)

    p = sub.add_parser("verify-cov", parents=[g], help="recover K from the change of variables")
    p.add_argument("--case", choices=jets.COV_CASES, required=True)
    p.add_argument("--r", type=int, default=2)

    p = sub.add_parser("resolve", parents=[g], help="build the crepant stack descriptor")
    p.add_argument("--in", dest="infile", required=True, metavar="FILE")
    p.add_argument("--convention", choices=crepant.CONVENTIONS, default="certificate")
    return parser


def _validate(args) -> None:
    if args.precision < 1:
        raise ValueError("--precision must be >= 1")
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")
    if field(args.prime) is None:
        raise ValueError("--prime must be a prime <= 97")
    for name in ("r", "n", "q"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise ValueError(f"--{name} must be nonnegative")


# -- subcommands --------------------------------------------------------------------------


def _cmd_motivic(args) -> tuple[int, dict, list[str]]:
    e = parse_motivic_expression(args.expression)
    report = {"expression": args.expression, "canonical": str(e)}
    lines = [str(e)]
    if args.eval:
        report["values"] = {str(q): str(evaluate_at(e, q)) for q in args.eval}
        lines += [f"at L={q}: {v}" for q, v in report["values"].items()]
    return 0, report, lines


def _cmd_jets(args) -> tuple[int, dict, list[str]]:
    r, n, q = args.r, args.n, args.q
    if args.jets_command == "count":
        gc = jets.groupoid_count(r, n, q, method=args.method, cylinder=args.cylinder,
                                 workers=args.workers, limit=args.limit)
        report = gc.as_dict()
        lines = [
            f"{args.cylinder} cylinder, r={r} n={n} q={q} ({args.method})",
            f"  points {gc.numerator} / group order {gc.denominator} = {gc.value}",
            f"  symbolic {report['symbolic']} at q={q}: {evaluate_at(gc.symbolic, q)}",
            f"  match: {gc.match}",
        ]
        return (0 if gc.match else 1), report, lines
    if args.jets_command == "stabilizer":
        s = jets.stabilizer_order(r, n, q)
        expected = q ** (r - 1)
        report = {"r": r, "n": n, "q": q, "stabilizer_order": s, "expected": expected, "match": s == expected}
        return (0 if s == expected else 1), report, [f"stabilizer order {s} (expected {expected})"]
    order = jets.group_order(r, n, q)
    report = {"r": r, "n": n, "q": q, "group_order": order}
    lines = [f"#L_{n}(SL_{r})(F_{q}) = {order}"]
    code = 0
    if args.brute:
        b = jets.brute_group_order(r, n, q)
        report.update(brute=b, match=b == order)
        lines.append(f"exhaustive count {b}")
        code = 0 if b == order else 1
    return code, report, lines


def _identity_report(arc) -> dict:
    r = arc.r
    rep = heights.check_key_identity(arc, 1, crepant.DivisorSum.single("D'", 1 - r))
    out = rep.as_dict()
    out["det_valuation"] = arc.det_valuation().value
    out["ht_identity"] = rep.profile.ht0 - rep.profile.ht1 == (1 - r) * out["det_valuation"]
    out["passes"] = rep.passes and out["ht_identity"]
    return out


def _cmd_heights(args) -> tuple[int, dict, list[str]]:
    if args.arc:
        with open(args.arc) as fh:
            data = json.load(fh)
        arc = heights.arc_from_dict(data, precision=args.precision, prime=args.prime)
        if arc.family != "slr":
            jo = heights.jacobian_order(arc)
            report = {"family": arc.family, "ord_J": jo,
                      "torsion_length": heights.torsion_length_of_differentials(arc)}
            return 0, report, [f"Jacobian order along the arc: {jo}"]
        out = _identity_report(arc)
        h = out["heights"]
        lines = [
            f"heights (ht-1, ht0, ht1) = ({h['ht_minus1']}, {h['ht0']}, {h['ht1']})",
            f"ord_K = {out['lhs']}, m ht0 - m ht1 - ord_J = {out['rhs']}, euler = {out['euler']}",
            f"pass: {out['passes']}",
        ]
        return (0 if out["passes"] else 1), out, lines
    if args.r < 1 or args.batch < 0:
        raise ValueError("--r must be >= 1 and --batch >= 0")
    rng = random.Random(args.seed)
    failures = []
    profiles = {}
    for k in range(args.batch):
        arc = heights.random_slr_arc(args.r, rng, args.precision, args.prime, args.min_val, args.max_val)
        out = _identity_report(arc)
        h = out["heights"]
        key = f"{h['ht_minus1']},{h['ht0']},{h['ht1']}"
        profiles[key] = profiles.get(key, 0) + 1
        if not out["passes"]:
            failures.append({"index": k, **out})
    report = {"r": args.r, "batch": args.batch, "passed": args.batch - len(failures),
              "failures": failures, "profiles": dict(sorted(profiles.items()))}
    lines = [f"{report['passed']}/{args.batch} random slr({args.r}) arcs satisfy the identity"]
    lines += [f"  profile ({k}): {v}" for k, v in report["profiles"].items()]
    return (0 if not failures else 1), report, lines


def _cmd_verify_cov(args) -> tuple[int, dict, list[str]]:
    try:
        rep = jets.verify_change_of_variables(args.case, args.r, workers=args.workers)
    except VerificationFailed as exc:
        return 1, {"error": str(exc), "ledger": exc.ledger}, [f"FAILED: {exc}"]
    out = rep.as_dict()
    lines = [
        f"case {rep.case} (r={rep.r})",
        f"  mu_Gor(Y) = {rep.mu_gor}",
        f"  mu_X(C)   = {rep.mu_x}",
        f"  L-shift {rep.shift}, ord_K = {rep.ord_K}, ord_D = {rep.ord_D}",
        f"  recovered coefficient {rep.coefficient} (expected {rep.expected})",
    ]
    for c in rep.numeric:
        status = f"skipped ({c['skipped']})" if "skipped" in c else ("ok" if c["match"] else "MISMATCH")
        lines.append(f"  q={c['q']} n={c['n']} side {c['side']}: {status}")
    return 0, out, lines


def _cmd_resolve(args) -> tuple[int, dict, list[str]]:
    with open(args.infile) as fh:
        data = crepant.SNCResolutionInput.from_json(fh.read())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            desc = crepant.build_crepant_stack(data, args.convention)
        except crepant.CertificateFailed as exc:
            return 1, {"error": str(exc), "residuals": {k: str(v) for k, v in exc.residuals.items()}}, [str(exc)]
    out = desc.as_dict()
    lines = [f"{desc.name}: convention {desc.convention}, crepant: {desc.crepant}"]
    for f in desc.factors:
        lines.append(f"  {f.label}: r={f.r} d={f.d} rank={f.rank} coefficient {f.coefficient}")
    lines.append(desc.moduli_interpretation)
    lines += [f"warning: {w}" for w in desc.warnings]
    return (0 if desc.crepant else 1), out, lines


_COMMANDS = {
    "motivic": _cmd_motivic,
    "jets": _cmd_jets,
    "heights": _cmd_heights,
    "verify-cov": _cmd_verify_cov,
    "resolve": _cmd_resolve,
}


def run(args) -> int:
    try:
        _validate(args)
        code, report, lines = _COMMANDS[args.command](args)
    except VerificationFailed as exc:
        code, report, lines = 1, {"error": str(exc), "ledger": exc.ledger}, [f"verification failed: {exc}"]
    except (MotivicError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        if args.json:
            print(json.dumps({"schema": SCHEMA, "error": str(msg)}, sort_keys=True))
        else:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    if args.json:
        report = {"schema": SCHEMA, "command": args.command, "seed": args.seed, **report}
        print(json.dumps(report, sort_keys=True, indent=2, default=str))
    else:
        print("\n".join(lines))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
