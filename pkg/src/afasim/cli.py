"""Command-line front end: ``afasim gen | run | verify | sweep``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from . import verify as suites
from .core import UnknownSymbolError, run
from .encoding import DEFAULT_GUARD, DEFAULT_N_MAX, OracleError, build_combined, oracle_from_spec, predicted_acceptance_combined
from .field import NumericField, env_precision_bits
from .powereq import DEFAULT_K, DEFAULT_MAX_N, blocks, build_powereq, member_string, predicted_acceptance_powereq, t_sum
from .strings import mutate, parse_rle, render_rle

REPORT_VERSION = 1
DIGITS = 40
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def decimal_string(value, digits: int = DIGITS) -> str:
    if isinstance(value, (int, Fraction)):
        value = Fraction(value)
        with localcontext() as ctx:
            ctx.prec = digits
            out = Decimal(value.numerator) / Decimal(value.denominator)
        return format(out.normalize(), "f") if out == out.to_integral() else str(out)
    ctx = getattr(value, "context", None)
    if ctx is not None:
        return ctx.nstr(value, digits)
    return repr(float(value))


def input_summary(word: str) -> dict:
    d = blocks(word)
    return {
        "length": len(word),
        "a_count": word.count("a"),
        "b_count": word.count("b"),
        "blocks": list(d.counts),
        "t_sum": t_sum(d),
    }


def make_report(machine_id: str, k: int, word: str, prob, prediction) -> dict:
    exact = isinstance(prob, Fraction)
    delta = abs(prob - prediction)
    return {
        "report_version": REPORT_VERSION,
        "machine_id": machine_id,
        "k": k,
        "input_summary": input_summary(word),
        "accept_probability": str(prob) if exact else decimal_string(prob),
        "accept_probability_decimal": decimal_string(prob),
        "decision": "accept" if prob * 2 > 1 else "reject",
        "oracle_prediction": str(prediction) if exact else decimal_string(prediction),
        "agreement_delta": str(delta) if exact else decimal_string(delta, 6),
    }


def parse_range(text: str) -> list[int]:
    """``"2..50"`` or ``"64..256:32"``, both ends inclusive."""
    try:
        span, _, step = text.partition(":")
        lo, hi = span.split("..")
        values = list(range(int(lo), int(hi) + 1, int(step) if step else 1))
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}; expected LO..HI or LO..HI:STEP") from exc
    if not values:
        raise UsageError(f"range {text!r} is empty")
    return values


def read_input(args) -> str:
    if args.file:
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc}") from exc
    elif args.input:
        text = " ".join(args.input)
    else:
        raise UsageError("give an input string or --file")
    return parse_rle(text)


def precision_for(args) -> int | None:
    return args.precision or env_precision_bits() or None


def cmd_gen(args) -> int:
    word = member_string(args.n, args.max_n)
    if args.mutate:
        word = mutate(word, args.mutate)
    print(render_rle(word) if args.rle else word)
    return EXIT_OK


def cmd_run(args) -> int:
    word = read_input(args)
    if args.machine == "powereq":
        pm = build_powereq(args.k)
        res = run(pm.machine, word)
        report = make_report(pm.machine.name, args.k, word, res.accept_probability,
                             predicted_acceptance_powereq(word, args.k))
    else:
        oracle = oracle_from_spec(args.oracle, strict=args.strict_oracle)
        cm = build_combined(oracle, args.k, args.n_max, args.guard, precision_for(args))
        res = cm.run(word)
        report = make_report(cm.machine.name, args.k, word, res.accept_probability, cm.predicted(word))
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    def show(case):
        if not args.quiet:
            flag = "ok  " if case.passed else "FAIL"
            print(f"{flag} delta={case.delta:.3e} {case.label} {case.note}".rstrip())

    if args.suite == "powereq":
        ks = [int(k) for k in args.ks.split(",")]
        result = suites.verify_powereq(ks, args.exhaustive_len, args.random, args.max_len, args.seed)
        for case in result.cases:
            show(case)
    elif args.suite == "combined":
        result = suites.verify_combined(args.oracles, args.bits, args.k, args.n_max, args.guard,
                                        precision_for(args) or 128, args.tolerance,
                                        args.seed, report=show)
    else:
        result = suites.verify_invariants(precision_for(args) or 128, args.k, args.seed)
        for case in result.cases:
            show(case)
    status = "PASS" if result.passed else "FAIL"
    print(f"{status} {result.name}: {len(result.cases)} cases, {len(result.failures)} failures, "
          f"max delta {result.max_delta:.3e}")
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    values = parse_range(args.range)
    if args.param == "k":
        word = parse_rle(args.input or "a^8")
        print("k\taccept\treject\tclosed_form_reject\tmatch")
        for k in values:
            prob = run(build_powereq(k).machine, word).accept_probability
            want = 1 - predicted_acceptance_powereq(word, k)
            print(f"{k}\t{prob}\t{1 - prob}\t{want}\t{1 - prob == want}")
        return EXIT_OK

    oracle = oracle_from_spec(args.oracle)
    words = [parse_rle(args.input)] if args.input else [member_string(n) for n in range(args.n_max + 1)]
    reference = NumericField.high_precision(512)
    if args.param == "guard":
        print("guard\tmax_delta_vs_untruncated\tratio")
        previous = None
        for guard in values:
            cm = build_combined(oracle, args.k, args.n_max, guard, precision_for(args))
            deep = args.n_max + 1 + guard + 60
            delta = max(abs(cm.run(w).accept_probability
                            - predicted_acceptance_combined(w, oracle, args.k, deep, reference)) for w in words)
            ratio = "" if previous is None or delta == 0 else f"{float(previous / delta):.2f}"
            print(f"{guard}\t{decimal_string(delta, 6)}\t{ratio}")
            previous = delta
    else:
        print("precision_bits\tmax_delta_vs_oracle")
        for bits in values:
            cm = build_combined(oracle, args.k, args.n_max, args.guard, bits)
            delta = max(abs(cm.run(w).accept_probability
                            - predicted_acceptance_combined(w, oracle, args.k, cm.angle.terms, reference))
                        for w in words)
            print(f"{bits}\t{decimal_string(delta, 6)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afasim", description="Affine finite automata simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="print a member string, optionally mutated")
    g.add_argument("n", type=int)
    g.add_argument("--mutate", help="e.g. block1+1, block0-2, delb1, insb1@3 (comma separated)")
    g.add_argument("--rle", action="store_true", help="print run-length shorthand")
    g.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run one input and print a JSON report")
    r.add_argument("machine", choices=["powereq", "combined"])
    r.add_argument("input", nargs="*", help='input string or shorthand such as "a^7 b a^56"')
    r.add_argument("--file", help="read the input from a file")
    _machine_flags(r)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="compare simulator output with the closed forms")
    v.add_argument("suite", choices=["powereq", "combined", "invariants"])
    _machine_flags(v)
    v.add_argument("--ks", default="2,10,25", help="powereq: comma-separated k values")
    v.add_argument("--exhaustive-len", type=int, default=14)
    v.add_argument("--random", type=int, default=500)
    v.add_argument("--max-len", type=int, default=600)
    v.add_argument("--oracles", type=int, default=200)
    v.add_argument("--bits", type=int, default=12)
    v.add_argument("--tolerance", type=float, default=1e-9)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--quiet", action="store_true", help="summary line only")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="tabulate a quantity as one parameter varies (TSV)")
    s.add_argument("param", choices=["k", "guard", "precision"])
    s.add_argument("range", help="LO..HI or LO..HI:STEP")
    s.add_argument("--input", help="input shorthand (default a^8 for k, member strings otherwise)")
    _machine_flags(s)
    s.set_defaults(func=cmd_sweep)
    return p


def _machine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--oracle", default="builtin:even", help="builtin:NAME, bits:0101... or a bit file")
    p.add_argument("--strict-oracle", action="store_true", help="error on bits past the end of the file")
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    p.add_argument("--guard", type=int, default=DEFAULT_GUARD)
    p.add_argument("--precision", type=int, help="float precision in bits (default: AFA_PRECISION_BITS or 128)")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if extra:
            # positional input words given after options
            if args.command != "run" or any(e.startswith("-") for e in extra):
                parser.error(f"unrecognized arguments: {' '.join(extra)}")
            args.input = list(args.input) + extra
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, OracleError, UnknownSymbolError, ValueError, IndexError) as exc:
        print(f"afasim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:  # pragma: no cover
        return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
