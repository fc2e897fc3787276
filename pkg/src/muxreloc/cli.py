"""Command line driver.

Exit codes: 0 success, 1 user error, 2 verification failure, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import gnl
from .benchgen import BenchSpec, Kind, generate
from .cells import AreaTable, AreaTableError
from .equiv import EquivError, Status, equivalent
from .isomatch import MatchOptions, Safety
from .netlist import NetlistError
from .relocate import optimize

EXIT_OK, EXIT_USER, EXIT_VERIFY, EXIT_INTERNAL = 0, 1, 2, 3


class UserError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _kind(text: str) -> Kind:
    try:
        return Kind.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _bits_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("bit widths must be positive")
    return vals


def _match_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--approx", dest="approx", action="store_true", default=True,
                   help="skip inverters while matching (default)")
    p.add_argument("--no-approx", dest="approx", action="store_false",
                   help="exact structural matching only")
    p.add_argument("--lookahead", type=_positive, default=3, metavar="N")
    p.add_argument("--safety", choices=[s.value for s in Safety], default="strict")
    p.add_argument("--area-table", metavar="FILE")


def _verify_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--exhaustive-limit", type=_nonneg, default=16, metavar="N")
    p.add_argument("--vectors", type=_nonneg, default=100_000, metavar="N")
    p.add_argument("--seed", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="muxreloc", description="Mux relocation for gate-level netlists.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="relocate muxes and write the result")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", metavar="FILE", help="write a JSON report")
    p.add_argument("--no-verify", action="store_true")
    _match_flags(p)
    _verify_flags(p)

    p = sub.add_parser("check", help="compare two netlists by simulation")
    p.add_argument("a")
    p.add_argument("b")
    _verify_flags(p)

    p = sub.add_parser("gen", help="write a generated benchmark")
    p.add_argument("kind", type=_kind)
    p.add_argument("--bits", type=_positive, required=True)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("stats", help="print gate counts, levels and area")
    p.add_argument("input")
    p.add_argument("--area-table", metavar="FILE")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("bench", help="time optimize over a range of sizes")
    p.add_argument("--kind", type=_kind, required=True)
    p.add_argument("--bits", type=_bits_list, required=True, metavar="N,N,...")
    p.add_argument("--csv", required=True, metavar="FILE")
    _match_flags(p)
    return ap


def _table(args) -> AreaTable:
    if not getattr(args, "area_table", None):
        return AreaTable.default()
    try:
        return AreaTable.from_file(args.area_table)
    except OSError as e:
        raise UserError(f"cannot read area table: {e}") from None
    except AreaTableError as e:
        raise UserError(f"{args.area_table}: {e}") from None


def _opts(args) -> MatchOptions:
    return MatchOptions(args.approx, args.lookahead, Safety(args.safety))


def _read(path: str):
    try:
        return gnl.read(path)
    except OSError as e:
        raise UserError(f"cannot read {path}: {e.strerror or e}") from None
    except NetlistError as e:
        raise UserError(f"{path}: {e}") from None


def cmd_optimize(args) -> int:
    table = _table(args)
    opts = _opts(args)
    nl = _read(args.input)
    out = Path(args.output)
    new, report = optimize(nl, opts, table)
    if not args.no_verify:
        verdict = equivalent(nl, new, args.exhaustive_limit, args.vectors, args.seed)
        if verdict.status is Status.COUNTEREXAMPLE:
            if out.exists():
                out.unlink()
            print("verification FAILED", file=sys.stderr)
            print(verdict.format(), file=sys.stderr)
            return EXIT_VERIFY
        print(f"verify: {verdict.format()}")
    gnl.save(new, out)
    if args.report:
        Path(args.report).write_text(report.to_json() + "\n", encoding="utf-8")
    d = report.as_dict()
    print(f"area {d['area_before']} -> {d['area_after']}, "
          f"{d['accepted']} relocations accepted")
    return EXIT_OK


def cmd_check(args) -> int:
    a, b = _read(args.a), _read(args.b)
    try:
        verdict = equivalent(a, b, args.exhaustive_limit, args.vectors, args.seed)
    except EquivError as e:
        raise UserError(str(e)) from None
    print(verdict.format())
    return EXIT_VERIFY if verdict.status is Status.COUNTEREXAMPLE else EXIT_OK


def cmd_gen(args) -> int:
    try:
        spec = BenchSpec(args.kind, args.bits)
    except ValueError as e:
        raise UserError(str(e)) from None
    gnl.save(generate(spec), args.output)
    return EXIT_OK


def cmd_stats(args) -> int:
    table = _table(args)
    st = gnl.stats(_read(args.input), table)
    print(json.dumps(st.as_dict(), indent=2) if args.json else st.format())
    return EXIT_OK


def cmd_bench(args) -> int:
    table = _table(args)
    opts = _opts(args)
    try:
        specs = [BenchSpec(args.kind, n) for n in args.bits]
    except ValueError as e:
        raise UserError(str(e)) from None
    rows = []
    for spec in specs:
        nl = generate(spec)
        t0 = time.perf_counter()
        _, report = optimize(nl, opts, table)
        dt = time.perf_counter() - t0
        d = report.as_dict()
        rows.append([spec.bits, len(nl.gates), f"{dt:.6f}", d["area_before"], d["area_after"]])
        print(f"bits={spec.bits} gates={len(nl.gates)} seconds={dt:.3f} "
              f"area {d['area_before']} -> {d['area_after']}")
    with open(args.csv, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["bits", "gates", "seconds", "area_before", "area_after"])
        w.writerows(rows)
    return EXIT_OK


COMMANDS = {"optimize": cmd_optimize, "check": cmd_check, "gen": cmd_gen,
            "stats": cmd_stats, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USER
    try:
        return COMMANDS[args.cmd](args)
    except UserError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USER
    except Exception as e:  # pragma: no cover - reported, not expected
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
