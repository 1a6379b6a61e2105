"""Command-line front end: ``polyinv <command> FILE ...``.

Exit codes for ``invert`` and ``crt-invert``: 0 invertible, 2 not invertible,
3 inconclusive. ``verify`` exits 0 or 1. Usage errors exit 64, malformed input
65 and unreadable files 66.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .bounds import global_bound_C
from .inversion import InversionError, Status, invert, stats_csv, stats_stream, step_bounds
from .mapdoc import MapSyntaxError, read_map, render_map
from .modcrt import CrtError, PipelineStatus, pipeline_invert_crt, reduce_map, verify_inverse
from .poly import PolyError, shape_of
from .ring import QQ, ZZ, RingError
from .segre import ClearingError, clear_denominators

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_NOT_INVERTIBLE = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOINPUT = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _prime_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated primes, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polyinv", description="Invert polynomial maps of the form X + H.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="map document")
    common.add_argument("--ring", help="force the ring: integer, rational or gf(p)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("invert", parents=[common], help="invert by the Δ iteration")
    p.add_argument("--max-steps", type=int, help="stop after this many steps")
    p.add_argument("--stats-out", help="write per-step statistics as CSV")
    p.add_argument("--truncate", action="store_true",
                   help="iterate modulo degree > D^(n-1) (faster; Pascal finiteness not reported)")

    p = sub.add_parser("segre", parents=[common], help="clear denominators by specialization")
    p.add_argument("--r", type=int, help="specialization parameter (default: lcm of denominators)")

    p = sub.add_parser("reduce", parents=[common], help="reduce an integer map modulo a prime")
    p.add_argument("--prime", type=int, required=True)

    sub.add_parser("bound", parents=[common], help="step bound μ and coefficient bound C")

    p = sub.add_parser("crt-invert", parents=[common], help="invert via modular inverses and CRT")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--primes", type=_prime_list, help="comma-separated primes")
    g.add_argument("--auto", action="store_true", help="choose primes automatically (default)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--early-exit", action="store_true",
                   help="stop once two merges agree and the lift verifies")
    p.add_argument("--max-primes", type=int, default=64, help="prime budget for --auto")
    p.add_argument("--trace-coeffs", help="write the coefficient trace as CSV")
    p.add_argument("--trace-coordinate", type=int, action="append",
                   help="restrict the trace to this coordinate (repeatable)")
    p.add_argument("--report", help="write per-prime rows as CSV")

    p = sub.add_parser("stats", parents=[common], help="Δ-sequence statistics of one coordinate")
    p.add_argument("--coordinate", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", help="CSV output (default: stdout)")

    p = sub.add_parser("verify", parents=[common], help="check G∘F = F∘G = Id")
    p.add_argument("gfile", help="candidate inverse")
    return parser


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_invert(args, F) -> int:
    res = invert(F, args.max_steps, truncate=args.truncate, stats=bool(args.stats_out))
    if args.stats_out:
        _write(args.stats_out, stats_csv(res.report))
    print(f"# status: {res.status}; steps: {res.steps}; mu: {res.mu}", file=sys.stderr)
    if res.status is Status.INCONCLUSIVE:
        print(f"inconclusive: {res.message}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if not res.invertible:
        print(f"not invertible: {res.message}", file=sys.stderr)
        return EXIT_NOT_INVERTIBLE
    sys.stdout.write(render_map(res.inverse, "G", ring_header=True))
    return EXIT_OK


def _cmd_segre(args, F) -> int:
    cert = clear_denominators(F.change_ring(QQ) if F.ring == ZZ else F, args.r)
    sys.stdout.write(f"# r = {cert.r}\n" + render_map(cert.cleared, "F", ring_header=True))
    return EXIT_OK


def _cmd_reduce(args, F) -> int:
    sys.stdout.write(render_map(reduce_map(F, args.prime), "F", ring_header=True))
    return EXIT_OK


def _cmd_bound(args, F) -> int:
    shape = shape_of(F)
    mu, per = step_bounds(shape)
    rep = global_bound_C(shape)
    print(f"mu = {mu}")
    for i, m in sorted(per.items()):
        print(f"m{i} = {m}")
    if rep.C is not None:
        print(f"C = {rep.C}")
        print(f"2C+1 = {rep.threshold}")
    elif rep.log2_lower is not None:
        a = rep.log2_lower.bit_length() - 1
        b = rep.log2_upper.bit_length()
        print(f"C = not materialized; 2^(2^{a}) <= C < 2^(2^{b})")
        print("2C+1 = not materialized")
    else:
        print("C = not materialized; step bound too large for bit estimates")
        print("2C+1 = not materialized")
    return EXIT_OK


def _cmd_crt(args, F) -> int:
    primes = args.primes if args.primes else "auto"
    rep = pipeline_invert_crt(F, primes, jobs=max(1, args.jobs), early_exit=args.early_exit,
                              max_primes=args.max_primes)
    if args.report:
        _write(args.report, rep.report_csv())
    if args.trace_coeffs:
        _write(args.trace_coeffs, rep.trace_csv(args.trace_coordinate))
    used = [w.p for w in rep.witnesses]
    print(f"# status: {rep.status}; primes: {used}; N = {rep.N}; certified by: "
          f"{rep.certified_by or '-'}", file=sys.stderr)
    if rep.status is PipelineStatus.INVERTIBLE:
        sys.stdout.write(render_map(rep.inverse, "G", ring_header=True))
        return EXIT_OK
    print(rep.message, file=sys.stderr)
    return EXIT_NOT_INVERTIBLE if rep.status is PipelineStatus.NOT_INVERTIBLE else EXIT_INCONCLUSIVE


def _cmd_stats(args, F) -> int:
    rows = stats_stream(F, args.coordinate, args.steps)
    _write(args.out, stats_csv(rows))
    return EXIT_OK


def _cmd_verify(args, F) -> int:
    G = read_map(args.gfile, args.ring or F.ring).polymap
    ok = verify_inverse(F, G)
    print("inverse" if ok else "not an inverse")
    return EXIT_OK if ok else EXIT_FAIL


_COMMANDS = {
    "invert": _cmd_invert,
    "segre": _cmd_segre,
    "reduce": _cmd_reduce,
    "bound": _cmd_bound,
    "crt-invert": _cmd_crt,
    "stats": _cmd_stats,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        F = read_map(args.file, args.ring).polymap
        return _COMMANDS[args.command](args, F)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except (MapSyntaxError, RingError, PolyError, ClearingError, CrtError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InversionError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
