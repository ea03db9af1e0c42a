"""Command line entry point: analyze, generate, verify, bbp.

Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 verification
mismatch.
"""
import argparse
import logging
import math
import os
import sys

import numpy as np

from . import digitstream as ds
from .errors import DigitLawError, UsageError
from .harness import DEFAULT_OUT_ENV, RunConfig, run_analysis

log = logging.getLogger("digitlaw")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _count(text):
    """Digit counts: plain integers or 1e7-style scientific notation."""
    try:
        value = int(text) if text.isdigit() else int(float(text))
        if float(text) != value:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a whole number: {text!r}") from None
    return value


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list: {text!r}") from None


def _pair(kind):
    def parse(text):
        parts = text.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected two values 'a,b', got {text!r}")
        return tuple(kind(p) for p in parts)
    return parse


def build_parser():
    parser = _Parser(prog="digitlaw", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="stream a digit source through the CLT/LIL battery")
    a.add_argument("--source", required=True,
                   help="digit file path or gen:sqrt2 | gen:sqrt:<m> | gen:e | gen:pi | gen:baseline")
    a.add_argument("--base", type=int, default=10)
    a.add_argument("--digits", type=_count, default=10 ** 6)
    a.add_argument("--step", type=float, default=0.1, choices=(0.1, 0.025))
    a.add_argument("--burn-in", type=_count, default=0)
    a.add_argument("--block-size", type=_count, default=10 ** 8)
    a.add_argument("--points-per-block", type=_count, default=1000)
    a.add_argument("--k", type=lambda s: tuple(int(v) for v in s.split(",") if v),
                   default=(1, 2), help="comma-separated pattern lengths")
    a.add_argument("--out", default=None,
                   help=f"output directory (default ${DEFAULT_OUT_ENV} or ./digitlaw-out)")
    a.add_argument("--checkpoint", default=None)
    a.add_argument("--checkpoint-every", type=_count, default=0,
                   help="also checkpoint every N digits (chunk-aligned)")
    a.add_argument("--resume", action="store_true")
    a.add_argument("--threads", type=int, default=1)
    a.add_argument("--seed", type=int, default=1)
    a.add_argument("--format", choices=("auto", "ascii", "ascii-with-header"), default="auto")
    a.add_argument("--lenient", action="store_true", help="skip invalid bytes with a warning")
    a.add_argument("--tails", type=_floats, default=(0.6, 1.0))
    a.add_argument("--interval", type=_pair(float), default=None,
                   help="d interval lo,hi counted over --window")
    a.add_argument("--window", type=_pair(_count), default=None, help="n range from,to")
    a.add_argument("--sample-every", type=_count, default=0)
    a.add_argument("--chunk-size", type=_count, default=1 << 22)
    a.add_argument("--svg", action="store_true", help="also write SVG charts")

    g = sub.add_parser("generate", help="write digits of a constant to an ASCII file")
    g.add_argument("--constant", required=True, help="sqrt:<m> | e | pi")
    g.add_argument("--digits", type=_count, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--no-header", action="store_true", help="omit the '<int>.' prefix")

    v = sub.add_parser("verify", help="compare a digit file with a generator")
    v.add_argument("--file", required=True)
    v.add_argument("--against", required=True, help="sqrt:<m> | e | pi | bbp (hex pi)")
    v.add_argument("--prefix", type=_count, required=True)
    v.add_argument("--base", type=int, default=None)
    v.add_argument("--format", choices=("auto", "ascii", "ascii-with-header"), default="auto")

    b = sub.add_parser("bbp", help="hex digits of pi at a position (BBP)")
    b.add_argument("--position", type=_count, required=True)
    b.add_argument("--count", type=_count, default=1)
    return parser


def _generator(kind, count):
    kind = kind[4:] if kind.startswith("gen:") else kind
    if kind == "e":
        return ds.gen_e_digits(count), "2"
    if kind == "pi":
        return ds.gen_pi_digits(count), "3"
    if kind == "sqrt2":
        kind = "sqrt:2"
    if kind.startswith("sqrt:") and kind[5:].isdigit():
        m = int(kind[5:])
        return ds.gen_sqrt_digits(m, count), str(math.isqrt(m))
    if kind == "bbp":
        digits = np.array(ds.bbp_hex_digits(1, count), dtype=np.uint8)
        return ds.ArrayDigitStream(digits, 16, {"kind": "gen", "constant": "bbp"}), "3"
    raise UsageError(f"unknown generator {kind!r}")


def _sniff_format(path, fmt):
    if fmt != "auto":
        return fmt
    with open(path, "rb") as fh:
        return "ascii-with-header" if b"." in fh.read(64) else "ascii"


def cmd_analyze(args):
    out = args.out or os.environ.get(DEFAULT_OUT_ENV) or "digitlaw-out"
    config = RunConfig(
        source=args.source, base=args.base, max_digits=args.digits, step=args.step,
        burn_in=args.burn_in, block_size=args.block_size,
        points_per_block=args.points_per_block, k_list=args.k, out_dir=out,
        checkpoint_path=args.checkpoint, checkpoint_interval=args.checkpoint_every,
        seed=args.seed, threads=args.threads, chunk_size=args.chunk_size,
        file_format=args.format, strict=not args.lenient, tail_thresholds=args.tails,
        interval=args.interval, window=args.window, sample_every=args.sample_every,
        svg=args.svg)
    state = run_analysis(config, resume=args.resume,
                         progress=lambda n: log.info("n = %d", n))
    with open(os.path.join(out, "summary.txt")) as fh:
        sys.stdout.write(fh.read())
    return 0 if state.scan.n else 2


def cmd_generate(args):
    stream, int_part = _generator(args.constant, args.digits)
    with open(args.out, "wb") as fh:
        if not args.no_header:
            fh.write(f"{int_part}.".encode())
        fh.write((stream.digits + 48).tobytes())
        fh.write(b"\n")
    return 0


def cmd_verify(args):
    kind = args.against[4:] if args.against.startswith("gen:") else args.against
    base = args.base or (16 if kind == "bbp" else 10)
    ref, _ = _generator(args.against, args.prefix)
    fmt = _sniff_format(args.file, args.format)
    stream = ds.open_digit_file(args.file, base, fmt)
    report = ds.verify_prefix(stream, ref, args.prefix)
    if report.status == "match":
        print(f"match: {report.digits_compared} digits")
        return 0
    if report.status == "mismatch":
        print(f"mismatch at digit {report.first_mismatch}")
    else:
        print(f"short input: only {report.digits_compared} digits available")
    return 3


def cmd_bbp(args):
    digits = ds.bbp_hex_digits(args.position, args.count)
    print("".join("0123456789ABCDEF"[d] for d in digits))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"analyze": cmd_analyze, "generate": cmd_generate,
               "verify": cmd_verify, "bbp": cmd_bbp}[args.command]
    try:
        return handler(args)
    except DigitLawError as exc:
        print(f"digitlaw: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"digitlaw: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
