"""Command-line front end: compress, decompress, bench, inspect and data generators.

Every command prints a JSON report on stdout (unless ``--quiet``).  Exit
codes: 0 success, 1 usage, 2 corrupt input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import statistics
import sys
import time
from typing import List, Optional

import numpy as np

from . import __version__
from .compress import compress_to
from .container import read_file
from .core import Mode, Params, Strategy
from .datagen import NestingSpec, generate_nested, generate_text_like
from .decomp import decompress_file
from .errors import CorruptStream, InvalidDepth, InvalidParams

REPORT_SCHEMA = "warpzip.report/1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CORRUPT = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def default_workers() -> int:
    env = os.environ.get("WARPZIP_WORKERS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"WARPZIP_WORKERS must be an integer, got {env!r}")
        if value < 1:
            raise UsageError("WARPZIP_WORKERS must be positive")
        return value
    return os.cpu_count() or 1


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_codec_flags(p: argparse.ArgumentParser) -> None:
    d = Params()
    p.add_argument("--mode", choices=["byte", "bit"], default=d.mode.name.lower())
    p.add_argument("--de", dest="de", action="store_true", default=d.de_enabled,
                   help="dependency elimination")
    p.add_argument("--no-de", dest="de", action="store_false")
    p.add_argument("--block-size", type=_positive, default=d.block_size)
    p.add_argument("--window", type=_positive, default=d.window_size)
    p.add_argument("--lookahead", type=_positive, default=d.lookahead)
    p.add_argument("--sub-block-seqs", type=_positive, default=d.sub_block_seqs)
    p.add_argument("--cwl", type=_positive, default=d.cwl_max)
    p.add_argument("--min-staleness", type=int, default=d.min_staleness)
    p.add_argument("--de-policy", choices=["deferred", "staleness"], default=d.de_policy)


def _add_run_flags(p: argparse.ArgumentParser, strategy: bool = True) -> None:
    if strategy:
        p.add_argument("--strategy", choices=["sc", "mrr"], default=Params().strategy.value)
    p.add_argument("--workers", type=_positive, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stats-json", metavar="PATH")
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="warpzip", description="Warp-parallel LZ77 codec.")
    parser.add_argument("--version", action="version", version=f"warpzip {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compress", help="compress a file")
    p.add_argument("input")
    p.add_argument("output")
    _add_codec_flags(p)
    _add_run_flags(p)

    p = sub.add_parser("decompress", help="decompress a file")
    p.add_argument("input")
    p.add_argument("output")
    _add_run_flags(p)

    p = sub.add_parser("bench", help="compress once, time repeated decompression")
    p.add_argument("input")
    _add_codec_flags(p)
    _add_run_flags(p, strategy=False)
    p.add_argument("--strategies", default="sc,mrr")
    p.add_argument("--repeats", type=_positive, default=5)

    p = sub.add_parser("inspect", help="print container headers as JSON")
    p.add_argument("input")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--stats-json", metavar="PATH")

    p = sub.add_parser("gen-nested", help="dataset with a fixed back-reference nesting depth")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--size", type=_positive, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--unit-len", type=_positive, default=16)
    p.add_argument("--block-size", type=_positive, default=Params().block_size)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--stats-json", metavar="PATH")

    p = sub.add_parser("gen-text", help="Zipfian pseudo-text")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--stats-json", metavar="PATH")
    return parser


def params_from_args(args) -> Params:
    return Params(block_size=args.block_size, window_size=args.window,
                  lookahead=args.lookahead, sub_block_seqs=args.sub_block_seqs,
                  cwl_max=args.cwl, min_staleness=args.min_staleness,
                  de_policy=args.de_policy, mode=Mode[args.mode.upper()],
                  de_enabled=args.de, strategy=Strategy(getattr(args, "strategy", "mrr")))


def params_dict(p: Params) -> dict:
    return {
        "block_size": p.block_size,
        "window_size": p.window_size,
        "lookahead": p.lookahead,
        "sub_block_seqs": p.sub_block_seqs,
        "cwl_max": p.cwl_max,
        "min_staleness": p.min_staleness,
        "de_policy": p.de_policy,
        "min_match": p.min_match,
    }


def _report(command: str, **fields) -> dict:
    return {"schema": REPORT_SCHEMA, "command": command, **fields}


def _read(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def cmd_compress(args) -> dict:
    params = params_from_args(args)
    workers = args.workers or default_workers()
    data = _read(args.input)
    t0 = time.perf_counter()
    with open(args.output, "wb") as f:
        result = compress_to(data, f, params, workers)
        out_len = f.tell()
    wall = time.perf_counter() - t0
    return _report(
        "compress", mode=params.mode.name.lower(), strategy=None, de_enabled=params.de_enabled,
        params=params_dict(params), input_bytes=len(data), output_bytes=out_len,
        ratio=len(data) / out_len, blocks=result.header.block_count,
        tokens=result.token_count, workers=workers,
        timings={**result.timings, "total_s": wall})


def cmd_decompress(args) -> dict:
    workers = args.workers or default_workers()
    strategy = Strategy(args.strategy)
    in_len = os.path.getsize(args.input)
    t0 = time.perf_counter()
    with open(args.input, "rb") as src, open(args.output, "wb") as dst:
        fh, stats = decompress_file(src, dst, strategy, workers)
    wall = time.perf_counter() - t0
    return _report(
        "decompress", mode=fh.mode.name.lower(), strategy=strategy.value,
        de_enabled=fh.de_enabled, params=fh.to_dict(), input_bytes=in_len,
        output_bytes=fh.total_len, ratio=fh.total_len / in_len if in_len else 0.0,
        workers=workers, timings={"total_s": wall,
                                  "throughput_mb_s": fh.total_len / wall / 1e6 if wall else 0.0},
        stats=stats.to_dict())


def cmd_bench(args) -> dict:
    params = params_from_args(args)
    workers = args.workers or default_workers()
    strategies = [Strategy(s.strip()) for s in args.strategies.split(",") if s.strip()]
    data = _read(args.input)
    sink = io.BytesIO()
    t0 = time.perf_counter()
    compress_to(data, sink, params, workers)
    comp_s = time.perf_counter() - t0
    blob = sink.getvalue()
    runs = {}
    for strategy in strategies:
        times = []
        stats = None
        for i in range(args.repeats + 1):  # first run discarded
            out = io.BytesIO()
            t0 = time.perf_counter()
            _, stats = decompress_file(blob, out, strategy, workers)
            dt = time.perf_counter() - t0
            if out.getvalue() != data:
                raise CorruptStream("benchmark round-trip mismatch")
            if i:
                times.append(dt)
        med = statistics.median(times)
        runs[strategy.value] = {
            "median_s": med,
            "runs_s": times,
            "throughput_mb_s": len(data) / med / 1e6 if med else 0.0,
            "stats": stats.to_dict(per_block=False),
        }
    return _report(
        "bench", mode=params.mode.name.lower(), strategy=None, de_enabled=params.de_enabled,
        params=params_dict(params), input_bytes=len(data), output_bytes=len(blob),
        ratio=len(data) / len(blob), workers=workers, repeats=args.repeats,
        timings={"compress_s": comp_s,
                 "compress_mb_s": len(data) / comp_s / 1e6 if comp_s else 0.0},
        decompress=runs)


def cmd_inspect(args) -> dict:
    with open(args.input, "rb") as f:
        fh, records = read_file(f)
        blocks = []
        for i, (bh, _) in enumerate(records):
            d = bh.to_dict()
            d["index"] = i
            d["sub_block_starts"] = np.concatenate(
                ([0], np.cumsum(bh.sub_block_bits)[:-1])).astype(int).tolist() \
                if bh.sub_block_count else []
            if bh.litlen_lengths is not None:
                d["max_code_len"] = int(max(bh.litlen_lengths.max(), bh.dist_lengths.max()))
            blocks.append(d)
    return _report("inspect", header=fh.to_dict(), blocks=blocks)


def _write_out(path: str, data: bytes) -> None:
    with open(path, "wb") as f:
        f.write(data)


def cmd_gen_nested(args) -> dict:
    spec = NestingSpec(args.depth, args.size, unit_len=args.unit_len,
                       block_size=args.block_size, seed=args.seed)
    data = generate_nested(spec)
    _write_out(args.out, data)
    return _report("gen-nested", depth=spec.depth, output_bytes=len(data), path=args.out)


def cmd_gen_text(args) -> dict:
    data = generate_text_like(args.size, seed=args.seed)
    _write_out(args.out, data)
    return _report("gen-text", output_bytes=len(data), seed=args.seed, path=args.out)


COMMANDS = {
    "compress": cmd_compress,
    "decompress": cmd_decompress,
    "bench": cmd_bench,
    "inspect": cmd_inspect,
    "gen-nested": cmd_gen_nested,
    "gen-text": cmd_gen_text,
}


def _error(kind: str, exc: BaseException, code: int) -> int:
    print(f"warpzip: {kind}: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = COMMANDS[args.command](args)
    except CorruptStream as exc:
        return _error("corrupt input", exc, EXIT_CORRUPT)
    except (UsageError, InvalidParams, InvalidDepth, ValueError) as exc:
        return _error("usage", exc, EXIT_USAGE)
    except OSError as exc:
        return _error("io", exc, EXIT_IO)
    text = json.dumps(report, indent=2)
    if getattr(args, "stats_json", None):
        try:
            with open(args.stats_json, "w") as f:
                f.write(text + "\n")
        except OSError as exc:
            return _error("io", exc, EXIT_IO)
    if not args.quiet:
        try:
            print(text)
        except BrokenPipeError:
            sys.stderr.close()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
