"""Whole-input compression: split into blocks, parse, entropy-code, serialise."""

from __future__ import annotations

import io
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO, Dict, List

import numpy as np

from .container import BlockHeader, EncodedBlock, FileHeader, write_file
from .core import Block, Mode, Params
from .entropy import encode_block_bit, encode_block_byte
from .errors import InvalidParams
from .lz77 import compress_block, compress_block_de


def parse_block(data, params: Params, index: int = 0) -> Block:
    if params.de_enabled:
        return compress_block_de(data, params, index)
    return compress_block(data, params, index)


def encode_block(block: Block, params: Params) -> EncodedBlock:
    if params.mode == Mode.BIT:
        bb = encode_block_bit(block, params)
        bh = BlockHeader(len(bb.payload), block.uncompressed_len, block.seq_count,
                         bb.sub_block_bits, bb.litlen.lengths, bb.dist.lengths)
        return bh, bb.payload
    payload = encode_block_byte(block)
    return BlockHeader(len(payload), block.uncompressed_len, block.seq_count), payload


@dataclass
class CompressResult:
    header: FileHeader
    blocks: List[EncodedBlock]
    timings: Dict[str, float] = field(default_factory=dict)
    token_count: int = 0


def _check_params(params: Params) -> None:
    if params.min_match != 4:
        raise InvalidParams("the container format requires min_match = 4")


def compress_blocks(data: bytes, params: Params = Params(), workers: int = 1) -> CompressResult:
    """Parse and encode every block of ``data``; output order is block order."""
    _check_params(params)
    arr = np.frombuffer(data, dtype=np.uint8)
    bs = params.block_size
    chunks = [arr[i:i + bs] for i in range(0, len(arr), bs)]
    timings = {"parse_s": 0.0, "encode_s": 0.0}

    def work(item):
        index, chunk = item
        t0 = time.perf_counter()
        block = parse_block(chunk, params, index)
        t1 = time.perf_counter()
        enc = encode_block(block, params)
        t2 = time.perf_counter()
        return enc, block.token_count(), t1 - t0, t2 - t1

    t_start = time.perf_counter()
    if workers <= 1:
        results = [work(item) for item in enumerate(chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, enumerate(chunks)))
    for _, _, tp, te in results:
        timings["parse_s"] += tp
        timings["encode_s"] += te
    timings["wall_s"] = time.perf_counter() - t_start
    header = FileHeader.for_params(params, len(arr), zlib.crc32(data))
    return CompressResult(header, [r[0] for r in results], timings, sum(r[1] for r in results))


def compress_to(data: bytes, sink: BinaryIO, params: Params = Params(),
                workers: int = 1) -> CompressResult:
    result = compress_blocks(data, params, workers)
    t0 = time.perf_counter()
    write_file(result.header, result.blocks, sink)
    result.timings["write_s"] = time.perf_counter() - t0
    return result


def compress_bytes(data: bytes, params: Params = Params(), workers: int = 1) -> bytes:
    sink = io.BytesIO()
    compress_to(data, sink, params, workers)
    return sink.getvalue()
