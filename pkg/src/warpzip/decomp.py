"""Block decompression on a simulated warp.

A block's sequences are processed in groups of 32, one per lane:

1. two exclusive prefix sums over the lanes give each lane's offset into
   the literal arena and into the output;
2. every lane copies its literal string;
3. back-references are resolved, either one lane after another (SC) or
   by multi-round resolution (MRR): each round, every pending lane whose
   source bytes lie below the high-water mark copies, then the mark is
   recomputed.

The high-water mark is the end of the gap-free output prefix: the write
position of the lowest pending lane, found with a ballot over the pending
flags and a shuffle from that lane.  A lane whose copy overlaps its own
output (distance < length) only needs the bytes below its write position,
so it is ready as soon as the mark reaches that position.  The lowest
pending lane is therefore always ready, and every round makes progress on
a well-formed stream.
"""

from __future__ import annotations

import collections
import io
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO, List, Optional, Tuple, Union

import numpy as np
from numba import njit

from .container import BlockHeader, FileHeader, read_file
from .core import WARP_SIZE, Block, Mode, Strategy
from .entropy import decode_block_bit, decode_block_byte_arrays
from .errors import ChecksumMismatch, CorruptStream, MalformedBackRef, NoProgress
from .huffman import HuffmanTable
from .warp import FULL_MASK, Warp, ballot, exclusive_scan, lowest_lane, shfl

MAX_ROUNDS = WARP_SIZE

OK = 0
ERR_MALFORMED = 1
ERR_NO_PROGRESS = 2
ERR_SIZE = 3


@njit(cache=True, nogil=True)
def _copy(out, src, dst, n):
    # front to back, so overlapping copies replicate
    for i in range(n):
        out[dst + i] = out[src + i]


@njit(cache=True, nogil=True)
def _mrr_group(out, pending, read_pos, write_pos, length, group_end, bytes_per_round,
               hwm_trace):
    """Resolve one group's back-references; returns the round count, -1 on no progress."""
    active = ballot(pending, FULL_MASK)
    lane = lowest_lane(active)
    hwm = shfl(write_pos, lane) if lane >= 0 else group_end
    rounds = 0
    while active != 0:
        hwm_trace[rounds] = hwm
        rounds += 1
        resolved = 0
        for i in range(32):
            if pending[i] and min(read_pos[i] + length[i], write_pos[i]) <= hwm:
                _copy(out, read_pos[i], write_pos[i], length[i])
                pending[i] = False
                resolved += 1
                bytes_per_round[rounds] += length[i]
        if resolved == 0:
            return -1
        active = ballot(pending, FULL_MASK)
        lane = lowest_lane(active)
        hwm = shfl(write_pos, lane) if lane >= 0 else group_end
    hwm_trace[rounds] = hwm
    return rounds


@njit(cache=True, nogil=True)
def _layout(lit_len, match_len, g0, lanes, ll, tot, lit_off, out_off, scratch):
    for i in range(32):
        if i < lanes:
            ll[i] = lit_len[g0 + i]
            tot[i] = ll[i] + match_len[g0 + i]
        else:
            ll[i] = 0
            tot[i] = 0
    mask = (1 << lanes) - 1
    exclusive_scan(ll, mask, lit_off, scratch)
    exclusive_scan(tot, mask, out_off, scratch)
    return lit_off[lanes - 1] + ll[lanes - 1], out_off[lanes - 1] + tot[lanes - 1]


@njit(cache=True, nogil=True)
def _copy_literals(out, literals, ll, lit_off, out_off, lit_base, out_base, lanes):
    for i in range(lanes):
        src = lit_base + lit_off[i]
        dst = out_base + out_off[i]
        for k in range(ll[i]):
            out[dst + k] = literals[src + k]


@njit(cache=True, nogil=True)
def _decompress_kernel(lit_len, match_len, dist, literals, out, use_mrr, rounds_hist,
                       full_hist, bytes_per_round):
    """Returns (status, failing sequence index)."""
    nseq = lit_len.shape[0]
    n_out = out.shape[0]
    n_lit = literals.shape[0]
    ll = np.zeros(32, np.int64)
    tot = np.zeros(32, np.int64)
    lit_off = np.zeros(32, np.int64)
    out_off = np.zeros(32, np.int64)
    scratch = np.zeros(32, np.int64)
    read_pos = np.zeros(32, np.int64)
    write_pos = np.zeros(32, np.int64)
    length = np.zeros(32, np.int64)
    pending = np.zeros(32, np.bool_)
    hwm_trace = np.zeros(33, np.int64)
    lit_base = 0
    out_base = 0
    for g0 in range(0, nseq, 32):
        lanes = min(32, nseq - g0)
        lit_total, out_total = _layout(lit_len, match_len, g0, lanes, ll, tot, lit_off,
                                       out_off, scratch)
        if lit_base + lit_total > n_lit or out_base + out_total > n_out:
            return ERR_SIZE, g0
        _copy_literals(out, literals, ll, lit_off, out_off, lit_base, out_base, lanes)
        for i in range(32):
            pending[i] = False
            if i < lanes and match_len[g0 + i] > 0:
                d = np.int64(dist[g0 + i])
                w = out_base + out_off[i] + ll[i]
                if d < 1 or d > w:
                    return ERR_MALFORMED, g0 + i
                pending[i] = True
                write_pos[i] = w
                read_pos[i] = w - d
                length[i] = match_len[g0 + i]
            else:
                write_pos[i] = out_base + out_off[i] + ll[i] if i < lanes else out_base + out_total
                length[i] = 0
        if use_mrr:
            rounds = _mrr_group(out, pending, read_pos, write_pos, length,
                                out_base + out_total, bytes_per_round, hwm_trace)
            if rounds < 0:
                return ERR_NO_PROGRESS, g0
            rounds_hist[rounds] += 1
            if lanes == 32:
                full_hist[rounds] += 1
        else:
            for i in range(lanes):
                if pending[i]:
                    _copy(out, read_pos[i], write_pos[i], length[i])
        lit_base += lit_total
        out_base += out_total
    if lit_base != n_lit or out_base != n_out:
        return ERR_SIZE, nseq
    return OK, -1


# --- Python-facing pieces ----------------------------------------------------

@dataclass
class GroupLayout:
    """Per-lane offsets of one group, from two exclusive prefix sums."""

    lit_offsets: List[int]
    out_offsets: List[int]
    lit_base: int = 0
    out_base: int = 0

    @classmethod
    def compute(cls, lit_lens, match_lens, lit_base: int = 0, out_base: int = 0,
                warp: Optional[Warp] = None) -> "GroupLayout":
        lanes = len(lit_lens)
        warp = warp or Warp.with_lanes(lanes)
        pad = [0] * (WARP_SIZE - lanes)
        ll = [int(x) for x in lit_lens] + pad
        tot = [a + int(b) for a, b in zip(ll, list(match_lens) + pad)]
        lit_off = warp.exclusive_prefix_sum(ll)[:lanes]
        out_off = warp.exclusive_prefix_sum(tot)[:lanes]
        return cls([lit_base + x for x in lit_off], [out_base + x for x in out_off],
                   lit_base, out_base)


def copy_literals_group(lit_strings, layout: GroupLayout, out) -> None:
    """Place each lane's literal string at its output offset."""
    as_array = isinstance(out, np.ndarray)
    for s, off in zip(lit_strings, layout.out_offsets):
        out[off:off + len(s)] = np.frombuffer(s, dtype=np.uint8) if as_array else s


@dataclass
class MrrState:
    """Pending back-references of one group, one entry per lane."""

    pending: List[bool]
    read_pos: List[int]
    write_pos: List[int]
    length: List[int]
    group_end: int
    hwm: int = 0
    rounds: int = 0
    hwm_trace: List[int] = field(default_factory=list)
    bytes_per_round: List[int] = field(default_factory=list)

    @classmethod
    def for_group(cls, seqs, out_base: int = 0) -> "MrrState":
        """State after the literals of ``seqs`` (at most 32 sequences) are written."""
        if len(seqs) > WARP_SIZE:
            raise ValueError("a group holds at most 32 sequences")
        pending, rp, wp, ln = [], [], [], []
        pos = out_base
        for s in seqs:
            pos += len(s.literal)
            br = s.backref
            pending.append(br is not None)
            wp.append(pos)
            rp.append(pos - br.distance if br else pos)
            ln.append(br.length if br else 0)
            pos += br.length if br else 0
        return cls(pending, rp, wp, ln, pos)


def mrr_resolve_group(state: MrrState, out) -> int:
    """Run multi-round resolution on ``out`` in place; returns the number of rounds."""
    lanes = len(state.pending)

    def lanes32(values, fill):
        return np.array(list(values) + [fill] * (WARP_SIZE - lanes), dtype=np.int64)

    pending = np.array(list(state.pending) + [False] * (WARP_SIZE - lanes), dtype=np.bool_)
    read_pos = lanes32(state.read_pos, 0)
    write_pos = lanes32(state.write_pos, state.group_end)
    length = lanes32(state.length, 0)
    if np.any(pending & ((write_pos - read_pos < 1) | (read_pos < 0))):
        raise MalformedBackRef("back-reference reaches before the output start")
    buf = out if isinstance(out, np.ndarray) else np.frombuffer(out, dtype=np.uint8)
    bpr = np.zeros(MAX_ROUNDS + 1, dtype=np.int64)
    trace = np.zeros(MAX_ROUNDS + 1, dtype=np.int64)
    rounds = _mrr_group(buf, pending, read_pos, write_pos, length, state.group_end, bpr, trace)
    if rounds < 0:
        raise NoProgress("no back-reference could be resolved in a round")
    state.pending = pending[:lanes].tolist()
    state.rounds = rounds
    state.hwm = int(trace[rounds])
    state.hwm_trace = trace[:rounds + 1].tolist()
    state.bytes_per_round = bpr[1:rounds + 1].tolist()
    return rounds


@dataclass
class DecompStats:
    """Round statistics; index r of a histogram counts groups needing r MRR rounds."""

    strategy: str = Strategy.MRR.value
    blocks: int = 0
    groups: int = 0
    full_groups: int = 0
    rounds_hist: List[int] = field(default_factory=lambda: [0] * (MAX_ROUNDS + 1))
    full_rounds_hist: List[int] = field(default_factory=lambda: [0] * (MAX_ROUNDS + 1))
    bytes_per_round: List[int] = field(default_factory=lambda: [0] * (MAX_ROUNDS + 1))
    per_block: List[dict] = field(default_factory=list)

    def add_block(self, index: int, nseq: int, rounds_hist, full_hist, bpr) -> None:
        groups = -(-nseq // WARP_SIZE)
        self.blocks += 1
        self.groups += groups
        self.full_groups += nseq // WARP_SIZE
        for i in range(MAX_ROUNDS + 1):
            self.rounds_hist[i] += int(rounds_hist[i])
            self.full_rounds_hist[i] += int(full_hist[i])
            self.bytes_per_round[i] += int(bpr[i])
        self.per_block.append({
            "index": index,
            "groups": groups,
            "rounds_hist": _sparse(rounds_hist),
            "bytes_per_round": _sparse(bpr),
        })

    def mean_rounds(self) -> float:
        """Mean rounds over groups holding at least one back-reference."""
        n = sum(self.rounds_hist[1:])
        return sum(r * c for r, c in enumerate(self.rounds_hist)) / n if n else 0.0

    def to_dict(self, per_block: bool = True) -> dict:
        d = {
            "strategy": self.strategy,
            "blocks": self.blocks,
            "groups": self.groups,
            "full_groups": self.full_groups,
            "rounds_hist": _sparse(self.rounds_hist),
            "full_group_rounds_hist": _sparse(self.full_rounds_hist),
            "bytes_per_round": _sparse(self.bytes_per_round),
            "mean_rounds": self.mean_rounds(),
        }
        if per_block:
            d["per_block"] = self.per_block
        return d


def _sparse(hist) -> dict:
    return {str(i): int(v) for i, v in enumerate(hist) if v}


_STATUS_ERRORS = {
    ERR_MALFORMED: (MalformedBackRef, "back-reference reaches outside the block output"),
    ERR_NO_PROGRESS: (NoProgress, "multi-round resolution made no progress"),
    ERR_SIZE: (CorruptStream, "sequence lengths do not match the block size"),
}


def _run_kernel(lit_len, match_len, dist, literals, out, strategy: Strategy):
    hist = np.zeros(MAX_ROUNDS + 1, dtype=np.int64)
    full = np.zeros(MAX_ROUNDS + 1, dtype=np.int64)
    bpr = np.zeros(MAX_ROUNDS + 1, dtype=np.int64)
    status, where = _decompress_kernel(lit_len, match_len, dist, literals, out,
                                       strategy == Strategy.MRR, hist, full, bpr)
    if status != OK:
        cls, msg = _STATUS_ERRORS[status]
        raise cls(f"{msg} (sequence {where})")
    return hist, full, bpr


def decompress_block(block: Union[Block, list], strategy: Strategy = Strategy.MRR,
                     out: Optional[np.ndarray] = None) -> Tuple[np.ndarray, DecompStats]:
    """Expand one block's sequences; returns the output bytes and round stats."""
    if not isinstance(block, Block):
        block = Block.from_sequences(block)
    strategy = Strategy(strategy)
    if out is None:
        out = np.zeros(block.uncompressed_len, dtype=np.uint8)
    hist, full, bpr = _run_kernel(block.lit_len, block.match_len, block.distance,
                                  block.literals, out, strategy)
    stats = DecompStats(strategy.value)
    stats.add_block(block.index, block.seq_count, hist, full, bpr)
    return out, stats


def decode_tokens(fh: FileHeader, bh: BlockHeader, payload: bytes):
    """Entropy-decode one block record into column arrays."""
    if fh.mode == Mode.BIT:
        # the tables only need to be as wide as the longest code in use,
        # which may be well below the header's limit
        width = int(max(bh.litlen_lengths.max(), bh.dist_lengths.max()))
        litlen = HuffmanTable.from_lengths(bh.litlen_lengths, width)
        dist = HuffmanTable.from_lengths(bh.dist_lengths, width)
        return decode_block_bit(payload, bh.sub_block_bits, bh.seq_count, litlen, dist,
                                fh.sub_block_seqs, bh.uncompressed_len)
    return decode_block_byte_arrays(payload, bh.seq_count, bh.uncompressed_len)


@njit(cache=True, nogil=True)
def _max_distance(match_len, dist):
    best = 0
    for i in range(match_len.shape[0]):
        if match_len[i] > 0 and dist[i] > best:
            best = dist[i]
    return best


def _decode_record(fh: FileHeader, bh: BlockHeader, payload: bytes, index: int,
                   strategy: Strategy):
    try:
        lit_len, match_len, dist, literals = decode_tokens(fh, bh, payload)
        if _max_distance(match_len, dist) > fh.window_size:
            raise MalformedBackRef(f"distance beyond the {fh.window_size}-byte window")
        out = np.empty(bh.uncompressed_len, dtype=np.uint8)
        stats = _run_kernel(lit_len, match_len, dist, literals, out, strategy)
    except CorruptStream as exc:
        raise exc.tag_block(index)
    return out, stats, bh.seq_count


def decompress_file(source: Union[BinaryIO, bytes], sink: BinaryIO,
                    strategy: Strategy = Strategy.MRR,
                    workers: int = 1) -> Tuple[FileHeader, DecompStats]:
    """Decode a container into ``sink``, block by block in order.

    At most ``workers`` blocks are in flight, which bounds memory.  Blocks
    preceding a corrupt one have already been written when the error is
    raised.
    """
    strategy = Strategy(strategy)
    fh, records = read_file(source)
    stats = DecompStats(strategy.value)
    crc = 0

    def emit(index, result):
        nonlocal crc
        out, (hist, full, bpr), nseq = result
        sink.write(memoryview(out))
        crc = zlib.crc32(out, crc)
        stats.add_block(index, nseq, hist, full, bpr)

    if workers <= 1:
        for i, (bh, payload) in enumerate(records):
            emit(i, _decode_record(fh, bh, payload, i, strategy))
    else:
        inflight = collections.deque()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            try:
                for i, (bh, payload) in enumerate(records):
                    if len(inflight) >= workers:
                        j, fut = inflight.popleft()
                        emit(j, fut.result())
                    inflight.append((i, pool.submit(_decode_record, fh, bh, payload, i,
                                                    strategy)))
                while inflight:
                    j, fut = inflight.popleft()
                    emit(j, fut.result())
            finally:
                for _, fut in inflight:
                    fut.cancel()
    if crc != fh.crc32:
        raise ChecksumMismatch(f"crc32 {crc:#010x} differs from header {fh.crc32:#010x}",
                               field="crc32")
    return fh, stats


def decompress_bytes(data: bytes, strategy: Strategy = Strategy.MRR, workers: int = 1) -> bytes:
    sink = io.BytesIO()
    decompress_file(data, sink, strategy, workers)
    return sink.getvalue()
