"""Token coding: a byte-aligned codec and a two-tree Huffman bit codec.

Bit codec wire format, per block
--------------------------------
Two canonical Huffman codes, both limited to ``cwl`` bits:

litlen (281 symbols)
    0-255 literal bytes, 256 end-of-block, 257-280 match-length bins.
dist (272 symbols)
    distance bins covering [1, 65535].

A sequence is its literal bytes as litlen codes, then either a
match-length code + raw extra bits + dist code + raw extra bits, or (last
sequence of the block only, when it has no back-reference) the
end-of-block code.  Codes are written MSB-first; raw extra bits are written
least significant bit first.  The sequences are cut into sub-blocks of
``sub_block_seqs`` sequences, concatenated without padding; the block
header stores each sub-block's size in bits.

Byte codec wire format
----------------------
Per sequence: a token byte ``(literal_len_nibble << 4) | match_len_nibble``
where the match nibble is ``length - 4``; nibble value 15 continues with
bytes of 255 ending in a byte < 255.  Then the literal bytes, then the
distance as u16 little-endian, then the match-length continuation.  The
final sequence may stop right after its literals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from numba import njit

from .core import MAX_MATCH, MAX_WINDOW, MIN_MATCH, Block, Params, Sequence
from .errors import CorruptStream
from .huffman import HuffmanTable

EOB = 256
LEN_SYM_BASE = 257


def _length_bins():
    bins = [(n, 0) for n in range(4, 12)]
    bins += [(n, 1) for n in (12, 14, 16, 18)]
    bins += [(n, 2) for n in (20, 24, 28, 32)]
    bins += [(n, 2) for n in range(36, 64, 4)]
    bins.append((64, 0))
    return bins


def _distance_bins():
    bins = [(d, 0) for d in (1, 2, 3, 4)]
    base = 5
    for extra in range(1, 9):
        for _ in range(2):
            bins.append((base, extra))
            base += 1 << extra
    while base <= MAX_WINDOW:
        bins.append((base, 8))
        base += 256
    return bins


LEN_BASE = np.array([b for b, _ in _length_bins()], dtype=np.int32)
LEN_EXTRA = np.array([e for _, e in _length_bins()], dtype=np.int32)
DIST_BASE = np.array([b for b, _ in _distance_bins()], dtype=np.int32)
DIST_EXTRA = np.array([e for _, e in _distance_bins()], dtype=np.int32)
LITLEN_SYMBOLS = LEN_SYM_BASE + len(LEN_BASE)
DIST_SYMBOLS = len(DIST_BASE)


def _bin_index(bases, extras, limit):
    idx = np.full(limit + 1, -1, dtype=np.int32)
    for i, (b, e) in enumerate(zip(bases.tolist(), extras.tolist())):
        hi = min(b + (1 << e), limit + 1)
        idx[b:hi] = i
    return idx


LEN_BIN = _bin_index(LEN_BASE, LEN_EXTRA, MAX_MATCH)
DIST_BIN = _bin_index(DIST_BASE, DIST_EXTRA, MAX_WINDOW)

# kernel status codes
OK = 0
ERR_BAD_CODE = 1
ERR_OVERRUN = 2
ERR_UNDERRUN = 3
ERR_LITERALS = 4
ERR_EOB = 5
ERR_VALUE = 6
ERR_TRUNCATED = 7
ERR_SEQ_COUNT = 8

_MESSAGES = {
    ERR_BAD_CODE: "bit pattern matches no code",
    ERR_OVERRUN: "sub-block runs past its bit budget",
    ERR_UNDERRUN: "sub-block ends before its bit budget is consumed",
    ERR_LITERALS: "more literal bytes than the block holds",
    ERR_EOB: "end-of-block code before the final sequence",
    ERR_VALUE: "match length or distance out of range",
    ERR_TRUNCATED: "payload ends inside a sequence",
    ERR_SEQ_COUNT: "sequence count differs from the header",
}


def raise_status(status: int, where: str = "") -> None:
    if status != OK:
        msg = _MESSAGES.get(status, f"decoder status {status}")
        raise CorruptStream(f"{msg}{where}")


# --- bit codec ---------------------------------------------------------------

@njit(cache=True, nogil=True)
def _put_code(buf, pos, code, nbits):
    for i in range(nbits - 1, -1, -1):
        if (code >> i) & 1:
            buf[pos >> 3] |= 0x80 >> (pos & 7)
        pos += 1
    return pos


@njit(cache=True, nogil=True)
def _put_raw(buf, pos, value, nbits):
    for i in range(nbits):
        if (value >> i) & 1:
            buf[pos >> 3] |= 0x80 >> (pos & 7)
        pos += 1
    return pos


@njit(cache=True, nogil=True)
def _encode_bit_kernel(lit_len, match_len, dist, literals, ll_codes, ll_lens, d_codes, d_lens,
                       len_bin, len_base, len_extra, dist_bin, dist_base, dist_extra,
                       sub_seqs, buf, sizes):
    pos = 0
    lit = 0
    nseq = lit_len.shape[0]
    for s in range(nseq):
        start = pos
        for _ in range(lit_len[s]):
            b = literals[lit]
            lit += 1
            pos = _put_code(buf, pos, ll_codes[b], ll_lens[b])
        ml = match_len[s]
        if ml > 0:
            bi = len_bin[ml]
            sym = 257 + bi
            pos = _put_code(buf, pos, ll_codes[sym], ll_lens[sym])
            pos = _put_raw(buf, pos, ml - len_base[bi], len_extra[bi])
            d = dist[s]
            di = dist_bin[d]
            pos = _put_code(buf, pos, d_codes[di], d_lens[di])
            pos = _put_raw(buf, pos, d - dist_base[di], dist_extra[di])
        else:
            pos = _put_code(buf, pos, ll_codes[256], ll_lens[256])
        sizes[s // sub_seqs] += pos - start
    return pos


@njit(cache=True, nogil=True)
def _peek(buf, nbytes, pos, cwl):
    byte = pos >> 3
    w = 0
    for k in range(3):
        w <<= 8
        if byte + k < nbytes:
            w |= buf[byte + k]
    return (w >> (24 - (pos & 7) - cwl)) & ((1 << cwl) - 1)


@njit(cache=True, nogil=True)
def _get_raw(buf, pos, nbits):
    v = 0
    for i in range(nbits):
        p = pos + i
        v |= ((buf[p >> 3] >> (7 - (p & 7))) & 1) << i
    return v


@njit(cache=True, nogil=True)
def _decode_range(buf, start, end, count, eob_ok, ll_sym, ll_len, d_sym, d_len, cwl,
                  len_base, len_extra, dist_base, dist_extra, seq0, lit_len, match_len, dist,
                  literals, nlit):
    """Decode ``count`` sequences from bits [start, end). Returns (status, nlit)."""
    nbytes = buf.shape[0]
    lit_cap = literals.shape[0]
    pos = start
    for s in range(seq0, seq0 + count):
        run = 0
        while True:
            if pos >= end:
                return ERR_OVERRUN, nlit
            w = _peek(buf, nbytes, pos, cwl)
            ln = ll_len[w]
            if ln == 0:
                return ERR_BAD_CODE, nlit
            if pos + ln > end:
                return ERR_OVERRUN, nlit
            pos += ln
            sym = ll_sym[w]
            if sym < 256:
                if nlit >= lit_cap:
                    return ERR_LITERALS, nlit
                literals[nlit] = sym
                nlit += 1
                run += 1
                continue
            lit_len[s] = run
            if sym == 256:
                if not (eob_ok and s == seq0 + count - 1) or run == 0:
                    return ERR_EOB, nlit
                match_len[s] = 0
                dist[s] = 0
                break
            bi = sym - 257
            if bi >= len_base.shape[0]:
                return ERR_BAD_CODE, nlit
            e = len_extra[bi]
            if pos + e > end:
                return ERR_OVERRUN, nlit
            ml = len_base[bi] + _get_raw(buf, pos, e)
            pos += e
            if ml > 64:
                return ERR_VALUE, nlit
            if pos >= end:
                return ERR_OVERRUN, nlit
            w = _peek(buf, nbytes, pos, cwl)
            ln = d_len[w]
            if ln == 0:
                return ERR_BAD_CODE, nlit
            if pos + ln > end:
                return ERR_OVERRUN, nlit
            pos += ln
            di = d_sym[w]
            e = dist_extra[di]
            if pos + e > end:
                return ERR_OVERRUN, nlit
            d = dist_base[di] + _get_raw(buf, pos, e)
            pos += e
            if d > 65535:
                return ERR_VALUE, nlit
            match_len[s] = ml
            dist[s] = d
            break
    if pos != end:
        return ERR_UNDERRUN, nlit
    return OK, nlit


@njit(cache=True, nogil=True)
def _decode_bit_kernel(buf, sizes, sub_seqs, seq_count, ll_sym, ll_len, d_sym, d_len, cwl,
                       len_base, len_extra, dist_base, dist_extra, lit_len, match_len, dist,
                       literals):
    nlit = 0
    start = 0
    nsub = sizes.shape[0]
    for k in range(nsub):
        end = start + sizes[k]
        seq0 = k * sub_seqs
        count = min(sub_seqs, seq_count - seq0)
        status, nlit = _decode_range(buf, start, end, count, k == nsub - 1, ll_sym, ll_len,
                                     d_sym, d_len, cwl, len_base, len_extra, dist_base,
                                     dist_extra, seq0, lit_len, match_len, dist, literals, nlit)
        if status != OK:
            return status, nlit, k
        start = end
    return OK, nlit, -1


@dataclass
class BitBlock:
    """Huffman-coded block: both code tables, the payload and sub-block sizes."""

    litlen: HuffmanTable
    dist: HuffmanTable
    payload: bytes
    sub_block_bits: np.ndarray
    seq_count: int

    @property
    def total_bits(self) -> int:
        return int(self.sub_block_bits.sum())

    def sub_block_starts(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.sub_block_bits)[:-1])).astype(np.int64)

    def sub_block_seq_counts(self, sub_seqs: int) -> List[int]:
        return [min(sub_seqs, self.seq_count - k * sub_seqs)
                for k in range(len(self.sub_block_bits))]


def check_block_tokens(block: Block, window: int = MAX_WINDOW) -> None:
    """Reject tokens the wire formats cannot carry."""
    ml = block.match_len
    has = ml > 0
    if np.any(ml[has] < MIN_MATCH) or np.any(ml > MAX_MATCH):
        raise ValueError(f"match lengths must lie in [{MIN_MATCH}, {MAX_MATCH}]")
    d = block.distance[has]
    if np.any(d < 1) or np.any(d > window):
        raise ValueError(f"distances must lie in [1, {window}]")
    if not block.check_alternation():
        raise ValueError("only the last sequence may lack a back-reference")


def block_frequencies(block: Block) -> Tuple[np.ndarray, np.ndarray]:
    ml = block.match_len
    has = ml > 0
    ll = np.bincount(block.literals, minlength=LITLEN_SYMBOLS).astype(np.int64)
    ll[LEN_SYM_BASE:] += np.bincount(LEN_BIN[ml[has]], minlength=len(LEN_BASE))
    if block.seq_count and ml[-1] == 0:
        ll[EOB] += 1
    dd = np.bincount(DIST_BIN[block.distance[has]], minlength=DIST_SYMBOLS).astype(np.int64)
    return ll, dd


def encode_block_bit(block: Block, params: Params = Params()) -> BitBlock:
    check_block_tokens(block)
    cwl = params.cwl_max
    ll_freq, d_freq = block_frequencies(block)
    litlen = HuffmanTable.build(ll_freq, cwl)
    dist = HuffmanTable.build(d_freq, cwl)
    nseq = block.seq_count
    nsub = -(-nseq // params.sub_block_seqs)
    sizes = np.zeros(nsub, dtype=np.int64)
    bound_bits = (block.literals.shape[0] + 1) * cwl + nseq * (2 * cwl + 10)
    buf = np.zeros(bound_bits // 8 + 1, dtype=np.uint8)
    total = _encode_bit_kernel(
        block.lit_len.astype(np.int64), block.match_len.astype(np.int64),
        block.distance.astype(np.int64), block.literals,
        litlen.codes, litlen.lengths, dist.codes, dist.lengths,
        LEN_BIN, LEN_BASE, LEN_EXTRA, DIST_BIN, DIST_BASE, DIST_EXTRA,
        params.sub_block_seqs, buf, sizes)
    return BitBlock(litlen, dist, buf[:(total + 7) // 8].tobytes(), sizes, nseq)


def _as_buf(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        return data
    return np.frombuffer(data, dtype=np.uint8)


def decode_block_bit(payload, sub_block_bits, seq_count: int, litlen: HuffmanTable,
                     dist: HuffmanTable, sub_seqs: int, uncompressed_len: int):
    """Decode all sub-blocks into column arrays (lit_len, match_len, dist, literals)."""
    buf = _as_buf(payload)
    # every sequence and every literal costs at least one bit, which bounds
    # the allocations by the payload rather than by header claims
    bits = 8 * buf.shape[0]
    if seq_count > bits:
        raise CorruptStream(f"{seq_count} sequences cannot fit in {buf.shape[0]} bytes")
    lit_len = np.empty(seq_count, dtype=np.uint32)
    match_len = np.empty(seq_count, dtype=np.uint8)
    dists = np.empty(seq_count, dtype=np.uint16)
    literals = np.empty(min(uncompressed_len, bits), dtype=np.uint8)
    status, nlit, sub = _decode_bit_kernel(
        buf, np.asarray(sub_block_bits, dtype=np.int64), sub_seqs, seq_count,
        litlen.lut_sym, litlen.lut_len, dist.lut_sym, dist.lut_len, litlen.cwl,
        LEN_BASE, LEN_EXTRA, DIST_BASE, DIST_EXTRA, lit_len, match_len, dists, literals)
    raise_status(status, f" (sub-block {sub})")
    return lit_len, match_len, dists, literals[:nlit]


def decode_sub_block(payload, start_bit: int, bit_len: int, litlen: HuffmanTable,
                     dist: HuffmanTable, max_seqs: int, final: bool = True) -> List[Sequence]:
    """Decode one sub-block on its own, given its start offset and size in bits.

    ``final`` allows the end-of-block code on the sub-block's last sequence.
    """
    if litlen.cwl != dist.cwl:
        raise ValueError("both tables must share one code length limit")
    buf = _as_buf(payload)
    if start_bit < 0 or start_bit + bit_len > buf.shape[0] * 8:
        raise CorruptStream("sub-block lies outside the payload")
    lit_len = np.zeros(max_seqs, dtype=np.uint32)
    match_len = np.zeros(max_seqs, dtype=np.uint8)
    dists = np.zeros(max_seqs, dtype=np.uint16)
    literals = np.empty(bit_len, dtype=np.uint8)
    status, nlit = _decode_range(buf, start_bit, start_bit + bit_len, max_seqs, final,
                                 litlen.lut_sym, litlen.lut_len, dist.lut_sym, dist.lut_len,
                                 litlen.cwl, LEN_BASE, LEN_EXTRA, DIST_BASE, DIST_EXTRA, 0,
                                 lit_len, match_len, dists, literals, 0)
    raise_status(status)
    block = Block(0, 0, lit_len, match_len, dists, literals[:nlit])
    return block.sequences


# --- byte codec --------------------------------------------------------------

@njit(cache=True, nogil=True)
def _put_run(out, pos, value):
    while value >= 255:
        out[pos] = 255
        pos += 1
        value -= 255
    out[pos] = value
    return pos + 1


@njit(cache=True, nogil=True)
def _encode_byte_kernel(lit_len, match_len, dist, literals, out):
    pos = 0
    lit = 0
    for s in range(lit_len.shape[0]):
        ll = lit_len[s]
        ml = match_len[s]
        mcode = ml - 4 if ml > 0 else 0
        out[pos] = (min(ll, 15) << 4) | min(mcode, 15)
        pos += 1
        if ll >= 15:
            pos = _put_run(out, pos, ll - 15)
        for i in range(ll):
            out[pos + i] = literals[lit + i]
        pos += ll
        lit += ll
        if ml > 0:
            out[pos] = dist[s] & 0xFF
            out[pos + 1] = dist[s] >> 8
            pos += 2
            if mcode >= 15:
                pos = _put_run(out, pos, mcode - 15)
    return pos


@njit(cache=True, nogil=True)
def _get_run(buf, pos, value):
    n = buf.shape[0]
    while True:
        if pos >= n:
            return -1, value
        b = buf[pos]
        pos += 1
        value += b
        if b != 255:
            return pos, value


@njit(cache=True, nogil=True)
def _decode_byte_kernel(buf, seq_count, lit_len, match_len, dist, literals):
    n = buf.shape[0]
    lit_cap = literals.shape[0]
    pos = 0
    nlit = 0
    s = 0
    while pos < n:
        if s >= seq_count:
            return ERR_SEQ_COUNT, nlit
        tok = buf[pos]
        pos += 1
        ll = tok >> 4
        mcode = tok & 15
        if ll == 15:
            pos, ll = _get_run(buf, pos, ll)
            if pos < 0:
                return ERR_TRUNCATED, nlit
        if pos + ll > n:
            return ERR_TRUNCATED, nlit
        if nlit + ll > lit_cap:
            return ERR_LITERALS, nlit
        for i in range(ll):
            literals[nlit + i] = buf[pos + i]
        nlit += ll
        pos += ll
        lit_len[s] = ll
        if pos == n:
            # final sequence without a back-reference
            if s != seq_count - 1 or mcode != 0 or ll == 0:
                return ERR_TRUNCATED, nlit
            match_len[s] = 0
            dist[s] = 0
            s += 1
            break
        if pos + 2 > n:
            return ERR_TRUNCATED, nlit
        d = buf[pos] | (np.int64(buf[pos + 1]) << 8)
        pos += 2
        if mcode == 15:
            pos, mcode = _get_run(buf, pos, mcode)
            if pos < 0:
                return ERR_TRUNCATED, nlit
        ml = mcode + 4
        if d == 0 or ml > 64:
            return ERR_VALUE, nlit
        match_len[s] = ml
        dist[s] = d
        s += 1
    if s != seq_count:
        return ERR_SEQ_COUNT, nlit
    return OK, nlit


def encode_block_byte(block: Block) -> bytes:
    check_block_tokens(block)
    nlit = block.literals.shape[0]
    out = np.empty(nlit + 6 * block.seq_count + nlit // 255 + 16, dtype=np.uint8)
    n = _encode_byte_kernel(block.lit_len.astype(np.int64), block.match_len.astype(np.int64),
                            block.distance.astype(np.int64), block.literals, out)
    return out[:n].tobytes()


def decode_block_byte_arrays(payload, seq_count: int, uncompressed_len: int):
    buf = _as_buf(payload)
    # a sequence needs its token byte, a literal its own byte
    if seq_count > buf.shape[0]:
        raise CorruptStream(f"{seq_count} sequences cannot fit in {buf.shape[0]} bytes")
    lit_len = np.empty(seq_count, dtype=np.uint32)
    match_len = np.empty(seq_count, dtype=np.uint8)
    dists = np.empty(seq_count, dtype=np.uint16)
    literals = np.empty(min(uncompressed_len, buf.shape[0]), dtype=np.uint8)
    status, nlit = _decode_byte_kernel(buf, seq_count, lit_len, match_len, dists,
                                       literals)
    raise_status(status)
    return lit_len, match_len, dists, literals[:nlit]


@njit(cache=True, nogil=True)
def _count_byte_sequences(buf):
    """Number of sequences in a byte-codec payload, or -1 if it is malformed."""
    n = buf.shape[0]
    pos = 0
    s = 0
    while pos < n:
        tok = buf[pos]
        pos += 1
        ll = tok >> 4
        if ll == 15:
            pos, ll = _get_run(buf, pos, ll)
            if pos < 0:
                return -1
        pos += ll
        s += 1
        if pos >= n:
            break
        pos += 2
        if tok & 15 == 15:
            pos, _ = _get_run(buf, pos, 0)
            if pos < 0:
                return -1
    if pos > n:
        return -1
    return s


def decode_block_byte(payload, seq_count: int = None) -> List[Sequence]:
    """Decode a byte-codec payload; ``seq_count`` defaults to a scan of the payload."""
    buf = _as_buf(payload)
    if seq_count is None:
        seq_count = int(_count_byte_sequences(buf))
        if seq_count < 0:
            raise CorruptStream(_MESSAGES[ERR_TRUNCATED])
    lit_len, match_len, dists, literals = decode_block_byte_arrays(buf, seq_count, buf.shape[0])
    return Block(0, 0, lit_len, match_len, dists, literals).sequences
