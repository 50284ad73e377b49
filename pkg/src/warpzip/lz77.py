"""Block-local greedy LZ77 with a single-slot hash match finder.

Two parsers share one kernel:

* unconstrained: the classic greedy parser; a hash slot always keeps the
  most recent position.
* dependency elimination (DE): sequences are produced in groups of 32, one
  warp's worth.  Lane 0 of a group may match anything, because all
  literals of a group are in place before any back-reference is copied.
  Lanes 1..31 may only reference bytes below the group's high-water mark,
  the output position where lane 0's back-reference starts.  Every
  back-reference of a DE group therefore resolves in the first
  multi-round-resolution round.

DE needs a dictionary that keeps candidates below the mark.  Two policies:

``deferred`` (default)
    A position enters the table only once it lies ``lookahead`` bytes
    below the cursor of a lane-0 search.  Lanes 1..31 thus always see the
    most recent occurrence that is a full lookahead below the mark, so the
    mark never truncates their matches.
``staleness``
    Eager insertion where a slot is overwritten only if the stored
    position is more than ``min_staleness`` bytes behind the position
    being inserted.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from numba import njit

from .core import WARP_SIZE, BackRef, Block, Params, empty_block

HASH_BITS = 16
_HASH_MUL = 2654435761

POLICY_DEFERRED = "deferred"
POLICY_STALENESS = "staleness"
DE_POLICIES = (POLICY_DEFERRED, POLICY_STALENESS)


@njit(cache=True, nogil=True)
def _hash(data, pos, min_match, hash_bits):
    v = np.int64(data[pos]) | (np.int64(data[pos + 1]) << 8) | (np.int64(data[pos + 2]) << 16)
    if min_match == 4:
        v |= np.int64(data[pos + 3]) << 24
    return ((v * _HASH_MUL) & 0xFFFFFFFF) >> (32 - hash_bits)


@njit(cache=True, nogil=True)
def _insert(table, data, n, pos, min_match, hash_bits, staleness):
    """Store ``pos`` in its slot; ``staleness < 0`` means always replace."""
    if pos + min_match > n:
        return
    h = _hash(data, pos, min_match, hash_bits)
    old = table[h]
    if staleness < 0 or old < 0 or pos - old > staleness:
        table[h] = pos


@njit(cache=True, nogil=True)
def _find_match(table, data, n, cursor, hwm, window, lookahead, min_match, hash_bits):
    """Returns (distance, length), length 0 when nothing is admissible.

    With ``hwm < cursor`` the referenced interval must end at or below
    ``hwm`` and the match is truncated there.  With ``hwm >= cursor`` the
    finder is unconstrained and overlapping matches are allowed.
    """
    if cursor + min_match > n:
        return 0, 0
    cand = table[_hash(data, cursor, min_match, hash_bits)]
    if cand < 0 or cand >= cursor or cursor - cand > window:
        return 0, 0
    limit = min(lookahead, n - cursor)
    if hwm < cursor:
        limit = min(limit, hwm - cand)
    if limit < min_match:
        return 0, 0
    length = 0
    while length < limit and data[cand + length] == data[cursor + length]:
        length += 1
    if length < min_match:
        return 0, 0
    return cursor - cand, length


@njit(cache=True, nogil=True)
def _compress_kernel(data, table, window, lookahead, min_match, hash_bits, de, deferred,
                     staleness, warp_size, lit_len, match_len, dist, lits):
    n = data.shape[0]
    eager = not (de and deferred)
    if not de:
        staleness = -1
    nseq = 0
    nlit = 0
    pos = 0
    lit_start = 0
    committed = 0
    while pos < n:
        s = 0
        group_hwm = pos
        while s < warp_size and pos < n:
            bound = pos
            if de and s > 0:
                bound = group_hwm
            if not eager and s == 0:
                while committed <= pos - lookahead:
                    _insert(table, data, n, committed, min_match, hash_bits, -1)
                    committed += 1
            d, length = _find_match(table, data, n, pos, bound, window, lookahead,
                                    min_match, hash_bits)
            if length > 0:
                ll = pos - lit_start
                for i in range(ll):
                    lits[nlit + i] = data[lit_start + i]
                nlit += ll
                lit_len[nseq] = ll
                match_len[nseq] = length
                dist[nseq] = d
                nseq += 1
                if s == 0:
                    group_hwm = pos
                if eager:
                    for p in range(pos, pos + length):
                        _insert(table, data, n, p, min_match, hash_bits, staleness)
                pos += length
                lit_start = pos
                s += 1
            else:
                if eager:
                    _insert(table, data, n, pos, min_match, hash_bits, staleness)
                pos += 1
    if lit_start < n:
        ll = n - lit_start
        for i in range(ll):
            lits[nlit + i] = data[lit_start + i]
        nlit += ll
        lit_len[nseq] = ll
        match_len[nseq] = 0
        dist[nseq] = 0
        nseq += 1
    return nseq, nlit


def as_u8(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        return np.ascontiguousarray(data, dtype=np.uint8)
    return np.frombuffer(data, dtype=np.uint8)


def _compress(data, params: Params, de: bool, index: int) -> Block:
    arr = as_u8(data)
    n = arr.shape[0]
    if n > params.block_size:
        raise ValueError(f"input of {n} bytes exceeds block_size {params.block_size}")
    if n == 0:
        return empty_block(index)
    cap = n // params.min_match + 2
    lit_len = np.empty(cap, dtype=np.int32)
    match_len = np.empty(cap, dtype=np.int32)
    dist = np.empty(cap, dtype=np.int32)
    lits = np.empty(n, dtype=np.uint8)
    table = np.full(1 << HASH_BITS, -1, dtype=np.int32)
    nseq, nlit = _compress_kernel(
        arr, table, params.window_size, params.lookahead, params.min_match, HASH_BITS, de,
        params.de_policy == POLICY_DEFERRED, params.min_staleness, params.warp_size,
        lit_len, match_len, dist, lits)
    return Block(index, n, lit_len[:nseq].copy(), match_len[:nseq].copy(),
                 dist[:nseq].copy(), lits[:nlit].copy())


def compress_block(data, params: Params = Params(), index: int = 0) -> Block:
    """Greedy LZ77 over one block, without dependency elimination."""
    return _compress(data, params, False, index)


def compress_block_de(data, params: Params = Params(), index: int = 0) -> Block:
    """Greedy LZ77 over one block with dependency elimination."""
    return _compress(data, params, True, index)


class MatchDict:
    """Single-slot hash dictionary over one block's input.

    ``staleness=None`` gives the plain most-recent policy.
    """

    def __init__(self, data, params: Params = Params(), staleness: Optional[int] = None):
        self.data = as_u8(data)
        self.params = params
        self.staleness = -1 if staleness is None else staleness
        self.table = np.full(1 << HASH_BITS, -1, dtype=np.int32)
        self.committed = 0

    def add(self, pos: int) -> None:
        p = self.params
        _insert(self.table, self.data, self.data.shape[0], pos, p.min_match, HASH_BITS,
                 self.staleness)

    def add_span(self, pos: int, length: int) -> None:
        for p in range(pos, pos + length):
            self.add(p)

    def commit_until(self, pos: int) -> None:
        """Insert every not-yet-inserted position up to and including ``pos``."""
        while self.committed <= pos:
            self.add(self.committed)
            self.committed += 1

    def candidate(self, cursor: int) -> int:
        p = self.params
        if cursor + p.min_match > self.data.shape[0]:
            return -1
        return int(self.table[_hash(self.data, cursor, p.min_match, HASH_BITS)])


def find_match_below_hwm(mdict: MatchDict, cursor: int, hwm: int) -> Optional[BackRef]:
    """Match at ``cursor`` whose referenced bytes all lie below ``hwm``.

    ``hwm == cursor`` is the unconstrained search.
    """
    if hwm > cursor:
        raise ValueError("hwm must not exceed the cursor")
    p = mdict.params
    d, length = _find_match(mdict.table, mdict.data, mdict.data.shape[0], cursor, hwm,
                            p.window_size, p.lookahead, p.min_match, HASH_BITS)
    return BackRef(int(d), int(length)) if length else None


def find_match(mdict: MatchDict, cursor: int) -> Optional[BackRef]:
    return find_match_below_hwm(mdict, cursor, cursor)


def verify_de(block: Block, warp_size: int = WARP_SIZE) -> bool:
    """True iff every group of ``warp_size`` sequences resolves in one round.

    For lanes 1.. of a group the referenced interval must end at or below
    the group's high-water mark, the output position of lane 0's
    back-reference.
    """
    lit_len = block.lit_len.astype(np.int64)
    match_len = block.match_len.astype(np.int64)
    write_pos = np.cumsum(lit_len + match_len) - match_len
    src_end = write_pos - block.distance.astype(np.int64) + match_len
    for g in range(0, block.seq_count, warp_size):
        hi = min(g + warp_size, block.seq_count)
        lanes = slice(g + 1, hi)
        has_ref = match_len[lanes] > 0
        if np.any(src_end[lanes][has_ref] > write_pos[g]):
            return False
    return True
