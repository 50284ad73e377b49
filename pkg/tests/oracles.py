"""Reference implementations used only by the tests.

Each one is written the slow, obvious way and shares no code with the
package beyond the data types.
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Optional, Sequence, Tuple


def expand_sequences(seqs) -> bytes:
    """Byte-at-a-time LZ77 expansion."""
    out = bytearray()
    for s in seqs:
        out += s.literal
        if s.backref is not None:
            d, n = s.backref.distance, s.backref.length
            assert 1 <= d <= len(out)
            for _ in range(n):
                out.append(out[-d])
    return bytes(out)


def exclusive_prefix(values: Sequence[int]) -> List[int]:
    out, acc = [], 0
    for v in values:
        out.append(acc)
        acc += v
    return out


def longest_match(data: bytes, cursor: int, hwm: int, window: int, lookahead: int,
                  min_match: int) -> Optional[Tuple[int, int]]:
    """Longest (distance, length) whose source lies below ``hwm``, by brute force.

    Returns the nearest source among equally long candidates.
    """
    best = None
    limit_total = min(lookahead, len(data) - cursor)
    for start in range(cursor - 1, max(-1, cursor - window - 1), -1):
        limit = min(limit_total, hwm - start)
        n = 0
        while n < limit and data[start + n] == data[cursor + n]:
            n += 1
        if n >= min_match and (best is None or n > best[1]):
            best = (cursor - start, n)
    return best


def optimal_limited_cost(freqs: Sequence[int], max_len: int) -> int:
    """Minimum sum(freq * len) over all prefix-free length vectors, by enumeration.

    Only multisets of lengths are enumerated: for a fixed multiset the
    cheapest assignment gives the shortest lengths to the heaviest symbols.
    """
    freqs = [f for f in freqs if f > 0]  # unused symbols get no code
    n = len(freqs)
    if n == 1:
        return freqs[0]
    # a binary tree with n leaves is at most n - 1 deep, so longer lengths
    # never help and the search can stop there
    max_len = min(max_len, n - 1)
    heavy_first = sorted(freqs, reverse=True)
    best = None
    for lens in itertools.combinations_with_replacement(range(1, max_len + 1), n):
        if sum(2.0 ** -ln for ln in lens) <= 1.0:
            cost = sum(f * ln for f, ln in zip(heavy_first, lens))
            if best is None or cost < best:
                best = cost
    return best


def unlimited_huffman_cost(freqs: Sequence[int]) -> int:
    """Classic two-smallest merging; the cost is the sum of merged weights."""
    import heapq
    heap = [f for f in freqs if f > 0]
    if len(heap) == 1:
        return heap[0]
    heapq.heapify(heap)
    cost = 0
    while len(heap) > 1:
        a = heapq.heappop(heap)
        b = heapq.heappop(heap)
        cost += a + b
        heapq.heappush(heap, a + b)
    return cost


def canonical_code_map(lengths: Sequence[int]) -> Dict[str, int]:
    """Bit-string -> symbol for a canonical code, built by counting per length."""
    max_len = max(lengths) if lengths else 0
    bl_count = [0] * (max_len + 1)
    for ln in lengths:
        if ln:
            bl_count[ln] += 1
    next_code = [0] * (max_len + 2)
    code = 0
    for bits in range(1, max_len + 1):
        code = (code + bl_count[bits - 1]) << 1 if bits > 1 else 0
        next_code[bits] = code
    out = {}
    for sym, ln in enumerate(lengths):
        if ln:
            out[format(next_code[ln], f"0{ln}b")] = sym
            next_code[ln] += 1
    return out


def tree_walk_decode(bits: str, code_map: Dict[str, int], count: int) -> Tuple[List[int], int]:
    """Decode ``count`` symbols bit by bit; returns (symbols, bits consumed)."""
    syms = []
    pos = 0
    for _ in range(count):
        cur = ""
        while cur not in code_map:
            if pos >= len(bits) or len(cur) > 16:
                raise ValueError("no code")
            cur += bits[pos]
            pos += 1
        syms.append(code_map[cur])
    return syms, pos


def bytes_to_bits(data: bytes) -> str:
    return "".join(format(b, "08b") for b in data)


def sequential_rounds(seqs, base: int = 0) -> int:
    """MRR round count of one group, simulated on byte availability.

    Output below ``base`` (earlier groups) is complete.  Each round, the
    high-water mark is the first byte not yet written; a back-reference
    resolves once every source byte it reads from before its own write
    position lies below that mark.
    """
    written = set(range(base))
    pos = base
    refs = []
    for s in seqs:
        for _ in s.literal:
            written.add(pos)
            pos += 1
        if s.backref is not None:
            refs.append((pos, s.backref.distance, s.backref.length))
            pos += s.backref.length
    done = set()
    rnd = 0
    while len(done) < len(refs):
        rnd += 1
        hwm = 0
        while hwm in written:
            hwm += 1
        newly = [i for i, (w, d, n) in enumerate(refs)
                 if i not in done and min(w - d + n, w) <= hwm]
        assert newly, "no progress"
        for i in newly:
            w, _, n = refs[i]
            written.update(range(w, w + n))
            done.add(i)
    return rnd
