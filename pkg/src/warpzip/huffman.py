"""Length-limited canonical Huffman codes.

Code lengths come from package-merge, which is optimal under the length
limit.  Codes are canonical: ordered by (length, symbol), so the length
array alone describes the code.  Decoding uses a flat table indexed by the
next ``cwl`` bits of the stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import TooManySymbols


def package_merge(freqs: Sequence[int], max_len: int) -> np.ndarray:
    """Optimal code lengths with every length <= ``max_len``.

    Symbols with zero frequency get length 0.  A lone used symbol gets
    length 1 so that the code still has a well-defined bit pattern.
    """
    freqs = np.asarray(freqs, dtype=np.int64)
    lengths = np.zeros(len(freqs), dtype=np.int32)
    used = np.flatnonzero(freqs > 0)
    n = len(used)
    if n == 0:
        return lengths
    if n == 1:
        lengths[used[0]] = 1
        return lengths
    if n > (1 << max_len):
        raise TooManySymbols(f"{n} symbols cannot be coded in {max_len} bits")
    # stable order by (weight, symbol) keeps the result deterministic
    order = used[np.argsort(freqs[used], kind="stable")]
    leaf_w = freqs[order]
    # one merged list per level; only weights and a leaf/package flag are kept
    is_leaf_levels = [np.ones(n, dtype=bool)]
    current = leaf_w
    for _ in range(max_len - 1):
        packages = current[0:len(current) - 1:2] + current[1::2]
        merged = np.concatenate((leaf_w, packages))
        # stable sort over [leaves, packages] puts leaves first on ties
        idx = np.argsort(merged, kind="stable")
        is_leaf_levels.append(idx < n)
        current = merged[idx]
    # walk back from the last list: the first 2n-2 items are selected, and a
    # selected package selects the two items it was built from one level up
    take = 2 * n - 2
    for is_leaf in reversed(is_leaf_levels):
        leaves_taken = int(np.count_nonzero(is_leaf[:take]))
        lengths[order[:leaves_taken]] += 1
        take = 2 * (take - leaves_taken)
    return lengths


def canonical_codes(lengths: Sequence[int]) -> np.ndarray:
    """Canonical code values; symbols of length 0 get code 0."""
    lengths = np.asarray(lengths, dtype=np.int64)
    codes = np.zeros(len(lengths), dtype=np.int64)
    code = 0
    prev_len = 0
    for sym in sorted(np.flatnonzero(lengths).tolist(), key=lambda s: (int(lengths[s]), s)):
        ln = int(lengths[sym])
        code <<= ln - prev_len
        codes[sym] = code
        code += 1
        prev_len = ln
    return codes


def kraft_sum(lengths: Sequence[int]) -> float:
    return float(sum(2.0 ** -int(ln) for ln in lengths if ln > 0))


def is_complete(lengths: Sequence[int], max_len: int) -> bool:
    """Valid code-length vector: bounded lengths, Kraft equality (or a lone length-1 code)."""
    lengths = [int(x) for x in lengths]
    if any(ln < 0 or ln > max_len for ln in lengths):
        return False
    used = [ln for ln in lengths if ln > 0]
    if not used:
        return True
    if len(used) == 1:
        return used[0] == 1
    total = sum(1 << (max_len - ln) for ln in used)
    return total == 1 << max_len


@dataclass
class HuffmanTable:
    lengths: np.ndarray
    codes: np.ndarray
    cwl: int
    lut_sym: np.ndarray
    lut_len: np.ndarray

    @classmethod
    def from_lengths(cls, lengths: Sequence[int], cwl: int) -> "HuffmanTable":
        lengths = np.asarray(lengths, dtype=np.int32)
        codes = canonical_codes(lengths)
        size = 1 << cwl
        lut_sym = np.zeros(size, dtype=np.int16)
        lut_len = np.zeros(size, dtype=np.uint8)  # 0 marks a window matching no code
        for sym in np.flatnonzero(lengths).tolist():
            ln = int(lengths[sym])
            shift = cwl - ln
            start = int(codes[sym]) << shift
            lut_sym[start:start + (1 << shift)] = sym
            lut_len[start:start + (1 << shift)] = ln
        return cls(lengths, codes, cwl, lut_sym, lut_len)

    @classmethod
    def build(cls, freqs: Sequence[int], cwl: int) -> "HuffmanTable":
        return cls.from_lengths(package_merge(freqs, cwl), cwl)

    @property
    def used_symbols(self) -> int:
        return int(np.count_nonzero(self.lengths))

    def cost(self, freqs: Sequence[int]) -> int:
        return int(np.dot(np.asarray(freqs, dtype=np.int64), self.lengths.astype(np.int64)))

    def lookup(self, window: int):
        """(symbol, length) for a ``cwl``-bit window; length 0 if no code matches."""
        return int(self.lut_sym[window]), int(self.lut_len[window])
