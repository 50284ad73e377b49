"""Synthetic inputs: controlled back-reference nesting depth, and pseudo-text.

Nesting datasets
----------------
A unit is a ``unit_len``-byte string followed by one separator byte.
``32 // depth`` distinct strings are emitted round-robin.  Each time a
string reappears, exactly one byte changes, alternating between its first
and its last byte.  The greedy matcher then emits exactly one
back-reference per unit, pointing at the previous instance of the same
string, whose bytes were themselves produced by that instance's
back-reference.  Within a 32-sequence group this yields chains of length
``depth``.

Mutation values are drawn from the payload alphabet in a fixed cycle, so a
string's mutated 4-grams never recur within the sliding window and no
spurious long-distance match cuts a chain.  Each compression block is
generated separately so chains line up with warp groups: a block holds the
initial literal instances, a whole number of 32-unit groups, then padding
whose 4-grams are all distinct.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import MIN_MATCH, WARP_SIZE, Params
from .errors import InvalidDepth

SEPARATORS = bytes(range(0xF8, 0x100))
PAYLOAD = bytes(range(0, 0xF8))
VALID_DEPTHS = (1, 2, 4, 8, 16, 32)


@dataclass(frozen=True)
class NestingSpec:
    depth: int
    total_len: int
    unit_len: int = 16
    block_size: int = Params().block_size
    separator_alphabet: bytes = SEPARATORS
    seed: int = 0

    def __post_init__(self):
        if self.depth not in VALID_DEPTHS:
            raise InvalidDepth(f"depth must be one of {VALID_DEPTHS}, got {self.depth}")
        if self.unit_len < MIN_MATCH + 2:
            raise InvalidDepth(f"unit_len must be at least {MIN_MATCH + 2}")
        # the payload alphabet is the complement, so the two are always disjoint
        if len(set(self.separator_alphabet)) < 2:
            raise InvalidDepth("separator alphabet needs at least 2 distinct bytes")

    @property
    def payload_alphabet(self) -> bytes:
        return bytes(b for b in range(256) if b not in set(self.separator_alphabet))

    @property
    def strings(self) -> int:
        return WARP_SIZE // self.depth


def _de_bruijn(alphabet: bytes, order: int) -> bytes:
    k = len(alphabet)
    a = [0] * (k * order)
    seq = []

    def db(t, p):
        if t > order:
            if order % p == 0:
                seq.extend(a[1:p + 1])
        else:
            a[t] = a[t - p]
            db(t + 1, p)
            for j in range(a[t - p] + 1, k):
                a[t] = j
                db(t + 1, t)

    db(1, 1)
    return bytes(alphabet[i] for i in seq)


def _middles(spec: NestingSpec, rng: np.random.Generator) -> list[bytes]:
    """Per-string middle parts whose byte bigrams are all distinct."""
    alphabet = np.frombuffer(spec.payload_alphabet, dtype=np.uint8)
    seen: set[tuple[int, int]] = set()
    out = []
    for _ in range(spec.strings):
        while True:
            mid = rng.choice(alphabet, size=spec.unit_len - 2, replace=False).tobytes()
            grams = {(mid[i], mid[i + 1]) for i in range(len(mid) - 1)}
            if not grams & seen and len(set(mid[:2])) == 2:
                seen |= grams
                out.append(mid)
                break
    return out


def _nested_block(spec: NestingSpec, size: int, rng: np.random.Generator) -> bytes:
    n = spec.strings
    stride = spec.unit_len + 1
    seps = spec.separator_alphabet
    payload = spec.payload_alphabet
    groups = max(0, (size // stride - n) // WARP_SIZE)
    units = n + groups * WARP_SIZE if groups else min(n, size // stride)
    mids = _middles(spec, rng)
    # per-string mutation cursors into the payload cycle
    x_idx = [int(v) for v in rng.integers(0, len(payload), size=n)]
    y_idx = [int(v) for v in rng.integers(0, len(payload), size=n)]
    appearances = [0] * n
    out = bytearray()
    for u in range(units):
        s = u % n
        k = appearances[s]
        if k > 0:
            if k % 2 == 1:
                x_idx[s] = (x_idx[s] + 1) % len(payload)
            else:
                y_idx[s] = (y_idx[s] + 1) % len(payload)
        appearances[s] += 1
        out.append(payload[x_idx[s]])
        out += mids[s]
        out.append(payload[y_idx[s]])
        out.append(seps[(u // n) % len(seps)])
    pad = size - len(out)
    if pad > 0:
        filler = _de_bruijn(seps, MIN_MATCH)
        out += bytes(itertools.islice(itertools.cycle(filler), pad))
    return bytes(out)


def generate_nested(spec: NestingSpec) -> bytes:
    """Dataset whose full 32-sequence groups need exactly ``spec.depth`` MRR rounds."""
    rng = np.random.default_rng(spec.seed)
    parts = []
    remaining = spec.total_len
    while remaining > 0:
        size = min(spec.block_size, remaining)
        parts.append(_nested_block(spec, size, rng))
        remaining -= size
    return b"".join(parts)


_WORD_LETTERS = np.frombuffer(b"etaoinshrdlcumwfgypbvkjxqz", dtype=np.uint8)
_LETTER_WEIGHTS = np.array([12.7, 9.1, 8.2, 7.5, 7.0, 6.7, 6.3, 6.1, 6.0, 4.3, 4.0, 2.8,
                            2.8, 2.4, 2.4, 2.2, 2.0, 2.0, 1.9, 1.5, 1.0, 0.8, 0.15,
                            0.15, 0.1, 0.07])


def generate_text_like(length: int, seed: int = 0, vocab_size: int = 30000,
                       zipf_s: float = 1.1) -> bytes:
    """Deterministic pseudo-text with a Zipfian word distribution."""
    if length <= 0:
        return b""
    rng = np.random.default_rng(seed)
    weights = _LETTER_WEIGHTS / _LETTER_WEIGHTS.sum()
    word_lens = rng.integers(2, 11, size=vocab_size)
    vocab = []
    for wl in word_lens:
        vocab.append(rng.choice(_WORD_LETTERS, size=int(wl), p=weights).tobytes())
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    cdf = np.cumsum(ranks ** -zipf_s)
    cdf /= cdf[-1]
    out = []
    produced = 0
    while produced < length:
        count = max(1024, (length - produced) // 5)
        idx = np.searchsorted(cdf, rng.random(count))
        punct = rng.random(count)
        words = []
        for i, p in zip(idx.tolist(), punct.tolist()):
            w = vocab[i]
            if p < 0.06:
                w += b","
            elif p < 0.1:
                w += b".\n" if p < 0.07 else b"."
            words.append(w)
        chunk = b" ".join(words) + b" "
        out.append(chunk)
        produced += len(chunk)
    return b"".join(out)[:length]
