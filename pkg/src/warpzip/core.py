"""Domain model: tokens, sequences, blocks and tunable parameters.

A block's sequences are stored column-wise (literal lengths, match lengths,
distances and one concatenated literal arena) because every kernel in the
package walks them that way.  :attr:`Block.sequences` materialises the
object view for callers that want it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Union

import numpy as np

from .errors import InvalidParams, MalformedBackRef

WARP_SIZE = 32
MIN_MATCH = 4
MAX_MATCH = 64
MAX_WINDOW = 65535
MAX_BLOCK_SIZE = 1 << 26


class Mode(enum.IntEnum):
    BYTE = 0
    BIT = 1


class Strategy(enum.Enum):
    SC = "sc"
    MRR = "mrr"


@dataclass(frozen=True)
class Literal:
    byte: int


@dataclass(frozen=True)
class BackRef:
    """Copy ``length`` bytes starting ``distance`` bytes back (1 = previous byte)."""

    distance: int
    length: int


Token = Union[Literal, BackRef]


@dataclass(frozen=True)
class Sequence:
    """A literal string followed by an optional back-reference.

    Only the last sequence of a block may omit the back-reference.
    """

    literal: bytes = b""
    backref: Optional[BackRef] = None

    @property
    def output_len(self) -> int:
        return len(self.literal) + (self.backref.length if self.backref else 0)


@dataclass(frozen=True)
class Params:
    block_size: int = 262144
    window_size: int = 8192
    lookahead: int = 64
    sub_block_seqs: int = 16
    warp_size: int = WARP_SIZE
    min_match: int = MIN_MATCH
    cwl_max: int = 10
    min_staleness: int = 1024
    de_policy: str = "deferred"
    mode: Mode = Mode.BIT
    de_enabled: bool = False
    strategy: Strategy = Strategy.MRR

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.warp_size != WARP_SIZE:
            raise InvalidParams(f"warp_size must be {WARP_SIZE}")
        if self.min_match not in (3, 4):
            raise InvalidParams("min_match must be 3 or 4")
        if not 1 <= self.window_size <= MAX_WINDOW:
            raise InvalidParams(f"window_size must be in [1, {MAX_WINDOW}]")
        if not self.window_size <= self.block_size <= MAX_BLOCK_SIZE:
            raise InvalidParams(f"block_size must be in [window_size, {MAX_BLOCK_SIZE}]")
        if not self.min_match <= self.lookahead <= MAX_MATCH:
            raise InvalidParams(f"lookahead must be in [min_match, {MAX_MATCH}]")
        if not 1 <= self.sub_block_seqs <= 0xFFFF:
            raise InvalidParams("sub_block_seqs must be in [1, 65535]")
        if not 1 <= self.cwl_max <= 15:
            raise InvalidParams("cwl_max must be in [1, 15]")
        if self.de_policy not in ("deferred", "staleness"):
            raise InvalidParams("de_policy must be 'deferred' or 'staleness'")
        if self.min_staleness < 0:
            raise InvalidParams("min_staleness must be >= 0")


@dataclass(eq=False)
class Block:
    """Token stream of one independently compressed block.

    ``match_len[i] == 0`` marks a sequence without a back-reference.
    """

    index: int
    uncompressed_len: int
    lit_len: np.ndarray
    match_len: np.ndarray
    distance: np.ndarray
    literals: np.ndarray
    _sequences: Optional[List[Sequence]] = field(default=None, repr=False)

    @property
    def seq_count(self) -> int:
        return len(self.lit_len)

    @property
    def sequences(self) -> List[Sequence]:
        if self._sequences is None:
            lits = self.literals.tobytes()
            out = []
            off = 0
            for ll, ml, d in zip(self.lit_len.tolist(), self.match_len.tolist(),
                                 self.distance.tolist()):
                br = BackRef(d, ml) if ml else None
                out.append(Sequence(lits[off:off + ll], br))
                off += ll
            self._sequences = out
        return self._sequences

    def tokens(self) -> Iterator[Token]:
        for seq in self.sequences:
            for b in seq.literal:
                yield Literal(b)
            if seq.backref is not None:
                yield seq.backref

    def token_count(self) -> int:
        return int(self.literals.shape[0]) + int(np.count_nonzero(self.match_len))

    @classmethod
    def from_sequences(cls, seqs: Iterable[Sequence], index: int = 0) -> "Block":
        seqs = list(seqs)
        lit_len = np.array([len(s.literal) for s in seqs], dtype=np.int32)
        match_len = np.array([s.backref.length if s.backref else 0 for s in seqs],
                             dtype=np.int32)
        distance = np.array([s.backref.distance if s.backref else 0 for s in seqs],
                            dtype=np.int32)
        literals = np.frombuffer(b"".join(s.literal for s in seqs), dtype=np.uint8).copy()
        total = int(lit_len.sum()) + int(match_len.sum())
        return cls(index, total, lit_len, match_len, distance, literals, seqs)

    def check_alternation(self) -> bool:
        """Every sequence but the last carries a back-reference."""
        if self.seq_count == 0:
            return True
        return bool(np.all(self.match_len[:-1] > 0))


def empty_block(index: int = 0) -> Block:
    z = np.zeros(0, dtype=np.int32)
    return Block(index, 0, z, z.copy(), z.copy(), np.zeros(0, dtype=np.uint8))


def sequences_to_bytes(block: Union[Block, Iterable[Sequence]]) -> bytes:
    """Sequential reference expansion of a block's sequences.

    Overlapping copies (distance < length) replicate front to back.
    """
    seqs = block.sequences if isinstance(block, Block) else block
    out = bytearray()
    for seq in seqs:
        out += seq.literal
        br = seq.backref
        if br is None:
            continue
        if br.distance < 1 or br.distance > len(out):
            raise MalformedBackRef(
                f"back-reference distance {br.distance} at output position {len(out)}")
        start = len(out) - br.distance
        if br.distance >= br.length:
            out += out[start:start + br.length]
        else:
            for i in range(br.length):
                out.append(out[start + i])
    return bytes(out)
