"""Software model of a 32-lane lock-step warp.

Each primitive completes for all lanes before returning, which is what
lock-step execution guarantees on hardware.  The ``@njit`` functions are
the implementations; decompression kernels call them directly and
:class:`Warp` wraps them for Python callers.  Bit ``i`` of a ballot is
lane ``i``'s vote.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np
from numba import njit

from .core import WARP_SIZE
from .errors import InvalidLane, WarpOverflow

FULL_MASK = (1 << WARP_SIZE) - 1
_ACC_LIMIT = (1 << 63) - 1


@njit(cache=True, nogil=True)
def ballot(votes, active_mask):
    bits = 0
    for lane in range(32):
        if votes[lane] and (active_mask >> lane) & 1:
            bits |= 1 << lane
    return bits


@njit(cache=True, nogil=True)
def shfl(values, src_lane):
    """Value of ``src_lane``, as received by every lane."""
    return values[src_lane]


@njit(cache=True, nogil=True)
def lowest_lane(bits):
    """Index of the least significant set bit; -1 for an empty ballot."""
    if bits == 0:
        return -1
    lane = 0
    while not (bits >> lane) & 1:
        lane += 1
    return lane


@njit(cache=True, nogil=True)
def exclusive_scan(values, active_mask, out, scratch):
    """Shuffle-up (Kogge-Stone) scan; inactive lanes contribute 0."""
    for lane in range(32):
        out[lane] = values[lane] if (active_mask >> lane) & 1 else 0
    delta = 1
    while delta < 32:
        for lane in range(32):
            scratch[lane] = out[lane]
        for lane in range(delta, 32):
            out[lane] += scratch[lane - delta]
        delta <<= 1
    # inclusive -> exclusive
    for lane in range(31, 0, -1):
        out[lane] = out[lane - 1]
    out[0] = 0


def unpack_ballot(bits: int) -> List[bool]:
    return [bool((bits >> i) & 1) for i in range(WARP_SIZE)]


class Warp:
    """A warp with a fixed active mask; lanes outside the mask vote false."""

    def __init__(self, active_mask: int = FULL_MASK):
        if not 0 <= active_mask <= FULL_MASK:
            raise InvalidLane("active_mask must fit in 32 bits")
        self.active_mask = active_mask

    @classmethod
    def with_lanes(cls, count: int) -> "Warp":
        if not 0 <= count <= WARP_SIZE:
            raise InvalidLane(f"lane count {count} out of range")
        return cls((1 << count) - 1)

    def _lanes(self, values: Sequence, dtype) -> np.ndarray:
        arr = np.asarray(values, dtype=dtype)
        if arr.shape != (WARP_SIZE,):
            raise InvalidLane(f"expected one value per lane ({WARP_SIZE}), got {arr.shape}")
        return arr

    def ballot(self, votes: Sequence[bool]) -> int:
        return int(ballot(self._lanes(votes, np.bool_), self.active_mask))

    def shuffle(self, values: Sequence[int], src_lane: int) -> List[int]:
        if not 0 <= src_lane < WARP_SIZE:
            raise InvalidLane(f"source lane {src_lane} out of range")
        v = shfl(self._lanes(values, np.int64), src_lane)
        return [int(v)] * WARP_SIZE

    def exclusive_prefix_sum(self, values: Sequence[int]) -> List[int]:
        vals = [int(v) for v in values]
        if len(vals) != WARP_SIZE:
            raise InvalidLane(f"expected one value per lane ({WARP_SIZE}), got {len(vals)}")
        if any(v < 0 for v in vals):
            raise ValueError("prefix sum inputs must be non-negative")
        if sum(v for i, v in enumerate(vals) if (self.active_mask >> i) & 1) > _ACC_LIMIT:
            raise WarpOverflow("prefix sum exceeds the 63-bit accumulator")
        out = np.empty(WARP_SIZE, dtype=np.int64)
        exclusive_scan(np.array(vals, dtype=np.int64), self.active_mask, out,
                       np.empty(WARP_SIZE, dtype=np.int64))
        return out.tolist()
