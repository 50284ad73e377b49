import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import exclusive_prefix
from warpzip.warp import FULL_MASK, Warp, lowest_lane, unpack_ballot
from warpzip.errors import InvalidLane, WarpOverflow


def test_ballot_bit_order():
    w = Warp()
    votes = [False] * 32
    votes[0] = votes[5] = votes[31] = True
    bits = w.ballot(votes)
    assert bits == (1 << 0) | (1 << 5) | (1 << 31)
    assert unpack_ballot(bits) == votes


def test_ballot_respects_active_mask():
    assert Warp.with_lanes(3).ballot([True] * 32) == 0b111
    assert Warp(0).ballot([True] * 32) == 0


def test_shuffle_broadcasts():
    vals = list(range(100, 132))
    assert Warp().shuffle(vals, 7) == [107] * 32
    with pytest.raises(InvalidLane):
        Warp().shuffle(vals, 32)
    with pytest.raises(InvalidLane):
        Warp().shuffle(vals[:31], 0)


def test_prefix_sum_examples():
    w = Warp()
    assert w.exclusive_prefix_sum([1] * 32) == list(range(32))
    assert w.exclusive_prefix_sum([0] * 32) == [0] * 32
    # inactive lanes contribute nothing
    part = Warp.with_lanes(2).exclusive_prefix_sum([5, 7] + [100] * 30)
    assert part[:3] == [0, 5, 12]


def test_prefix_sum_overflow_and_negative():
    with pytest.raises(WarpOverflow):
        Warp().exclusive_prefix_sum([2 ** 62] * 32)
    with pytest.raises(ValueError):
        Warp().exclusive_prefix_sum([-1] + [0] * 31)


def test_lowest_lane():
    assert lowest_lane(0) == -1
    assert lowest_lane(0b1000) == 3
    assert lowest_lane(1 << 31) == 31
    assert lowest_lane(FULL_MASK) == 0


@given(st.lists(st.integers(0, 2 ** 40), min_size=32, max_size=32))
def test_prefix_sum_matches_sequential(vals):
    assert Warp().exclusive_prefix_sum(vals) == exclusive_prefix(vals)


@given(st.lists(st.booleans(), min_size=32, max_size=32), st.integers(0, FULL_MASK))
def test_ballot_matches_bitwise(votes, mask):
    expect = sum(1 << i for i, v in enumerate(votes) if v and (mask >> i) & 1)
    assert Warp(mask).ballot(votes) == expect
