import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import (bytes_to_bits, canonical_code_map, optimal_limited_cost,
                     tree_walk_decode, unlimited_huffman_cost)
from warpzip.errors import TooManySymbols
from warpzip.huffman import (HuffmanTable, canonical_codes, is_complete, kraft_sum,
                             package_merge)


def test_single_symbol_gets_length_one():
    assert package_merge([0, 0, 1, 0], 10).tolist() == [0, 0, 1, 0]


def test_two_symbols():
    t = HuffmanTable.build([1, 1], 10)
    assert t.lengths.tolist() == [1, 1]
    assert t.codes.tolist() == [0, 1]


def test_no_symbols():
    assert package_merge([0, 0], 4).tolist() == [0, 0]


def test_length_limit_binds():
    # Fibonacci weights give depth n-1 unlimited; a limit of 4 forces a flatter code
    freqs = [1, 1, 2, 3, 5, 8, 13, 21]
    unlimited = package_merge(freqs, 15)
    assert unlimited.max() == 7
    limited = package_merge(freqs, 4)
    assert limited.max() <= 4
    assert is_complete(limited, 4)
    cost = int(np.dot(freqs, limited))
    assert cost == optimal_limited_cost(freqs, 4)


def test_too_many_symbols():
    with pytest.raises(TooManySymbols):
        package_merge([1] * 9, 3)
    assert package_merge([1] * 8, 3).tolist() == [3] * 8


def test_canonical_assignment_order():
    # lengths (2, 1, 3, 3) -> codes 10, 0, 110, 111
    assert canonical_codes([2, 1, 3, 3]).tolist() == [0b10, 0b0, 0b110, 0b111]


def test_lut_layout():
    t = HuffmanTable.from_lengths([2, 1, 3, 3], 3)
    assert [t.lookup(w) for w in range(8)] == [
        (1, 1), (1, 1), (1, 1), (1, 1), (0, 2), (0, 2), (2, 3), (3, 3)]


def test_lut_marks_gaps_for_single_symbol():
    t = HuffmanTable.from_lengths([0, 1], 4)
    assert t.lookup(0b0000) == (1, 1)
    assert t.lookup(0b1000)[1] == 0


@given(st.lists(st.integers(1, 1000), min_size=2, max_size=8), st.integers(3, 6))
def test_matches_exhaustive_optimum(freqs, max_len):
    if len(freqs) > 1 << max_len:
        return
    lengths = package_merge(freqs, max_len)
    assert int(np.dot(freqs, lengths)) == optimal_limited_cost(freqs, max_len)


@given(st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=300), st.integers(9, 15))
def test_lengths_bounded_and_complete(freqs, cwl):
    if sum(1 for f in freqs if f) == 0:
        return
    lengths = package_merge(freqs, cwl)
    used = [ln for f, ln in zip(freqs, lengths) if f]
    assert all(1 <= ln <= cwl for ln in used)
    assert all(ln == 0 for f, ln in zip(freqs, lengths) if not f)
    if len(used) >= 2:
        assert kraft_sum(lengths) == 1.0
    cost = int(np.dot(freqs, lengths))
    assert cost >= unlimited_huffman_cost(freqs)


@given(st.lists(st.integers(0, 500), min_size=2, max_size=40), st.integers(4, 10),
       st.binary(min_size=1, max_size=64))
def test_lut_decode_matches_tree_walk(freqs, cwl, noise):
    if sum(1 for f in freqs if f) < 2 or sum(1 for f in freqs if f) > 1 << cwl:
        return
    t = HuffmanTable.build(freqs, cwl)
    code_map = canonical_code_map(t.lengths.tolist())
    # every code word found by the LUT agrees with walking the code bit by bit
    for w in range(1 << cwl):
        bits = format(w, f"0{cwl}b")
        sym, ln = t.lookup(w)
        assert ln > 0  # complete code: no gaps
        assert tree_walk_decode(bits, code_map, 1) == ([sym], ln)
    # and on a random stream of code words
    bits = bytes_to_bits(noise)
    pos = 0
    lut_syms = []
    while pos + cwl <= len(bits):
        sym, ln = t.lookup(int(bits[pos:pos + cwl], 2))
        lut_syms.append(sym)
        pos += ln
    walk, used = tree_walk_decode(bits, code_map, len(lut_syms))
    assert walk == lut_syms and used == pos
