import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import expand_sequences
from warpzip.core import (BackRef, Block, Literal, Mode, Params, Sequence, Strategy,
                          empty_block, sequences_to_bytes)
from warpzip.errors import InvalidParams, MalformedBackRef


def test_figure_trace_expands():
    seqs = [Sequence(b"aac", BackRef(3, 3)), Sequence(b"b")]
    assert sequences_to_bytes(seqs) == b"aacaacb"


def test_overlapping_copy_replicates():
    assert sequences_to_bytes([Sequence(b"ab", BackRef(2, 6))]) == b"abababab"
    assert sequences_to_bytes([Sequence(b"z", BackRef(1, 5))]) == b"zzzzzz"


def test_empty():
    assert sequences_to_bytes([]) == b""
    assert empty_block().seq_count == 0
    assert sequences_to_bytes(empty_block()) == b""


@pytest.mark.parametrize("d", [0, 4])
def test_backref_out_of_range(d):
    with pytest.raises(MalformedBackRef):
        sequences_to_bytes([Sequence(b"abc", BackRef(d, 4))])


def test_block_columns_and_tokens():
    seqs = [Sequence(b"ab", BackRef(2, 4)), Sequence(b"", BackRef(3, 5)), Sequence(b"q")]
    b = Block.from_sequences(seqs)
    assert b.seq_count == 3
    assert b.uncompressed_len == 2 + 4 + 5 + 1
    assert b.lit_len.tolist() == [2, 0, 1]
    assert b.match_len.tolist() == [4, 5, 0]
    assert list(b.tokens()) == [Literal(97), Literal(98), BackRef(2, 4), BackRef(3, 5),
                                Literal(113)]
    assert b.token_count() == 5
    assert b.check_alternation()
    fresh = Block(0, b.uncompressed_len, b.lit_len, b.match_len, b.distance, b.literals)
    assert fresh.sequences == seqs


def test_alternation_violation_detected():
    b = Block.from_sequences([Sequence(b"ab"), Sequence(b"c", BackRef(1, 4))])
    assert not b.check_alternation()


def test_params_defaults():
    p = Params()
    assert (p.block_size, p.window_size, p.lookahead, p.sub_block_seqs) == (262144, 8192, 64, 16)
    assert p.cwl_max == 10 and p.min_staleness == 1024 and p.min_match == 4
    assert p.mode == Mode.BIT and p.strategy == Strategy.MRR and not p.de_enabled


@pytest.mark.parametrize("kwargs", [
    {"warp_size": 16}, {"min_match": 5}, {"window_size": 0}, {"window_size": 70000},
    {"block_size": 100}, {"lookahead": 65}, {"lookahead": 3}, {"sub_block_seqs": 0},
    {"cwl_max": 16}, {"min_staleness": -1}, {"de_policy": "lazy"},
])
def test_params_rejected(kwargs):
    with pytest.raises(InvalidParams):
        Params(**kwargs)


@st.composite
def sequence_lists(draw):
    seqs = []
    produced = 0
    for i in range(draw(st.integers(0, 12))):
        lit = draw(st.binary(max_size=6))
        produced += len(lit)
        if produced == 0:
            lit = b"x"
            produced = 1
        d = draw(st.integers(1, produced))
        n = draw(st.integers(4, 20))
        seqs.append(Sequence(lit, BackRef(d, n)))
        produced += n
    return seqs


@given(sequence_lists())
def test_expansion_matches_oracle(seqs):
    assert sequences_to_bytes(seqs) == expand_sequences(seqs)
    b = Block.from_sequences(seqs)
    assert b.uncompressed_len == len(expand_sequences(seqs))
