import json
import math

import pytest

from spanseg import segment as seg
from spanseg.errors import (
    AlignmentError,
    EmptyInputError,
    EmptySentenceError,
    ParseError,
    ValidationError,
)
from spanseg.ngrams import NgramDictionary, empty_dictionary
from spanseg.rng import SplitMix64


def make_dict(*phrases, max_n=5):
    return NgramDictionary(max_n, 1, {tuple(p.split()): 1 for p in phrases})


def oracle_greedy(dictionary, words):
    """Straightforward re-implementation used as the segmentation oracle."""
    spans = []
    i = 0
    while i < len(words):
        j_best = i + 1
        j = min(len(words), i + dictionary.max_n)
        while j > i + 1:
            if tuple(words[i:j]) in dictionary.entries:
                j_best = j
                break
            j -= 1
        spans.append((i, j_best))
        i = j_best
    return tuple(spans)


def test_tokenize_examples():
    assert seg.normalize_and_tokenize("New York!").words == ("new", "york", "!")
    assert seg.normalize_and_tokenize("a b").words == ("a", "b")
    with pytest.raises(EmptySentenceError):
        seg.normalize_and_tokenize("   ")


def test_greedy_longest_match():
    d = make_dict("new york", "new york city")
    part = seg.segment_greedy(d, ["i", "live", "in", "new", "york", "city"])
    assert part.spans == ((0, 1), (1, 2), (2, 3), (3, 6))


def test_greedy_empty_dict_all_singletons():
    part = seg.segment_greedy(empty_dictionary(), ["a", "b", "c"])
    assert part.spans == ((0, 1), (1, 2), (2, 3))


def test_greedy_is_not_globally_optimal():
    d = make_dict("a b", "b c d")
    part = seg.segment_greedy(d, ["a", "b", "c", "d"])
    assert part.spans == ((0, 2), (2, 3), (3, 4))


def test_greedy_matches_oracle_randomized():
    gen = SplitMix64(99)
    vocab = [f"v{i}" for i in range(8)]
    for _ in range(300):
        n_entries = gen.next_below(12)
        entries = {}
        for _ in range(n_entries):
            length = 2 + gen.next_below(3)
            entries[tuple(vocab[gen.next_below(len(vocab))] for _ in range(length))] = 1
        d = NgramDictionary(4, 1, entries)
        words = [vocab[gen.next_below(len(vocab))] for _ in range(1 + gen.next_below(15))]
        part = seg.segment_greedy(d, words)
        assert part.spans == oracle_greedy(d, words)
        # cover/contiguity/membership invariants:
        rebuilt = [w for a, b in part.spans for w in words[a:b]]
        assert rebuilt == words
        for a, b in part.spans:
            if b - a > 1:
                assert tuple(words[a:b]) in d.entries
            for length in range(b - a + 1, min(d.max_n, len(words) - a) + 1):
                assert tuple(words[a : a + length]) not in d.entries
        assert math.ceil(len(words) / d.max_n) <= len(part) <= len(words)


def test_random_segmentation_contract():
    words = ["a", "b", "c"]
    assert seg.segment_random(words, 5, 1).spans == ((0, 1), (1, 2), (2, 3))
    assert seg.segment_random(words, 17, 3).spans == seg.segment_random(words, 17, 3).spans
    gen = SplitMix64(1)
    for _ in range(200):
        n = 1 + gen.next_below(20)
        ws = [f"w{i}" for i in range(n)]
        part = seg.segment_random(ws, gen.next_u64(), 1 + gen.next_below(5))
        assert part.word_count == n  # SpanPartition validates the rest


def test_external_segmentation_roundtrip(tmp_path):
    p = tmp_path / "seg.jsonl"
    p.write_text('{"tokens":["a","b"],"spans":[[0,2]]}\n')
    records = seg.load_external_segmentation(p)
    assert len(records) == 1
    ws, part = records[0]
    assert ws.words == ("a", "b") and part.spans == ((0, 2),)


def test_external_segmentation_gap_rejected(tmp_path):
    p = tmp_path / "seg.jsonl"
    p.write_text('{"tokens":["a","b","c"],"spans":[[0,1],[2,3]]}\n')
    with pytest.raises(ValidationError):
        seg.load_external_segmentation(p)


def test_external_segmentation_bad_json(tmp_path):
    p = tmp_path / "seg.jsonl"
    p.write_text('{"tokens": [}\n')
    with pytest.raises(ParseError) as ei:
        seg.load_external_segmentation(p)
    assert ei.value.line == 1


def test_external_segmentation_empty_file(tmp_path):
    p = tmp_path / "seg.jsonl"
    p.write_text("")
    assert seg.load_external_segmentation(p) == []


def test_project_to_subwords():
    align = seg.SubwordAlignment(((0, 2), (2, 3)), cls_offset=1)
    part = seg.SpanPartition(((0, 2),))
    assert seg.project_to_subwords(part, align) == [(1, 4)]


def test_project_identity_alignment():
    part = seg.SpanPartition(((0, 1), (1, 3)))
    out = seg.project_to_subwords(part, seg.identity_alignment(3, cls_offset=0))
    assert out == [(0, 1), (1, 3)]


def test_project_word_count_mismatch():
    part = seg.SpanPartition(((0, 3),))
    with pytest.raises(AlignmentError):
        seg.project_to_subwords(part, seg.identity_alignment(2))


def test_span_stats():
    st = seg.span_stats([["a", "b", "c"], ["a"] * 5], empty_dictionary())
    assert st.avg_spans == 4.0 and st.sentences == 2
    st2 = seg.span_stats([["a", "b"]], make_dict("a b"))
    assert st2.avg_spans == 1.0
    with pytest.raises(EmptyInputError):
        seg.span_stats([], empty_dictionary())


def test_full_dict_never_increases_avg_vs_empty():
    gen = SplitMix64(3)
    vocab = ["x", "y", "z"]
    sents = [
        [vocab[gen.next_below(3)] for _ in range(1 + gen.next_below(10))] for _ in range(50)
    ]
    full = make_dict("x y", "y z", "z x", "x y z")
    assert seg.span_stats(sents, full).avg_spans <= seg.span_stats(sents, empty_dictionary()).avg_spans


def test_partition_invariants_enforced():
    with pytest.raises(ValidationError):
        seg.SpanPartition(((1, 2),))
    with pytest.raises(ValidationError):
        seg.SpanPartition(((0, 1), (2, 3)))
    with pytest.raises(ValidationError):
        seg.SpanPartition(((0, 0),))
