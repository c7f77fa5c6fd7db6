import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanseg import ngrams
from spanseg.errors import DecodeError, ParseError, VersionError
from spanseg.ngrams import (
    NgramDictionary,
    build_dictionary,
    count_ngrams,
    load_dictionary,
    normalize,
    prune_to_size,
    save_dictionary,
)


def oracle_counts(lines, max_n):
    """Single-pass sliding-window oracle, independent of the sharded path."""
    table = {}
    for line in lines:
        words = normalize(line)
        for n in range(2, max_n + 1):
            for i in range(len(words) - n + 1):
                key = tuple(words[i : i + n])
                table[key] = table.get(key, 0) + 1
    return table


def test_normalize_rules():
    assert normalize("New York!") == ["new", "york", "!"]
    assert normalize("a b") == ["a", "b"]
    assert normalize("don't stop") == ["don", "'", "t", "stop"]
    assert normalize("  \t ") == []


def test_count_basic_sliding_window():
    counts = count_ngrams(["a b a b a"], max_n=2)
    assert counts == {("a", "b"): 2, ("b", "a"): 2}


def test_count_empty_corpus():
    assert count_ngrams([], max_n=5) == {}


def test_count_rejects_small_max_n():
    with pytest.raises(ValueError):
        count_ngrams(["a b"], max_n=1)


def test_ngrams_do_not_cross_lines():
    counts = count_ngrams(["a b", "c d"], max_n=3)
    assert ("b", "c") not in counts


def test_sharded_equals_oracle_on_random_corpora():
    from spanseg.rng import SplitMix64

    gen = SplitMix64(7)
    vocab = [f"t{i}" for i in range(12)]
    for trial in range(10):
        lines = [
            " ".join(vocab[gen.next_below(len(vocab))] for _ in range(gen.next_below(20) + 1))
            for _ in range(gen.next_below(40) + 1)
        ]
        sharded = count_ngrams(lines, max_n=4, shard_budget=17)
        assert sharded == oracle_counts(lines, 4)


def test_decode_error_reports_byte_offset(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_bytes(b"good line\n" + b"bad \xff byte\n")
    with pytest.raises(DecodeError) as ei:
        count_ngrams(p, max_n=2)
    assert ei.value.offset == 14


def test_build_threshold():
    counts = {("a", "b"): 2, ("b", "a"): 2}
    d = build_dictionary(counts, min_count=2, max_n=2)
    assert set(d.entries) == {("a", "b"), ("b", "a")}
    assert build_dictionary({("a", "b"): 2}, min_count=3, max_n=2).size() == 0


@given(
    st.dictionaries(
        st.tuples(st.sampled_from("abcd"), st.sampled_from("abcd")),
        st.integers(min_value=1, max_value=30),
        max_size=16,
    ),
    st.integers(min_value=1, max_value=10),
    st.integers(min_value=1, max_value=10),
)
def test_build_monotone_in_min_count(counts, m1, m2):
    lo, hi = sorted((m1, m2))
    d_lo = build_dictionary(counts, lo, 2)
    d_hi = build_dictionary(counts, hi, 2)
    assert set(d_hi.entries) <= set(d_lo.entries)


def test_prune_tie_break():
    d = NgramDictionary(2, 1, {("x", "y"): 5, ("y", "z"): 3, ("z", "w"): 3})
    pruned = prune_to_size(d, 2)
    assert set(pruned.entries) == {("x", "y"), ("y", "z")}


def test_prune_edges_and_idempotence():
    d = NgramDictionary(2, 1, {("x", "y"): 5, ("y", "z"): 3})
    assert prune_to_size(d, 0).size() == 0
    assert prune_to_size(d, d.size()).entries == d.entries
    once = prune_to_size(d, 1)
    assert prune_to_size(once, 1).entries == once.entries


def test_contains_normalizes():
    d = NgramDictionary(2, 1, {("new", "york"): 3})
    assert d.contains(["New", "York"])
    assert not d.contains(["new"])
    assert not NgramDictionary(2, 1, {}).contains(["new", "york"])


def test_roundtrip_identity(tmp_path):
    d = NgramDictionary(3, 2, {("a", "b"): 4, ("b", "c", "d"): 2}, "fp")
    path = tmp_path / "d.txt"
    save_dictionary(d, path)
    loaded = load_dictionary(path)
    assert loaded.entries == d.entries
    assert (loaded.max_n, loaded.min_count) == (3, 2)
    # bit-exact on save-load-save
    save_dictionary(loaded, tmp_path / "d2.txt")
    assert (tmp_path / "d.txt").read_bytes() == (tmp_path / "d2.txt").read_bytes()


def test_file_format_is_canonical(tmp_path):
    d = NgramDictionary(2, 1, {("b", "c"): 5, ("a", "b"): 5, ("z", "z"): 9})
    path = tmp_path / "d.txt"
    save_dictionary(d, path)
    assert path.read_bytes() == (
        b"SPANDICT v1 max_n=2 min_count=1\n9\tz z\n5\ta b\n5\tb c\n"
    )


def test_load_handwritten_file(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("SPANDICT v1 max_n=5 min_count=10\n12\tnew york\n10\tin the\n")
    d = load_dictionary(p)
    assert d.entries == {("new", "york"): 12, ("in", "the"): 10}


def test_load_bad_count_names_line(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("SPANDICT v1 max_n=5 min_count=10\n12\tnew york\nxx\tin the\n")
    with pytest.raises(ParseError) as ei:
        load_dictionary(p)
    assert ei.value.line == 3


def test_load_version_mismatch(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("SPANDICT v9 max_n=5 min_count=10\n")
    with pytest.raises(VersionError):
        load_dictionary(p)


def test_stored_invariants_after_build():
    counts = oracle_counts(["a b c a b", "b c b c"], 3)
    d = build_dictionary(counts, min_count=2, max_n=3)
    assert all(v >= 2 for v in d.entries.values())
    assert all(2 <= len(k) <= 3 for k in d.entries)
