"""Frequency-based word n-gram dictionary: counting, thresholding, pruning, I/O.

Normalization convention used everywhere in this package: lowercase, split on
Unicode whitespace, and every Unicode punctuation character (category P*)
becomes its own token.
"""

from __future__ import annotations

import heapq
import os
import tempfile
import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DecodeError, ParseError, VersionError

Ngram = tuple[str, ...]

DICT_HEADER_PREFIX = "SPANDICT v1"


def normalize(text: str) -> list[str]:
    """Lowercase and tokenize: whitespace splits, punctuation chars stand alone."""
    tokens: list[str] = []
    buf: list[str] = []
    for ch in text.lower():
        if ch.isspace():
            if buf:
                tokens.append("".join(buf))
                buf = []
        elif unicodedata.category(ch).startswith("P"):
            if buf:
                tokens.append("".join(buf))
                buf = []
            tokens.append(ch)
        else:
            buf.append(ch)
    if buf:
        tokens.append("".join(buf))
    return tokens


def _iter_lines(corpus) -> Iterator[str]:
    """Yield decoded lines from a path or an iterable of strings.

    Raises DecodeError with the absolute byte offset on invalid UTF-8.
    """
    if isinstance(corpus, (str, os.PathLike)):
        offset = 0
        with open(corpus, "rb") as fh:
            for raw in fh:
                try:
                    yield raw.decode("utf-8")
                except UnicodeDecodeError as e:
                    raise DecodeError(offset + e.start) from None
                offset += len(raw)
    else:
        yield from corpus


def _line_ngrams(words: list[str], max_n: int) -> Iterator[Ngram]:
    n = len(words)
    for length in range(2, max_n + 1):
        for i in range(n - length + 1):
            yield tuple(words[i : i + length])


def _spill(counts: dict[Ngram, int], tmpdir: str) -> str:
    """Write a sorted 'key<TAB>count' shard file and return its path."""
    fd, path = tempfile.mkstemp(dir=tmpdir, suffix=".shard")
    with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(counts):
            fh.write(f"{' '.join(key)}\t{counts[key]}\n")
    return path


def _merge_shards(paths: list[str]) -> dict[Ngram, int]:
    """Exact merge of sorted shard files (adds counts of equal keys)."""

    def reader(path: str):
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                key, cnt = line.rstrip("\n").rsplit("\t", 1)
                yield key, int(cnt)

    merged: dict[Ngram, int] = {}
    cur_key: str | None = None
    cur_cnt = 0
    for key, cnt in heapq.merge(*(reader(p) for p in paths)):
        if key == cur_key:
            cur_cnt += cnt
        else:
            if cur_key is not None:
                merged[tuple(cur_key.split(" "))] = cur_cnt
            cur_key, cur_cnt = key, cnt
    if cur_key is not None:
        merged[tuple(cur_key.split(" "))] = cur_cnt
    return merged


def count_ngrams(corpus, max_n: int, shard_budget: int | None = None) -> dict[Ngram, int]:
    """Exact counts of all word n-grams of length 2..max_n, per line.

    n-grams never cross line boundaries. When shard_budget (in tokens) is
    exceeded, the partial table is spilled to a sorted temp file and counting
    restarts; shards are merged exactly at the end, so results are identical
    to a single in-memory pass.
    """
    if max_n < 2:
        raise ValueError(f"max_n must be >= 2, got {max_n}")
    counts: dict[Ngram, int] = {}
    shards: list[str] = []
    tokens_seen = 0
    with tempfile.TemporaryDirectory(prefix="spanseg_ngrams_") as tmpdir:
        for line in _iter_lines(corpus):
            words = normalize(line)
            if not words:
                continue
            for gram in _line_ngrams(words, max_n):
                counts[gram] = counts.get(gram, 0) + 1
            tokens_seen += len(words)
            if shard_budget is not None and tokens_seen >= shard_budget:
                shards.append(_spill(counts, tmpdir))
                counts = {}
                tokens_seen = 0
        if not shards:
            return counts
        if counts:
            shards.append(_spill(counts, tmpdir))
        return _merge_shards(shards)


@dataclass(frozen=True)
class NgramDictionary:
    """Immutable frequency-thresholded n-gram dictionary."""

    max_n: int
    min_count: int
    entries: dict[Ngram, int]
    source_fingerprint: str = ""

    def size(self) -> int:
        return len(self.entries)

    def contains(self, tokens: Iterable[str]) -> bool:
        """Membership after normalization; unigrams are never stored."""
        key = tuple(normalize(" ".join(tokens)))
        return key in self.entries

    def __contains__(self, tokens) -> bool:
        return self.contains(tokens)


def _sorted_items(entries: dict[Ngram, int]) -> list[tuple[Ngram, int]]:
    return sorted(entries.items(), key=lambda kv: (-kv[1], " ".join(kv[0])))


def build_dictionary(
    counts: dict[Ngram, int],
    min_count: int,
    max_n: int,
    source_fingerprint: str = "",
) -> NgramDictionary:
    """Keep exactly the n-grams occurring at least min_count times."""
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    kept = {
        k: v
        for k, v in counts.items()
        if v >= min_count and 2 <= len(k) <= max_n
    }
    return NgramDictionary(max_n, min_count, kept, source_fingerprint)


def prune_to_size(d: NgramDictionary, target: int) -> NgramDictionary:
    """Keep the target highest-count entries; ties break by ascending key."""
    if target < 0:
        raise ValueError("target must be >= 0")
    if target >= d.size():
        return d
    kept = dict(_sorted_items(d.entries)[:target])
    return NgramDictionary(d.max_n, d.min_count, kept, d.source_fingerprint)


def save_dictionary(d: NgramDictionary, path) -> None:
    """Write the SPANDICT v1 text format (LF endings, descending count order)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{DICT_HEADER_PREFIX} max_n={d.max_n} min_count={d.min_count}\n")
        for key, cnt in _sorted_items(d.entries):
            fh.write(f"{cnt}\t{' '.join(key)}\n")


def load_dictionary(path) -> NgramDictionary:
    """Parse a SPANDICT v1 file; ParseError names the offending line."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split(" ")
        if len(parts) != 4 or parts[0] != "SPANDICT":
            raise ParseError(1, f"bad header {header!r}")
        if parts[1] != "v1":
            raise VersionError(f"unsupported dictionary version {parts[1]!r}, expected v1")
        try:
            max_n = int(parts[2].removeprefix("max_n="))
            min_count = int(parts[3].removeprefix("min_count="))
        except ValueError:
            raise ParseError(1, f"bad header fields in {header!r}") from None
        entries: dict[Ngram, int] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                cnt_s, key_s = line.split("\t", 1)
                cnt = int(cnt_s)
            except ValueError:
                raise ParseError(lineno, f"expected '<count>\\t<tokens>', got {line!r}") from None
            if cnt < 1:
                raise ParseError(lineno, f"count must be positive, got {cnt}")
            key = tuple(key_s.split(" "))
            if not (2 <= len(key) <= max_n):
                raise ParseError(lineno, f"n-gram length {len(key)} outside [2, {max_n}]")
            entries[key] = cnt
    return NgramDictionary(max_n, min_count, entries)


def empty_dictionary(max_n: int = 5, min_count: int = 1) -> NgramDictionary:
    return NgramDictionary(max_n, min_count, {})
