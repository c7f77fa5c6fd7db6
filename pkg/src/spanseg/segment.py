"""Greedy longest-match sentence segmentation and span/subword bookkeeping."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    AlignmentError,
    EmptyInputError,
    EmptySentenceError,
    ParseError,
    ValidationError,
)
from .ngrams import NgramDictionary, normalize
from .rng import SplitMix64

Span = tuple[int, int]


@dataclass(frozen=True)
class WordSequence:
    words: tuple[str, ...]
    raw: str

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class SpanPartition:
    """Sorted, contiguous, covering half-open word-index ranges."""

    spans: tuple[Span, ...]

    def __post_init__(self):
        if not self.spans:
            raise ValidationError("partition must contain at least one span")
        if self.spans[0][0] != 0:
            raise ValidationError("first span must start at 0")
        prev_end = 0
        for start, end in self.spans:
            if start != prev_end:
                raise ValidationError(f"span [{start},{end}) not contiguous with previous end {prev_end}")
            if end <= start:
                raise ValidationError(f"span [{start},{end}) is empty or reversed")
            prev_end = end

    @property
    def word_count(self) -> int:
        return self.spans[-1][1]

    def __len__(self) -> int:
        return len(self.spans)


@dataclass(frozen=True)
class SubwordAlignment:
    """Per-word half-open subword ranges (0-based over non-special positions).

    cls_offset counts special tokens sitting before the first word's subwords
    in the contextual sequence.
    """

    ranges: tuple[Span, ...]
    cls_offset: int = 0

    def __post_init__(self):
        prev_end = self.ranges[0][0] if self.ranges else 0
        if self.ranges and self.ranges[0][0] != 0:
            raise ValidationError("alignment must start at subword 0")
        for start, end in self.ranges:
            if start != prev_end or end < start:
                raise ValidationError("alignment ranges must be sorted and contiguous")
            prev_end = end


def identity_alignment(word_count: int, cls_offset: int = 1) -> SubwordAlignment:
    """Toy-mode alignment: one word = one subword."""
    return SubwordAlignment(tuple((i, i + 1) for i in range(word_count)), cls_offset)


def normalize_and_tokenize(text: str) -> WordSequence:
    words = normalize(text)
    if not words:
        raise EmptySentenceError("empty sentence: input contains no tokens")
    return WordSequence(tuple(words), text)


def segment_greedy(dictionary: NgramDictionary, words: WordSequence | Sequence[str]) -> SpanPartition:
    """Scan from the head, always taking the longest dictionary match.

    Unmatched positions become singleton spans.
    """
    toks = words.words if isinstance(words, WordSequence) else tuple(words)
    if not toks:
        raise EmptySentenceError("cannot segment an empty word sequence")
    n = len(toks)
    spans: list[Span] = []
    p = 0
    while p < n:
        matched = 1
        for length in range(min(dictionary.max_n, n - p), 1, -1):
            if toks[p : p + length] in dictionary.entries:
                matched = length
                break
        spans.append((p, p + matched))
        p += matched
    return SpanPartition(tuple(spans))


def segment_random(words: WordSequence | Sequence[str], seed: int, max_len: int) -> SpanPartition:
    """Seeded random partition: lengths drawn uniformly from [1, max_len]."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    toks = words.words if isinstance(words, WordSequence) else tuple(words)
    if not toks:
        raise EmptySentenceError("cannot segment an empty word sequence")
    gen = SplitMix64(seed)
    n = len(toks)
    spans: list[Span] = []
    p = 0
    while p < n:
        length = min(1 + gen.next_below(max_len), n - p)
        spans.append((p, p + length))
        p += length
    return SpanPartition(tuple(spans))


def load_external_segmentation(path) -> list[tuple[WordSequence, SpanPartition]]:
    """Read JSON-lines {"tokens": [...], "spans": [[start,end]...]} records."""
    out: list[tuple[WordSequence, SpanPartition]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(lineno, f"malformed JSON: {e.msg}") from None
            try:
                tokens = tuple(str(t) for t in rec["tokens"])
                spans = tuple((int(s), int(e)) for s, e in rec["spans"])
            except (KeyError, TypeError, ValueError):
                raise ParseError(lineno, "record needs 'tokens' and 'spans' fields") from None
            try:
                part = SpanPartition(spans)
            except ValidationError as e:
                raise ValidationError(f"record {lineno}: {e}") from None
            if part.word_count != len(tokens):
                raise ValidationError(
                    f"record {lineno}: spans cover {part.word_count} words but {len(tokens)} tokens given"
                )
            out.append((WordSequence(tokens, " ".join(tokens)), part))
    return out


def project_to_subwords(partition: SpanPartition, alignment: SubwordAlignment) -> list[Span]:
    """Map word spans onto contextual-sequence subword index ranges."""
    if partition.word_count != len(alignment.ranges):
        raise AlignmentError(
            f"partition covers {partition.word_count} words, alignment describes {len(alignment.ranges)}"
        )
    off = alignment.cls_offset
    return [
        (alignment.ranges[a][0] + off, alignment.ranges[b - 1][1] + off)
        for a, b in partition.spans
    ]


@dataclass(frozen=True)
class SpanStats:
    avg_spans: float
    histogram: dict[int, int]
    sentences: int


def span_stats(sentences: Iterable[WordSequence | Sequence[str]], dictionary: NgramDictionary) -> SpanStats:
    """Average greedy span count per sentence, plus a span-count histogram."""
    hist: Counter[int] = Counter()
    total = 0
    n = 0
    for sent in sentences:
        k = len(segment_greedy(dictionary, sent))
        hist[k] += 1
        total += k
        n += 1
    if n == 0:
        raise EmptyInputError("span_stats requires at least one sentence")
    return SpanStats(total / n, dict(hist), n)
