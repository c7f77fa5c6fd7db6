"""Shared helpers: the synthetic phrase-detection task used by trainer and
acceptance tests."""

from spanseg.ngrams import NgramDictionary
from spanseg.rng import SplitMix64
from spanseg.train import LabeledExample

PHRASES = [(f"p{i}", f"q{i}") for i in range(8)]
PHRASE_DICT = NgramDictionary(5, 1, {p: 10 for p in PHRASES})
VOCAB = [f"w{i}" for i in range(40)]


def make_phrase_dataset(n: int, seed: int) -> list[LabeledExample]:
    """Balanced task: label 1 iff the sentence contains a dictionary bigram.

    Filler words are disjoint from phrase words, so negatives never contain a
    dictionary entry by accident.
    """
    gen = SplitMix64(seed)
    out = []
    for i in range(n):
        length = 6 + gen.next_below(7)
        words = [VOCAB[gen.next_below(len(VOCAB))] for _ in range(length)]
        label = i % 2
        if label == 1:
            ph = PHRASES[gen.next_below(len(PHRASES))]
            pos = gen.next_below(length - 1)
            words[pos : pos + 2] = list(ph)
        out.append(LabeledExample(label, " ".join(words)))
    return out


# Acceptance verdict lines collected by tests/test_acceptance.py; echoed in
# the terminal summary so they survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
