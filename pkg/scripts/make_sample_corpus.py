"""Regenerate src/spanseg/data/sample_1k.txt (committed artifact).

1,000 synthetic English-like sentences with recurring collocations so that a
frequency dictionary built from the sample produces non-trivial spans.
"""

import random
from pathlib import Path

WORDS = (
    "the a an old new big small red blue green quick slow happy quiet "
    "dog cat bird fish house tree river city town road light night day "
    "market school garden window door table chair paper stone water fire "
    "man woman child friend teacher doctor driver singer writer player "
    "runs walks jumps sleeps reads writes sings plays opens closes finds "
    "sees hears makes takes gives keeps holds moves turns stops starts "
    "in on at by near under over with without before after during "
    "and or but so yet very quite rather almost always never often "
    "morning evening winter summer spring autumn north south east west"
).split()

COLLOCATIONS = [
    "new york", "new york city", "united states", "high school",
    "every single day", "in the morning", "at the same time", "more or less",
    "the old man", "a long time", "side by side", "one by one",
    "step by step", "day after day", "the quick brown fox", "point of view",
    "state of the art", "as a matter of fact", "by the way", "all of a sudden",
]


def main() -> None:
    rng = random.Random(20240817)
    lines = []
    for _ in range(1000):
        n = rng.randint(5, 15)
        toks: list[str] = []
        while len(toks) < n:
            if rng.random() < 0.35:
                toks.extend(rng.choice(COLLOCATIONS).split())
            else:
                toks.append(rng.choice(WORDS))
        lines.append(" ".join(toks[: max(n, len(toks))]))
    out = Path(__file__).resolve().parents[1] / "src" / "spanseg" / "data" / "sample_1k.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({len(lines)} sentences)")


if __name__ == "__main__":
    main()
