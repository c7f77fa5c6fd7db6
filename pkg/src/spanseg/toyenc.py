"""Deterministic stand-in for a contextual encoder, plus binary embedding I/O.

Word vectors come from splitmix64 hashing of the word bytes, so the same
(words, config) pair gives byte-identical matrices on any platform.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import EmptySentenceError, FileLengthError, FormatError
from .rng import GOLDEN, MASK64, hash_bytes, mix64

MAGIC = b"SPFE"
VERSION = 1
_CLS_KEY = "[CLS]"  # uppercase, cannot collide with normalized (lowercase) words


@dataclass(frozen=True)
class ToyEncoderConfig:
    d: int = 32
    seed: int = 42
    context_mix: float = 0.5

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if not (0.0 <= self.context_mix < 1.0):
            raise ValueError("context_mix must be in [0, 1)")


def _word_vector(word: str, seed: int, d: int) -> np.ndarray:
    """Counter-mode expansion of a word hash into d values in (-1, 1)."""
    h = hash_bytes(word.encode("utf-8"), seed)
    vals = np.empty(d)
    for j in range(d):
        z = mix64((h + (j + 1) * GOLDEN) & MASK64)
        vals[j] = 2.0 * ((z >> 11) * 2.0**-53) - 1.0
    return vals


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        v = v.copy()
        v[0] = 1.0
        return v
    return v / n


def toy_encode(words, config: ToyEncoderConfig) -> np.ndarray:
    """Return an (n+1, d) matrix: row 0 a fixed seed-derived special-token
    vector, then one mildly contextualized unit vector per word."""
    words = list(words)
    if not words:
        raise EmptySentenceError("toy_encode requires at least one word")
    d = config.d
    e = np.stack([_unit(_word_vector(w, config.seed, d)) for w in words])
    n = len(words)
    t = np.empty_like(e)
    for i in range(n):
        left = e[i - 1] if i > 0 else 0.0
        right = e[i + 1] if i < n - 1 else 0.0
        t[i] = _unit(e[i] + config.context_mix * (left + right))
    cls = _unit(_word_vector(_CLS_KEY, config.seed, d))
    return np.vstack([cls[None, :], t])


# ---------------------------------------------------------------------------
# binary embedding container


def write_embeddings(matrices, path, d: int | None = None) -> None:
    """Write per-sentence float32 matrices; layout documented in read_embeddings."""
    mats = [np.ascontiguousarray(m, dtype=np.float32) for m in matrices]
    if d is None:
        d = mats[0].shape[1] if mats else 0
    for m in mats:
        if m.ndim != 2 or m.shape[1] != d:
            raise FormatError(f"all matrices must be (m, {d})")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", MAGIC, VERSION, d, len(mats)))
        for m in mats:
            fh.write(struct.pack("<I", m.shape[0]))
            fh.write(m.tobytes())


def read_embeddings(path) -> list[np.ndarray]:
    """Read the SPFE container: magic, u32 version, u32 d, u32 count, then per
    sentence u32 m and m*d little-endian float32 values row-major."""
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16:
            raise FileLengthError("file too short for header")
        magic, version, d, count = struct.unpack("<4sIII", head)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise FormatError(f"unsupported version {version}, expected {VERSION}")
        out = []
        for _ in range(count):
            mhdr = fh.read(4)
            if len(mhdr) < 4:
                raise FileLengthError("truncated sentence header")
            (m,) = struct.unpack("<I", mhdr)
            body = fh.read(4 * m * d)
            if len(body) < 4 * m * d:
                raise FileLengthError("truncated sentence body")
            out.append(np.frombuffer(body, dtype="<f4").reshape(m, d).copy())
    return out
