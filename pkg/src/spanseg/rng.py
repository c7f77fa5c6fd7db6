"""splitmix64 generator, fixed so golden files reproduce across platforms."""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 output function (Steele et al. finalizer)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


class SplitMix64:
    """Deterministic 64-bit stream; same seed gives the same stream everywhere."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def next_below(self, n: int) -> int:
        """Uniform-ish integer in [0, n). Modulo bias is negligible for small n."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def next_unit(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53


def hash_bytes(data: bytes, seed: int) -> int:
    """Fold bytes through the splitmix64 finalizer, starting from seed."""
    h = seed & MASK64
    for b in data:
        h = mix64(h ^ b)
    return h
