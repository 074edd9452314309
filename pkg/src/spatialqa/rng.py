"""Platform-stable seeded randomness for reproducible dataset builds.

Shuffles and draws go through a small self-contained splitmix64 stream
rather than the interpreter's RNG, so byte-level reproducibility does not
depend on interpreter internals, and every (scene, task) pair can derive
its own independent stream.
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SeededRng:
    """splitmix64 stream with just the sampling helpers the pipeline needs."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        # modulo bias over 64 bits is < 2**-50 for any n used here
        return self.next_u64() % n

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, items):
        return items[self.randrange(len(items))]

    def sample(self, items, k: int) -> list:
        pool = list(items)
        if k > len(pool):
            raise ValueError("sample larger than population")
        return [pool.pop(self.randrange(len(pool))) for _ in range(k)]


def derive_seed(seed: int, *labels) -> int:
    """Child seed for an independent stream keyed by string-able labels."""
    key = "/".join(str(x) for x in labels).encode("utf-8")
    digest = hashlib.blake2b(key, digest_size=8).digest()
    return _mix((seed & _MASK64) ^ int.from_bytes(digest, "big"))


def rng_for(seed: int, *labels) -> SeededRng:
    return SeededRng(derive_seed(seed, *labels))
