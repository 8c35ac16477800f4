"""Deterministic counter-based random number generation.

Every random decision in this package (lesion geometry, artifact placement,
weight init, augmentation draws, split sampling) flows through the SplitMix64
mixing function below, evaluated on explicit 64-bit counters. There is no
hidden global state, so identical seeds give bit-identical results on every
platform and the per-sample / per-epoch streams can be derived independently.

Reference constants (Steele, Lea & Flood's SplitMix64, public domain):
    increment  0x9E3779B97F4A7C15
    mix mul 1  0xBF58476D1CE4E5B9
    mix mul 2  0x94D049BB133111EB
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

_U64_MASK = (1 << 64) - 1


def _mix_u64(z: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """SplitMix64 finalizer: bijective avalanche mix of a 64-bit word.

    uint64 arithmetic wraps by design here.
    """
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def mix64(*values: int) -> int:
    """Fold integers into one well-mixed 64-bit value.

    Used to derive independent child seeds, e.g. ``mix64(base_seed, index)``.
    Order matters: mix64(a, b) != mix64(b, a) in general.
    """
    h = np.uint64(0x5851F42D4C957F2D)
    with np.errstate(over="ignore"):
        for v in values:
            h = _mix_u64(h ^ np.uint64(v & _U64_MASK))
            h = h * _GOLDEN + _GOLDEN
        return int(_mix_u64(h))


def fnv1a64(text: str) -> int:
    """FNV-1a hash of a string; stable across runs (unlike builtin hash)."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _U64_MASK
    return h


class Rng:
    """SplitMix64 stream: output[i] = mix(seed + (i + 1) * GOLDEN).

    Counter-based, so scalar draws and vectorized blocks come from the same
    sequence and any position can be computed independently.
    """

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & _U64_MASK)
        self._counter = 0

    @property
    def seed(self) -> int:
        return int(self._seed)

    def _raw_block(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            return _mix_u64(self._seed + idx * _GOLDEN)

    def next_u64(self) -> int:
        return int(self._raw_block(1)[0])

    def random(self) -> float:
        """Uniform float64 in [0, 1) with 53 random bits."""
        return float(self._raw_block(1)[0] >> np.uint64(11)) * 2.0**-53

    def random_block(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        block = (self._raw_block(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return block.reshape(shape)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def uniform_block(self, shape, lo: float, hi: float) -> np.ndarray:
        return lo + (hi - lo) * self.random_block(shape)

    def randint(self, n: int) -> int:
        """Integer in [0, n). Bias is O(n / 2^53): negligible for desk-scale n."""
        if n <= 0:
            raise ValueError("randint() needs n >= 1")
        return min(int(self.random() * n), n - 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> np.ndarray:
        idx = list(range(n))
        self.shuffle(idx)
        return np.asarray(idx, dtype=np.int64)

    def sample(self, items: list, k: int) -> list:
        """k distinct items, sampled without replacement."""
        if k > len(items):
            raise ValueError(f"cannot sample {k} of {len(items)} items")
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]
