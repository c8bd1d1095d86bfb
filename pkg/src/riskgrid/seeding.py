"""Deterministic stream derivation used everywhere randomness appears.

Two schemes, each documented here once:

* **Counter-mode SplitMix64** for the tree-building kernels. A 64-bit
  state is derived per tree and per node purely from (seed, index), so
  forests come out bit-identical no matter how training is scheduled
  across threads, and the compiled and pure-Python kernels agree exactly.
* **numpy SeedSequence spawning** for data-level sampling (synthetic
  generation, fold shuffling, negative downsampling), keyed by small
  integer tags so each consumer owns an independent stream.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit mixing function."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_root(seed: int) -> int:
    """Root 64-bit state for a user-facing seed."""
    return mix64(seed & MASK64)


def child_state(state: int, k: int) -> int:
    """Independent child state #k of a parent state."""
    return mix64((state ^ (((k + 1) * GOLDEN) & MASK64)) & MASK64)


def next_u64(state: int) -> tuple[int, int]:
    """One SplitMix64 draw: returns (value, advanced_state)."""
    state = (state + GOLDEN) & MASK64
    return mix64(state), state


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` on a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


def sample_with_replacement(state: int, n: int, size: int) -> np.ndarray:
    """``size`` indices in [0, n) from the SplitMix64 stream at ``state``.

    Matches a scalar loop of ``next_u64(state) % n`` draws; vectorized here
    because counter-mode states are just ``state + k * GOLDEN``.
    """
    ks = np.arange(1, size + 1, dtype=np.uint64)
    states = np.uint64(state) + ks * np.uint64(GOLDEN)
    return (mix64_array(states) % np.uint64(n)).astype(np.intp)


def draw_distinct(state: int, n: int, k: int) -> list[int]:
    """k distinct indices from [0, n), ascending (partial Fisher-Yates)."""
    arr = list(range(n))
    for i in range(k):
        v, state = next_u64(state)
        j = i + v % (n - i)
        arr[i], arr[j] = arr[j], arr[i]
    return sorted(arr[:k])


def child_seed(seed: int, *path: int) -> int:
    """A plain integer seed derived from (seed, path) via the mixing chain."""
    s = stream_root(seed)
    for p in path:
        s = child_state(s, p)
    return s


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """A numpy Generator on an independent SeedSequence stream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed & MASK64, spawn_key=tuple(key))))
