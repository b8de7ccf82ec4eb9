"""Deterministic seeding helpers.

Stochastic components draw from counter-based Philox streams keyed by a
root seed plus an integer path. Because every stream is addressed rather
than advanced, results are identical whether consumers run sequentially
or in parallel.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One round of the SplitMix64 mixing function (returns a 64-bit int)."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, *path: int) -> int:
    """Derive a child seed from a root seed and an integer path.

    The same (seed, path) always yields the same child; distinct paths
    yield independent-looking children. Used to give every pipeline
    stage and every sweep cell its own reproducible stream.
    """
    acc = splitmix64(seed & _MASK64)
    for part in path:
        acc = splitmix64(acc ^ (part & _MASK64))
    return acc


def substream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator addressed by (seed, path) coordinates."""
    key = np.array([seed & _MASK64, mix_seed(seed, *path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
