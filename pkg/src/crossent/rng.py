"""Deterministic seed derivation and random-generator construction.

All sampling in the package goes through ``make_generator`` (a counter-based
Philox generator) so that identical seeds give identical streams within this
implementation. Per-trial seeds come from ``derive_seed``, the SplitMix64
output sequence started at the base seed.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One SplitMix64 mixing step of a 64-bit state."""
    z = state & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(base_seed: int, index: int) -> int:
    """The ``index``-th output of the SplitMix64 stream seeded at ``base_seed``."""
    if index < 0:
        raise ValueError("index must be nonnegative")
    return splitmix64((base_seed + (index + 1) * _GOLDEN) & _MASK64)


def make_generator(seed: int) -> np.random.Generator:
    """Counter-based generator used for every sampler in the package."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))
