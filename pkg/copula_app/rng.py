"""Seeded random streams.

A stream is a numpy PCG64 generator keyed by a 64-bit seed plus a path of
non-negative integers (the SeedSequence spawn key). Distinct paths give
statistically independent streams, so bootstrap iteration k can always use
stream(seed, k) regardless of which thread runs it.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0 or seed > SEED_MASK:
        raise ValueError(f"Seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (seed, path...)."""
    seq = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(seed: int, *path: int) -> int:
    """A new 64-bit seed derived from (seed, path...), for handing to sub-studies."""
    seq = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
