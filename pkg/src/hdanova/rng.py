"""Splittable random streams.

Every random quantity is drawn from a stream addressed by a root seed plus a
tuple of integer keys, e.g. ``(replicate, STREAM_BOOT, u, k)``.  Streams are
derived with :class:`numpy.random.SeedSequence` spawn keys, so the value drawn
for a given address does not depend on execution order or on how work is
split between processes.
"""

from __future__ import annotations

import numpy as np

# Stream tags; keep them stable, they are part of the reproducibility contract.
STREAM_DATA = 0
STREAM_MEAN = 1
STREAM_BOOT = 2

SeedLike = int | np.random.SeedSequence


def as_seed_sequence(seed: SeedLike | None) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if seed is None:
        return np.random.SeedSequence()
    if int(seed) < 0:
        raise ValueError("seed must be non-negative")
    return np.random.SeedSequence(int(seed))


def child(seed: SeedLike | None, *key: int) -> np.random.SeedSequence:
    """Return the seed sequence at address ``key`` below ``seed``."""
    root = as_seed_sequence(seed)
    return np.random.SeedSequence(
        entropy=root.entropy,
        spawn_key=tuple(root.spawn_key) + tuple(int(k) for k in key),
        pool_size=root.pool_size,
    )


def substream(seed: SeedLike | None, *key: int) -> np.random.Generator:
    return np.random.default_rng(child(seed, *key))
