"""Named, independent random streams derived from a single run seed.

Every source of randomness in a run (per-walk moves, per-node gradient
batches, per-actor clocks, data generation) pulls from its own stream so
components are reproducible in isolation and never share generator state.
"""

import zlib

import numpy as np


def _encode(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode())


def seed_sequence(seed: int, *labels) -> np.random.SeedSequence:
    """Seed material for the sub-stream named by ``labels`` under ``seed``."""
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return np.random.SeedSequence([int(seed)] + [_encode(x) for x in labels])


def substream(seed: int, *labels) -> np.random.Generator:
    """Independent generator for the sub-stream named by ``labels``."""
    return np.random.default_rng(seed_sequence(seed, *labels))
