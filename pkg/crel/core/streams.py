"""
Counter-based random streams.

Every replication, cell and chain draws from its own Philox stream keyed by
(master seed, *keys), so results do not depend on worker count or completion
order.
"""

from typing import Optional

import numpy as np

from .config import settings


def resolve_seed(seed: Optional[int]) -> int:
    """Explicit seed, else CREL_SEED, else 0."""
    if seed is not None:
        return int(seed)
    if settings.SEED is not None:
        return int(settings.SEED)
    return 0


def derive_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """
    Independent generator for the stream named by ``keys``.

    Args:
        master_seed: Non-negative master seed
        keys: Non-negative integers naming the stream (replication, cell, purpose)

    Returns:
        numpy Generator on a Philox bit generator
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(master_seed: int, *keys: int) -> int:
    """Integer seed for components that take a seed rather than a generator."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint32)[0])
