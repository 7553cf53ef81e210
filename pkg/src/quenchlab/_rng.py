"""Deterministic seed splitting.

Replica ``i`` of an experiment seeded with ``seed`` always draws from
``SeedSequence(seed, spawn_key=(i,))``, independent of batch layout or
completion order.
"""
import secrets

import numpy as np


def resolve_seed(seed=None):
    """Return ``seed`` or a fresh 63-bit seed when it is None."""
    if seed is None:
        return secrets.randbits(63)
    return int(seed)


def replica_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def replica_rngs(seed, start, stop):
    return [replica_rng(seed, i) for i in range(start, stop)]


def uniform_block(rngs, size):
    """Stack ``size`` uniforms per generator into a (len(rngs), size) array."""
    out = np.empty((len(rngs), size))
    for r, rng in enumerate(rngs):
        out[r] = rng.random(size)
    return out
