"""
Seeded random streams and the seed-splitting rule.
"""

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(master: int, index: int) -> int:
    """
    Derive an independent 64-bit seed for stream ``index``.

    The rule is ``master XOR blake2b-64(index)``, so child seeds depend only on
    the master seed and the index, never on scheduling order.

    Args:
        master: Master seed in [0, 2**64)
        index: Non-negative stream index (chain number, repeat, cell hash)

    Returns:
        Child seed in [0, 2**64)
    """
    if index < 0:
        raise ValueError("stream index must be non-negative")
    payload = (index & SEED_MASK).to_bytes(8, "little") + (index >> 64).to_bytes(8, "little")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return (master ^ int.from_bytes(digest, "little")) & SEED_MASK


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed."""
    return np.random.default_rng(seed)
