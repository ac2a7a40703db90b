"""Counter-based random streams keyed by ``(seed, tag, index, ...)``.

Each stream is a Philox-4x64 generator whose key comes from a
``SeedSequence`` built from the seed and a spawn key. Streams for different
keys are independent, and a stream depends only on its key, never on how
work was scheduled.
"""

import zlib

import numpy as np

from .exceptions import ContractError

MAX_SEED = (1 << 64) - 1


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ContractError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ContractError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _key_part(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    part = int(part)
    if part < 0:
        raise ContractError(f"stream key parts must be nonnegative, got {part}")
    return part


def stream(seed, *key):
    """Generator for the stream named by ``key`` under ``seed``."""
    seq = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(_key_part(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed_or_rng, *key):
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return stream(seed_or_rng, *key)
