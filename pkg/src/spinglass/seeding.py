"""Deterministic seed derivation and RNG construction.

All randomness in the package flows from a 64-bit master seed through
SHA-256 label hashing into Philox (counter-based) bit generators.  Each
(master_seed, label path) pair owns an independent stream, so adding new
tasks to an experiment never perturbs the streams of existing ones, and
the mapping seed -> stream is reproducible across platforms.
"""

import hashlib

import numpy as np

MAX_SEED = 2**64 - 1


def derive_key(master_seed, *labels):
    """Derive a 128-bit Philox key from a master seed and a label path.

    The key is the first 16 bytes (little-endian) of
    SHA-256(b"spinglass" + seed_le64 + "/label" for each label).
    """
    seed = int(master_seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"master seed must be a u64, got {master_seed}")
    h = hashlib.sha256()
    h.update(b"spinglass")
    h.update(seed.to_bytes(8, "little"))
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:16], "little")


def rng_from(master_seed, *labels) -> np.random.Generator:
    """Philox generator owned by the given (master_seed, label path)."""
    return np.random.Generator(np.random.Philox(key=derive_key(master_seed, *labels)))


def as_path(seed):
    """Normalize a seed spec: an int master seed, or a (master, *labels)
    tuple naming a sub-stream family."""
    if isinstance(seed, (tuple, list)):
        return tuple(seed)
    return (seed,)
