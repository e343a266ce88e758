"""Seed handling.

Every random choice in the package comes from numpy's ``PCG64`` bit generator.
A run has one integer seed; sub-operations get independent streams through
:func:`derive_seed`, which hashes the parent seed together with a tuple of
labels (SHA-256, first 8 bytes, little endian).  Streams therefore depend only
on ``(seed, labels)`` and not on the order in which they are requested.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *labels: object) -> int:
    payload = repr((int(seed) & MASK64, labels)).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def make_rng(seed: int, *labels: object) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *labels)))
