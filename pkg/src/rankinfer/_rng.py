"""Counter-based random streams keyed by (seed, block index).

Every stream is a Philox generator whose key is the 64-bit seed and whose
counter starts at ``block << 192``, so blocks never overlap and can be
generated in any order or on any worker with identical results.
"""

from __future__ import annotations

import hashlib
import os
import struct

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(*parts: object) -> int:
    """Hash an arbitrary tuple of labels/integers into a 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        token = repr(part).encode()
        h.update(struct.pack("<I", len(token)))
        h.update(token)
    return int.from_bytes(h.digest(), "little")


def stream(seed: int, block: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & MASK64, counter=block << 192))


def max_workers(requested: int | None = None) -> int:
    """Worker count honoring the ``RANKINFER_THREADS`` cap."""
    cap = os.environ.get("RANKINFER_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)
