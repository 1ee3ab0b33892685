"""Named random streams derived from one integer seed.

Every consumer asks for a stream by name, so adding a new consumer never
reshuffles the draws of an existing one. Streams use the counter-based
Philox generator keyed by ``(seed, crc32(name), ...)``.
"""

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def stream(seed: int, *names) -> np.random.Generator:
    """Return an independent generator for the stream ``names`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(n) for n in names))
    return np.random.Generator(np.random.Philox(ss))
