"""Named random streams.

Every stream is a Philox4x64 counter-based generator keyed by a root seed and
a tuple of integers (e.g. bag index and role). Streams never share state, so
results do not depend on the order in which they are drawn.
"""

from __future__ import annotations

import zlib

import numpy as np

RNG_NAME = "philox4x64-seedsequence-v1"


def name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for a child task."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
