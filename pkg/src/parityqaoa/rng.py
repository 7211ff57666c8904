"""Reproducible random streams.

Every generator is a numpy ``Philox`` (counter-based, 64-bit keyed) seeded
through a ``SeedSequence`` whose spawn key names the purpose of the stream,
so instance weights, optimizer proposals and measurement shots never share
draws and a given seed reproduces on every platform.
"""

from __future__ import annotations

import numpy as np

STREAM_INSTANCE = 0
STREAM_OPTIMIZER = 1
STREAM_SHOTS = 2
STREAM_RQAOA = 3


def generator(seed: int, stream: int, *sub: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(stream, *sub))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed: int, stream: int, *sub: int) -> int:
    """A derived 63-bit seed, for handing to another component."""
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(stream, *sub))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
