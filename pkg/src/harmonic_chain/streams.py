"""Counter-based random streams keyed by ``(seed, index)``.

Each trajectory (or independent draw) gets its own Philox stream, so results
do not depend on how work is split into chunks or threads.
"""
from __future__ import annotations

import numpy as np

TRAJECTORY = 0
STATIONARY_DRAW = 1

_MASK = (1 << 64) - 1


def stream(seed: int, index: int, purpose: int = TRAJECTORY) -> np.random.Generator:
    key = np.array([seed & _MASK, index & _MASK], dtype=np.uint64)
    counter = np.array([0, 0, 0, purpose], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def normals(seed: int, indices, size: int, purpose: int = TRAJECTORY) -> np.ndarray:
    """Standard normals, one row of length ``size`` per index."""
    return np.stack([stream(seed, int(i), purpose).standard_normal(size)
                     for i in indices])
