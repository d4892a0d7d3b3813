"""Random streams.

All randomness goes through numpy's Philox-4x64 counter-based generator seeded
by a ``SeedSequence``. Child streams come from ``SeedSequence.spawn``, so a
run can be replicated anywhere the same (seed, spawn path) is used.
"""

import numpy as np


def make_rng(seed=0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def spawn(seed, count: int) -> list:
    """Independent child generators derived from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]
