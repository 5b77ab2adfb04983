"""Seed derivation for reproducible runs.

Every scenario run owns a root seed; trial t always draws from the stream
derived as (seed, trial index), so batches give identical results no matter
how trials are scheduled.
"""

import numpy as np


def root_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
