"""Deterministic RNG substreams.

Every random draw in the simulator comes from a generator keyed by an
integer path, so geometry, shadowing and each Monte-Carlo trial get
independent streams that do not depend on execution order or thread count.
"""

import numpy as np

# stream tags (first path element after the seed)
GEOMETRY = 0
TRIALS = 1


def substream(*path):
    """Generator for the integer key path, e.g. (seed, TRIALS, setup, trial)."""
    entropy = tuple(int(x) for x in path)
    return np.random.default_rng(np.random.SeedSequence(entropy))


def crandn(rng, shape):
    """Standard circularly-symmetric complex Gaussian, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)
