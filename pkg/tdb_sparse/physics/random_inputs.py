"""Seeded, splittable random inputs for the ensembles."""

import numpy as np

# independent streams derived from one run seed
BURGERS_STREAM = 0
DIFFUSION_STREAM = 1
NS2D_STREAM = 2


def generator(seed: int, stream: int) -> np.random.Generator:
    """Counter-based Philox generator for one named stream of a run seed."""
    sequence = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(sequence))


def standard_normal(seed: int, stream: int, d: int, s: int) -> np.ndarray:
    """Matrix ξ (d×s) of independent standard normal draws, one column per sample."""
    return generator(seed, stream).standard_normal((d, s))
