import random

import numpy as np


def fix_random_seeds(seed):
    """Manually set the seed of the global random number generators.
    The generators in `src.synthesis` draw from their own seeded generators; this
    only pins the global state for anything else run in the same process.
    """
    np.random.seed(seed)
    random.seed(seed)


def make_rng(seed):
    """Return an independent NumPy generator; equal seeds give identical streams."""
    return np.random.default_rng(seed)


def set_printoptions(precision, sci_mode):
    np.set_printoptions(precision=precision, suppress=not sci_mode)
