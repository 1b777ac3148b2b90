"""Shared helpers for the test suite."""

import numpy as np

from lsefit import GposModel, LseModel


def random_lse(rng, n_terms, dim, temperature=1.0, scale=1.0):
    return LseModel(
        temperature,
        scale * rng.standard_normal((n_terms, dim)),
        scale * rng.standard_normal(n_terms),
    )


def random_gpos(rng, n_terms, dim, temperature=1.0):
    return GposModel(
        temperature,
        rng.uniform(0.2, 3.0, n_terms),
        rng.uniform(-2.0, 2.0, (n_terms, dim)),
    )


def rel_dev(a, b):
    """Deviation relative to the larger magnitude, floored at 1."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
