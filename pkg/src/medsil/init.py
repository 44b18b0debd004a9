"""Initial medoid selection: greedy BUILD and uniform random.

Randomness is always drawn from numpy's default PCG64 generator so that a
seed fully determines the result on every platform.
"""

from __future__ import annotations

import numpy as np

from ._kernels import build_init_kernel
from .dissim import DissimilarityProvider

__all__ = ["Rng", "make_rng", "build_init", "random_init"]

#: The portable generator type used everywhere randomness is needed.
Rng = np.random.Generator


def make_rng(seed: int | Rng | None) -> Rng:
    """Coerce a seed (or pass through a generator) into an :data:`Rng`.

    The generator is numpy's PCG64; identical seeds produce identical
    streams on all platforms.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_k(n: int, k: int) -> None:
    if not 2 <= k < n:
        raise ValueError(f"k must satisfy 2 <= k < n (got k={k}, n={n})")


def build_init(p: DissimilarityProvider, k: int) -> np.ndarray:
    """Greedy BUILD: pick medoids one by one to minimize total deviation.

    The first medoid minimizes the sum of distances to all points; each
    later medoid maximizes the reduction of the sum of nearest-medoid
    distances.  Ties are broken by the lowest point index.  O(n²k).
    """
    _check_k(p.n, k)
    out = np.empty(k, dtype=np.int64)
    build_init_kernel(p.matrix(), k, out)
    return out


def random_init(n: int, k: int, rng: int | Rng | None = None) -> np.ndarray:
    """Draw k distinct indices uniformly without replacement."""
    _check_k(n, k)
    gen = make_rng(rng)
    return np.sort(gen.choice(n, size=k, replace=False)).astype(np.int64)
