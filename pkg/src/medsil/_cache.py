"""Nearest-medoid cache structures shared by the evaluators and optimizers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import update_caches_kernel

__all__ = ["PointCache", "Caches", "compute_caches"]


@dataclass(frozen=True)
class PointCache:
    """Per-point view of the three nearest medoids.

    ``n1``/``n2`` are positions into the medoid list (not point indices) of
    the nearest and second-nearest medoid; ``d1 <= d2 <= d3`` are the
    distances to the nearest, second- and third-nearest medoid.  ``d3`` is
    ``+inf`` when fewer than three medoids exist.
    """

    n1: int
    n2: int
    d1: float
    d2: float
    d3: float


class Caches:
    """Sequence of :class:`PointCache` stored as parallel arrays."""

    __slots__ = ("n1", "n2", "d1", "d2", "d3")

    def __init__(self, n1: np.ndarray, n2: np.ndarray,
                 d1: np.ndarray, d2: np.ndarray, d3: np.ndarray):
        self.n1 = n1
        self.n2 = n2
        self.d1 = d1
        self.d2 = d2
        self.d3 = d3

    def __len__(self) -> int:
        return self.n1.shape[0]

    def point(self, o: int) -> PointCache:
        return PointCache(int(self.n1[o]), int(self.n2[o]),
                          float(self.d1[o]), float(self.d2[o]),
                          float(self.d3[o]))

    def __getitem__(self, o: int) -> PointCache:
        if not 0 <= o < len(self):
            raise IndexError(o)
        return self.point(o)

    def __iter__(self):
        return (self.point(o) for o in range(len(self)))

    def copy(self) -> "Caches":
        return Caches(self.n1.copy(), self.n2.copy(),
                      self.d1.copy(), self.d2.copy(), self.d3.copy())


def compute_caches(dist: np.ndarray, medoids: np.ndarray) -> Caches:
    """Compute all point caches for ``medoids`` over a full distance matrix.

    Ties among equal distances go to the lower medoid position.  O(nk).
    """
    n = dist.shape[0]
    n1 = np.empty(n, dtype=np.int64)
    n2 = np.empty(n, dtype=np.int64)
    d1 = np.empty(n, dtype=np.float64)
    d2 = np.empty(n, dtype=np.float64)
    d3 = np.empty(n, dtype=np.float64)
    update_caches_kernel(dist, medoids, n1, n2, d1, d2, d3)
    return Caches(n1, n2, d1, d2, d3)
