"""Quality measures: per-point/averaged silhouette and medoid silhouette.

Two families live here.  The classical silhouette width contrasts a point's
mean distance to its own cluster with the nearest other cluster and needs
O(n²) work.  The medoid silhouette replaces the two means with distances to
the two nearest medoids, ``1 - d1/d2``, and is O(k) per point; its average
over all points is the objective the optimizers in :mod:`medsil.optim`
maximize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._cache import Caches, compute_caches
from .dissim import DissimilarityProvider, from_matrix

__all__ = [
    "MedoidSilhouetteBreakdown",
    "SilhouetteBreakdown",
    "safe_ratio",
    "eval_medoid_silhouette",
    "eval_full_silhouette",
    "labels_from_medoids",
    "richness_witness",
    "validate_medoids",
]


def safe_ratio(a: float, b: float) -> float:
    """Ratio ``a / b`` with the degenerate case pinned to 0.

    Every call site in this package guarantees ``a <= b``, so ``b == 0``
    implies ``a == 0`` and the only special case is 0/0, which returns 0.
    Applied to the two nearest-medoid distances this makes a point sitting
    on two coincident medoids score a full ``1 - 0 = 1``.
    """
    return 0.0 if a == 0.0 else a / b


def _safe_ratio_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    nz = a != 0.0
    np.divide(a, b, out=out, where=nz)
    return out


def validate_medoids(n: int, medoids, k_min: int = 2) -> np.ndarray:
    """Normalize a medoid index collection to a validated int64 array."""
    med = np.asarray(list(medoids) if not isinstance(medoids, np.ndarray)
                     else medoids, dtype=np.int64).ravel()
    k = med.shape[0]
    if k < k_min:
        raise ValueError(f"need at least {k_min} medoids, got {k}")
    if k > n:
        raise ValueError(f"more medoids ({k}) than points ({n})")
    if med.size and (med.min() < 0 or med.max() >= n):
        raise ValueError(f"medoid index out of range for n={n}")
    if len(set(med.tolist())) != k:
        raise ValueError("medoid indices must be distinct")
    return med


@dataclass
class MedoidSilhouetteBreakdown:
    """Per-point medoid silhouettes, their mean, and the distance caches."""

    per_point: np.ndarray
    average: float
    caches: Caches


@dataclass
class SilhouetteBreakdown:
    """Classical silhouette decomposition.

    ``a`` is the mean distance to the *other* members of the point's own
    cluster (0 for singletons, whose silhouette is 0 by convention), ``b``
    the smallest mean distance to another cluster.
    """

    per_point: np.ndarray
    a: np.ndarray
    b: np.ndarray
    average: float


def eval_medoid_silhouette(p: DissimilarityProvider,
                           medoids) -> MedoidSilhouetteBreakdown:
    """Evaluate ``1 - d1/d2`` per point for a fixed medoid set.

    ``d1``/``d2`` are the distances to the nearest and second-nearest
    medoid, with ties going to the lower medoid position.  The average is
    an exactly-rounded mean (``math.fsum``), so permuting the points never
    changes it.  O(nk).
    """
    med = validate_medoids(p.n, medoids)
    caches = compute_caches(p.matrix(), med)
    per_point = 1.0 - _safe_ratio_array(caches.d1, caches.d2)
    average = math.fsum(per_point) / p.n
    return MedoidSilhouetteBreakdown(per_point=per_point, average=average,
                                     caches=caches)


def eval_full_silhouette(p: DissimilarityProvider, labels) -> SilhouetteBreakdown:
    """Evaluate the classical silhouette width for an arbitrary labeling.

    Labels may be any hashable values; they are factorized internally.
    Requires at least two distinct labels.  O(n²).
    """
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.shape[0] != p.n:
        raise ValueError(f"labels must be a length-{p.n} sequence")
    _, inv = np.unique(lab, return_inverse=True)
    n_clusters = int(inv.max()) + 1
    if n_clusters < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    m = p.matrix()
    n = p.n
    sizes = np.bincount(inv, minlength=n_clusters)
    sums = np.empty((n, n_clusters), dtype=np.float64)
    for c in range(n_clusters):
        sums[:, c] = m[:, inv == c].sum(axis=1)
    idx = np.arange(n)
    own = inv
    singleton = sizes[own] == 1
    with np.errstate(invalid="ignore", divide="ignore"):
        a = sums[idx, own] / (sizes[own] - 1)
    a[singleton] = 0.0
    inter = sums / sizes[None, :]
    inter[idx, own] = np.inf
    b = inter.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0.0, (b - a) / denom, 0.0)
    s[singleton] = 0.0
    average = math.fsum(s) / n
    return SilhouetteBreakdown(per_point=s, a=a, b=b, average=average)


def labels_from_medoids(p: DissimilarityProvider, medoids) -> np.ndarray:
    """Assign each point the position of its nearest medoid.

    Ties go to the lower medoid position (``argmin`` keeps the first
    minimum), so labels are dense integers ``0..k-1`` in medoid order.
    """
    med = validate_medoids(p.n, medoids)
    return np.argmin(p.matrix()[:, med], axis=1).astype(np.int64)


def richness_witness(n: int, medoids) -> DissimilarityProvider:
    """Distance construction whose unique optimal medoid set is ``medoids``.

    All pairs are at distance 1 except that the first medoid is at distance
    0 from every non-medoid (and every self-distance is 0).  Evaluating the
    medoid silhouette at ``medoids`` yields exactly 1; every other medoid
    set of the same size scores strictly less.
    """
    med = validate_medoids(n, medoids)
    if med.shape[0] >= n:
        raise ValueError("witness needs at least one non-medoid point")
    m = np.ones((n, n), dtype=np.float64)
    np.fill_diagonal(m, 0.0)
    m1 = med[0]
    non = np.setdiff1d(np.arange(n), med)
    m[m1, non] = 0.0
    m[non, m1] = 0.0
    return from_matrix(m, copy=False)
