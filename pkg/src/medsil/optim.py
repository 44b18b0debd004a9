"""Swap-based medoid optimizers.

Four local-search variants over the same move set (replace one medoid with
one non-medoid), differing in how candidates are scored and accepted:

``pammedsil_naive``
    Steepest ascent on the average medoid silhouette (AMS); every candidate
    swap is scored by full recomputation.  O(k²(n−k)n) per iteration.
``fastmsc``
    Same ascent, same trajectory, but each candidate is scored in one O(n)
    accumulator pass (removal losses + correction terms), O(n²) per
    iteration.
``fastermsc``
    Eager first-improvement variant of ``fastmsc``: candidates are visited
    round-robin and every improving swap is taken immediately.
``pamsil``
    Steepest ascent on the full silhouette width (ASW); each candidate is
    scored by an O(n²) silhouette evaluation.  Reference quality, small n.

Tie-breaking is fixed everywhere: strict-improvement comparisons (first
encountered best wins), accumulator argmax at the lowest medoid position,
nearest-medoid assignment at the lowest position.  This makes every run
deterministic and makes ``fastmsc`` reproduce ``pammedsil_naive`` exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from ._cache import Caches, PointCache, compute_caches
from .dissim import DissimilarityProvider
from .init import Rng, build_init, random_init
from .silhouette import (eval_medoid_silhouette, labels_from_medoids,
                         safe_ratio, validate_medoids)

__all__ = [
    "PointCache",
    "Caches",
    "ClusterState",
    "AccumulatorBank",
    "ClusteringResult",
    "update_caches",
    "swap_delta_point",
    "removal_loss",
    "accumulate_candidate",
    "find_best_swap_fastmsc",
    "pammedsil_naive",
    "fastmsc",
    "fastermsc",
    "pamsil",
    "warm_kernels",
]


# ---------------------------------------------------------------------------
# state types


@dataclass
class ClusterState:
    """Mutable optimizer state: medoid list, point caches, AMS running sum.

    ``ams_sum`` is kept as the *sum* of per-point values (n times the AMS)
    to avoid repeated division inside the loops.
    """

    medoids: np.ndarray
    caches: Caches
    ams_sum: float

    @classmethod
    def from_medoids(cls, p: DissimilarityProvider, medoids) -> "ClusterState":
        med = validate_medoids(p.n, medoids)
        caches = compute_caches(p.matrix(), med)
        return cls(medoids=med, caches=caches,
                   ams_sum=float(K.ams_sum_kernel(caches.d1, caches.d2)))


@dataclass
class AccumulatorBank:
    """Per-medoid removal/correction accumulators plus the shared addition.

    After a full point pass for candidate ``x``, ``removal[i] + addition``
    equals n times the AMS change of swapping medoid position ``i`` for
    ``x``.
    """

    removal: np.ndarray
    addition: float


@dataclass
class ClusteringResult:
    """Outcome of one optimizer run."""

    medoids: np.ndarray
    labels: np.ndarray
    ams: float
    asw: float | None
    iterations: int
    swaps: int
    wall_time: float
    converged: bool
    #: number of candidate evaluation passes performed (unit depends on the
    #: optimizer: accumulator passes for fastmsc/fastermsc, full
    #: recomputations for the naive variants)
    candidate_passes: int = 0
    #: medoid set after init and after every accepted swap
    #: (only recorded when keep_trajectory=True)
    trajectory: list[np.ndarray] | None = field(default=None, repr=False)


# ---------------------------------------------------------------------------
# cache and delta primitives


def update_caches(p: DissimilarityProvider, medoids) -> Caches:
    """Nearest/second/third medoid distances and positions for every point.

    ``d3`` is ``+inf`` when k < 3; ties go to the lower medoid position.
    """
    med = validate_medoids(p.n, medoids)
    return compute_caches(p.matrix(), med)


def swap_delta_point(c: PointCache, d_oj: float, mi_pos: int) -> float:
    """Change of one point's medoid silhouette when medoid ``mi_pos`` is
    replaced by a candidate at distance ``d_oj`` from the point.

    Three-branch case analysis over whether the replaced medoid is the
    point's nearest, second-nearest, or neither; positive means the swap
    improves this point.
    """
    d1, d2, d3 = c.d1, c.d2, c.d3
    if mi_pos == c.n1:
        if d_oj < d2:
            return safe_ratio(d1, d2) - safe_ratio(d_oj, d2)
        if d_oj < d3:
            return safe_ratio(d1, d2) - safe_ratio(d2, d_oj)
        return safe_ratio(d1, d2) - safe_ratio(d2, d3)
    if mi_pos == c.n2:
        if d_oj < d1:
            return safe_ratio(d1, d2) - safe_ratio(d_oj, d1)
        if d_oj < d3:
            return safe_ratio(d1, d2) - safe_ratio(d1, d_oj)
        return safe_ratio(d1, d2) - safe_ratio(d1, d3)
    if d_oj < d1:
        return safe_ratio(d1, d2) - safe_ratio(d_oj, d1)
    if d_oj < d2:
        return safe_ratio(d1, d2) - safe_ratio(d1, d_oj)
    return 0.0


def _as_caches(caches) -> Caches:
    if isinstance(caches, Caches):
        return caches
    pts = list(caches)
    return Caches(
        np.array([c.n1 for c in pts], dtype=np.int64),
        np.array([c.n2 for c in pts], dtype=np.int64),
        np.array([c.d1 for c in pts], dtype=np.float64),
        np.array([c.d2 for c in pts], dtype=np.float64),
        np.array([c.d3 for c in pts], dtype=np.float64),
    )


def _ratio_arrays(c: Caches) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = len(c)
    r12 = np.empty(n, dtype=np.float64)
    r13 = np.empty(n, dtype=np.float64)
    r23 = np.empty(n, dtype=np.float64)
    K.ratios_kernel(c.d1, c.d2, c.d3, r12, r13, r23)
    return r12, r13, r23


def removal_loss(caches, k: int) -> np.ndarray:
    """AMS-sum change of deleting each medoid without replacement.

    ``removal[i]`` sums ``d1/d2 − d2/d3`` over points whose nearest medoid
    is ``i`` and ``d1/d2 − d1/d3`` over points whose second-nearest is
    ``i`` (safe ratios; the ``d3 = +inf`` sentinel zeroes the second term
    when k = 2).
    """
    c = _as_caches(caches)
    r12, r13, r23 = _ratio_arrays(c)
    out = np.zeros(k, dtype=np.float64)
    K.removal_loss_kernel(c.n1, c.n2, r12, r13, r23, out)
    return out


def accumulate_candidate(p: DissimilarityProvider, state: ClusterState,
                         x: int) -> AccumulatorBank:
    """One full accumulator pass for replacement candidate ``x``."""
    n = p.n
    if not 0 <= x < n:
        raise ValueError(f"candidate index {x} out of range")
    if x in set(state.medoids.tolist()):
        raise ValueError(f"candidate {x} is already a medoid")
    c = state.caches
    k = state.medoids.shape[0]
    r12, r13, r23 = _ratio_arrays(c)
    removal = np.zeros(k, dtype=np.float64)
    K.removal_loss_kernel(c.n1, c.n2, r12, r13, r23, removal)
    acc = np.empty(k, dtype=np.float64)
    add = K.candidate_pass_kernel(p.matrix()[x], c.n1, c.n2, c.d1, c.d2,
                                  c.d3, r12, r13, r23, removal, acc)
    return AccumulatorBank(removal=acc, addition=float(add))


def find_best_swap_fastmsc(p: DissimilarityProvider,
                           state: ClusterState) -> tuple[float, int, int]:
    """Steepest swap via the accumulator scheme.

    Returns ``(delta, mi_pos, x)`` with ``delta`` in AMS-sum units; when no
    candidate strictly improves, returns ``(0.0, -1, -1)``.  Equal to the
    exhaustive steepest swap under the shared tie-break rule.  O(n²).
    """
    c = state.caches
    k = state.medoids.shape[0]
    r12, r13, r23 = _ratio_arrays(c)
    removal = np.zeros(k, dtype=np.float64)
    K.removal_loss_kernel(c.n1, c.n2, r12, r13, r23, removal)
    ismed = np.zeros(p.n, dtype=np.bool_)
    ismed[state.medoids] = True
    delta, bi, bj = K.best_swap_kernel(p.matrix(), ismed, c.n1, c.n2, c.d1,
                                       c.d2, c.d3, r12, r13, r23, removal)
    return float(delta), int(bi), int(bj)


# ---------------------------------------------------------------------------
# shared optimizer plumbing


def _resolve_init(p: DissimilarityProvider, k, medoids, strategy: str,
                  rng: int | Rng | None = None) -> np.ndarray:
    if (k is None) == (medoids is None):
        raise ValueError("provide exactly one of k or medoids")
    if medoids is not None:
        return validate_medoids(p.n, medoids).copy()
    k = int(k)
    if k == p.n:
        return np.arange(p.n, dtype=np.int64)
    if strategy == "build":
        return build_init(p, k)
    return random_init(p.n, k, rng)


def _trivial_result(p: DissimilarityProvider, med: np.ndarray,
                    t0: float) -> ClusteringResult:
    # k = n: every point is its own medoid, AMS is 1 by definition and no
    # swap move exists.
    labels = labels_from_medoids(p, med)
    return ClusteringResult(medoids=med, labels=labels, ams=1.0, asw=None,
                            iterations=0, swaps=0,
                            wall_time=time.perf_counter() - t0,
                            converged=True, candidate_passes=0,
                            trajectory=None)


def _check_max_iter(max_iter: int) -> int:
    max_iter = int(max_iter)
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    return max_iter


def _finalize(p: DissimilarityProvider, med: np.ndarray, iterations: int,
              swaps: int, t0: float, converged: bool, passes: int,
              traj: list[np.ndarray] | None,
              asw: float | None = None) -> ClusteringResult:
    wall = time.perf_counter() - t0
    ams = eval_medoid_silhouette(p, med).average
    labels = labels_from_medoids(p, med)
    return ClusteringResult(medoids=med, labels=labels, ams=ams, asw=asw,
                            iterations=iterations, swaps=swaps,
                            wall_time=wall, converged=converged,
                            candidate_passes=passes, trajectory=traj)


# ---------------------------------------------------------------------------
# optimizers


def pammedsil_naive(p: DissimilarityProvider, k: int | None = None,
                    medoids=None, max_iter: int = 100,
                    keep_trajectory: bool = False) -> ClusteringResult:
    """Steepest AMS ascent with full recomputation per candidate.

    The reference implementation of the objective: every candidate swap is
    scored by recomputing all n medoid silhouettes in O(nk), making one
    iteration O(k²(n−k)n).  Stops at the first iteration whose best
    candidate does not strictly improve the current sum.
    """
    max_iter = _check_max_iter(max_iter)
    dist = p.matrix()
    t0 = time.perf_counter()
    med = _resolve_init(p, k, medoids, "build")
    if med.shape[0] == p.n:
        return _trivial_result(p, med, t0)
    kk = med.shape[0]
    ismed = np.zeros(p.n, dtype=np.bool_)
    ismed[med] = True
    current = K.naive_swap_sum_kernel(dist, med, -1, 0)
    traj = [med.copy()] if keep_trajectory else None
    iterations = swaps = passes = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        passes += kk * (p.n - kk)
        best_sum, bi, bj = K.naive_best_swap_kernel(dist, med, ismed, current)
        if bj < 0:
            converged = True
            break
        ismed[med[bi]] = False
        med[bi] = bj
        ismed[bj] = True
        current = best_sum
        swaps += 1
        if traj is not None:
            traj.append(med.copy())
    return _finalize(p, med, iterations, swaps, t0, converged, passes, traj)


def fastmsc(p: DissimilarityProvider, k: int | None = None, medoids=None,
            max_iter: int = 100,
            keep_trajectory: bool = False) -> ClusteringResult:
    """Steepest AMS ascent with O(n) accumulator scoring per candidate.

    Produces the exact medoid trajectory of :func:`pammedsil_naive` at
    O(n²) per iteration instead of O(k²(n−k)n).
    """
    max_iter = _check_max_iter(max_iter)
    dist = p.matrix()
    t0 = time.perf_counter()
    med = _resolve_init(p, k, medoids, "build")
    n = p.n
    if med.shape[0] == n:
        return _trivial_result(p, med, t0)
    kk = med.shape[0]
    n1 = np.empty(n, dtype=np.int64)
    n2 = np.empty(n, dtype=np.int64)
    d1 = np.empty(n, dtype=np.float64)
    d2 = np.empty(n, dtype=np.float64)
    d3 = np.empty(n, dtype=np.float64)
    r12 = np.empty(n, dtype=np.float64)
    r13 = np.empty(n, dtype=np.float64)
    r23 = np.empty(n, dtype=np.float64)
    removal = np.empty(kk, dtype=np.float64)
    ismed = np.zeros(n, dtype=np.bool_)
    ismed[med] = True
    K._refresh(dist, med, n1, n2, d1, d2, d3, r12, r13, r23, removal)
    traj = [med.copy()] if keep_trajectory else None
    iterations = swaps = passes = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        passes += n - kk
        delta, bi, bj = K.best_swap_kernel(dist, ismed, n1, n2, d1, d2, d3,
                                           r12, r13, r23, removal)
        if bj < 0:
            converged = True
            break
        ismed[med[bi]] = False
        med[bi] = bj
        ismed[bj] = True
        swaps += 1
        K._refresh(dist, med, n1, n2, d1, d2, d3, r12, r13, r23, removal)
        if traj is not None:
            traj.append(med.copy())
    return _finalize(p, med, iterations, swaps, t0, converged, passes, traj)


def fastermsc(p: DissimilarityProvider, k: int | None = None, medoids=None,
              max_iter: int = 100, rng: int | Rng | None = None,
              keep_trajectory: bool = False) -> ClusteringResult:
    """Eager first-improvement AMS ascent (random init by default).

    Candidates are visited in point-index order, resuming after the last
    accepted swap; each improving swap executes immediately.  Converged
    when n−k consecutive candidates yield no improvement.  ``max_iter``
    bounds the number of complete wraps over the candidate cycle.  The
    result is a local optimum of the same objective as the steepest
    variants, but the trajectory (and possibly the optimum found) differs.
    """
    max_iter = _check_max_iter(max_iter)
    dist = p.matrix()
    t0 = time.perf_counter()
    med = _resolve_init(p, k, medoids, "random", rng)
    n = p.n
    if med.shape[0] == n:
        return _trivial_result(p, med, t0)
    init = med.copy()
    hist = np.empty((max_iter * n if keep_trajectory else 0, 2),
                    dtype=np.int64)
    swaps, laps, converged, passes = K.fastermsc_core_kernel(
        dist, med, max_iter, hist)
    iterations = laps + 1 if converged or laps < max_iter else laps
    traj = None
    if keep_trajectory:
        traj = [init.copy()]
        replay = init.copy()
        for s in range(swaps):
            replay[hist[s, 0]] = hist[s, 1]
            traj.append(replay.copy())
    return _finalize(p, med, iterations, int(swaps), t0, bool(converged),
                     int(passes), traj)


def pamsil(p: DissimilarityProvider, k: int | None = None, medoids=None,
           max_iter: int = 100,
           keep_trajectory: bool = False) -> ClusteringResult:
    """Steepest ascent on the full silhouette width (ASW).

    Every candidate swap is scored by a complete O(n²) silhouette
    evaluation of the induced nearest-medoid labeling — O(k(n−k)n²) per
    iteration, intended for n up to a few thousand.  Candidates whose
    labeling collapses below two non-empty clusters are skipped.
    """
    max_iter = _check_max_iter(max_iter)
    dist = p.matrix()
    t0 = time.perf_counter()
    med = _resolve_init(p, k, medoids, "build")
    n = p.n
    if med.shape[0] == n:
        return _trivial_result(p, med, t0)
    kk = med.shape[0]
    ismed = np.zeros(n, dtype=np.bool_)
    ismed[med] = True
    labels_buf = np.empty(n, dtype=np.int64)
    K.labels_swapped_kernel(dist, med, -1, 0, labels_buf)
    current, valid = K.asw_sum_kernel(dist, labels_buf, kk)
    if not valid:
        current = -np.inf
    traj = [med.copy()] if keep_trajectory else None
    iterations = swaps = passes = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        passes += kk * (n - kk)
        best_sum, bi, bj = K.pamsil_best_swap_kernel(dist, med, ismed,
                                                     current, labels_buf)
        if bj < 0:
            converged = True
            break
        ismed[med[bi]] = False
        med[bi] = bj
        ismed[bj] = True
        current = best_sum
        swaps += 1
        if traj is not None:
            traj.append(med.copy())
    asw = None
    if np.isfinite(current):
        asw = float(current) / n
    return _finalize(p, med, iterations, swaps, t0, converged, passes, traj,
                     asw=asw)


# ---------------------------------------------------------------------------
# warmup


_WARMED = False


def warm_kernels() -> None:
    """Compile every jitted kernel on a toy instance.

    Call once before timing anything; compilation results are cached on
    disk, so later processes pay almost nothing.
    """
    global _WARMED
    if _WARMED:
        return
    from .dissim import from_points
    pts = np.array([[0.0, 0.0], [0.1, 0.2], [1.0, 1.1], [1.2, 0.9],
                    [5.0, 5.0], [5.1, 4.8]])
    p = from_points(pts, "euclidean")
    med = build_init(p, 2)
    pammedsil_naive(p, medoids=med, max_iter=3)
    fastmsc(p, medoids=med, max_iter=3, keep_trajectory=True)
    fastermsc(p, k=2, rng=0, max_iter=3)
    pamsil(p, k=3, max_iter=3)
    _WARMED = True
