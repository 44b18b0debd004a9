"""Compiled inner loops for the optimizers.

Everything here is scalar numba code operating on preallocated arrays; the
public API lives in :mod:`medsil.optim`.  All division goes through
:func:`sr`, the safe ratio (0 when the numerator is 0), so coincident
medoids and the ``d3 = +inf`` sentinel never produce NaN.  Loops are
single-threaded on purpose: determinism (fixed summation order, fixed
tie-breaking) is part of the optimizer contract.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True, nogil=True)
def sr(a, b):
    """Safe ratio: 0 if a == 0 else a / b (call sites guarantee a <= b)."""
    if a == 0.0:
        return 0.0
    return a / b


@njit(cache=True, nogil=True)
def update_caches_kernel(dist, medoids, n1, n2, d1, d2, d3):
    """Three smallest medoid distances per point, lower position wins ties."""
    n = dist.shape[0]
    k = medoids.shape[0]
    for o in range(n):
        b1 = INF
        b2 = INF
        b3 = INF
        i1 = -1
        i2 = -1
        for pos in range(k):
            d = dist[o, medoids[pos]]
            if d < b1:
                b3 = b2
                b2 = b1
                i2 = i1
                b1 = d
                i1 = pos
            elif d < b2:
                b3 = b2
                b2 = d
                i2 = pos
            elif d < b3:
                b3 = d
        n1[o] = i1
        n2[o] = i2
        d1[o] = b1
        d2[o] = b2
        d3[o] = b3


@njit(cache=True, nogil=True)
def ratios_kernel(d1, d2, d3, r12, r13, r23):
    for o in range(d1.shape[0]):
        r12[o] = sr(d1[o], d2[o])
        r13[o] = sr(d1[o], d3[o])
        r23[o] = sr(d2[o], d3[o])


@njit(cache=True, nogil=True)
def ams_sum_kernel(d1, d2):
    """Sum of per-point medoid silhouettes (n times the average)."""
    total = 0.0
    for o in range(d1.shape[0]):
        total += 1.0 - sr(d1[o], d2[o])
    return total


@njit(cache=True, nogil=True)
def removal_loss_kernel(n1, n2, r12, r13, r23, removal):
    """Loss of removing each medoid without replacement, accumulated per point."""
    removal[:] = 0.0
    for o in range(n1.shape[0]):
        removal[n1[o]] += r12[o] - r23[o]
        removal[n2[o]] += r12[o] - r13[o]


@njit(cache=True, nogil=True)
def candidate_pass_kernel(drow, n1, n2, d1, d2, d3, r12, r13, r23,
                          removal, acc):
    """Stream all points for one replacement candidate.

    ``drow`` holds the candidate's distances to every point.  ``acc`` is
    seeded with the removal losses and updated with the per-point correction
    terms; the returned value is the shared addition accumulator (gain of
    adding the candidate as an extra medoid).  ``acc[i] + add`` then equals
    n times the AMS change of swapping medoid position ``i`` for the
    candidate.
    """
    n = drow.shape[0]
    for i in range(removal.shape[0]):
        acc[i] = removal[i]
    add = 0.0
    for o in range(n):
        doj = drow[o]
        if doj < d1[o]:
            # candidate becomes the nearest medoid of o
            add += r12[o] - doj / d1[o]
            acc[n1[o]] += doj / d1[o] + r23[o] - (d1[o] + doj) / d2[o]
            acc[n2[o]] += r13[o] - r12[o]
        elif doj < d2[o]:
            # candidate becomes the new second-nearest
            add += r12[o] - sr(d1[o], doj)
            acc[n1[o]] += sr(d1[o], doj) + r23[o] - (d1[o] + doj) / d2[o]
            acc[n2[o]] += r13[o] - r12[o]
        elif doj < d3[o]:
            # candidate only matters if n1 or n2 is the one removed
            acc[n1[o]] += r23[o] - sr(d2[o], doj)
            acc[n2[o]] += r13[o] - sr(d1[o], doj)
    return add


@njit(cache=True, nogil=True)
def best_swap_kernel(dist, ismed, n1, n2, d1, d2, d3, r12, r13, r23, removal):
    """Steepest swap over all (medoid, candidate) pairs via accumulators.

    Returns ``(delta, medoid_position, candidate_index)`` with delta in
    ams-sum units; ``candidate_index`` is -1 when nothing improves.  The
    first-encountered maximum wins (strict comparisons throughout).
    """
    n = dist.shape[0]
    k = removal.shape[0]
    acc = np.empty(k, dtype=np.float64)
    best_delta = 0.0
    best_i = -1
    best_j = -1
    for j in range(n):
        if ismed[j]:
            continue
        add = candidate_pass_kernel(dist[j], n1, n2, d1, d2, d3,
                                    r12, r13, r23, removal, acc)
        bi = 0
        for i in range(1, k):
            if acc[i] > acc[bi]:
                bi = i
        delta = acc[bi] + add
        if delta > best_delta:
            best_delta = delta
            best_i = bi
            best_j = j
    return best_delta, best_i, best_j


@njit(cache=True, nogil=True)
def naive_swap_sum_kernel(dist, medoids, pos, j):
    """AMS sum after replacing the medoid at ``pos`` with point ``j``,
    recomputed from scratch in O(nk)."""
    n = dist.shape[0]
    k = medoids.shape[0]
    total = 0.0
    for o in range(n):
        b1 = INF
        b2 = INF
        for p in range(k):
            m = j if p == pos else medoids[p]
            d = dist[o, m]
            if d < b1:
                b2 = b1
                b1 = d
            elif d < b2:
                b2 = d
        total += 1.0 - sr(b1, b2)
    return total


@njit(cache=True, nogil=True)
def naive_best_swap_kernel(dist, medoids, ismed, current_sum):
    """Steepest swap by full AMS recomputation per candidate pair."""
    n = dist.shape[0]
    k = medoids.shape[0]
    best_sum = current_sum
    best_i = -1
    best_j = -1
    for j in range(n):
        if ismed[j]:
            continue
        for i in range(k):
            s = naive_swap_sum_kernel(dist, medoids, i, j)
            if s > best_sum:
                best_sum = s
                best_i = i
                best_j = j
    return best_sum, best_i, best_j


@njit(cache=True, nogil=True)
def labels_swapped_kernel(dist, medoids, pos, j, labels):
    """Nearest-medoid labels for the medoid list with position ``pos``
    replaced by ``j`` (pass pos = -1 for the unmodified list)."""
    n = dist.shape[0]
    k = medoids.shape[0]
    for o in range(n):
        m0 = j if pos == 0 else medoids[0]
        bd = dist[o, m0]
        bl = 0
        for p in range(1, k):
            m = j if p == pos else medoids[p]
            d = dist[o, m]
            if d < bd:
                bd = d
                bl = p
        labels[o] = bl


@njit(cache=True, nogil=True)
def asw_sum_kernel(dist, labels, k):
    """Sum of classical silhouette widths for an integer labeling.

    Self-distance is excluded from the intra-cluster mean; singleton points
    contribute 0.  Returns ``(total, valid)`` where valid is False when
    fewer than two clusters are non-empty (silhouette undefined).
    """
    n = dist.shape[0]
    csize = np.zeros(k, dtype=np.int64)
    for o in range(n):
        csize[labels[o]] += 1
    nonempty = 0
    for c in range(k):
        if csize[c] > 0:
            nonempty += 1
    if nonempty < 2:
        return 0.0, False
    total = 0.0
    sums = np.empty(k, dtype=np.float64)
    for o in range(n):
        for c in range(k):
            sums[c] = 0.0
        for p in range(n):
            sums[labels[p]] += dist[o, p]
        own = labels[o]
        if csize[own] <= 1:
            continue
        a = sums[own] / (csize[own] - 1)
        b = INF
        for c in range(k):
            if c != own and csize[c] > 0:
                mean = sums[c] / csize[c]
                if mean < b:
                    b = mean
        mx = a if a > b else b
        if mx > 0.0:
            total += (b - a) / mx
    return total, True


@njit(cache=True, nogil=True)
def pamsil_best_swap_kernel(dist, medoids, ismed, current_sum, labels_buf):
    """Steepest swap scored by full silhouette evaluation per candidate."""
    n = dist.shape[0]
    k = medoids.shape[0]
    best_sum = current_sum
    best_i = -1
    best_j = -1
    for j in range(n):
        if ismed[j]:
            continue
        for i in range(k):
            labels_swapped_kernel(dist, medoids, i, j, labels_buf)
            s, valid = asw_sum_kernel(dist, labels_buf, k)
            if valid and s > best_sum:
                best_sum = s
                best_i = i
                best_j = j
    return best_sum, best_i, best_j


@njit(cache=True, nogil=True)
def _refresh(dist, med, n1, n2, d1, d2, d3, r12, r13, r23, removal):
    update_caches_kernel(dist, med, n1, n2, d1, d2, d3)
    ratios_kernel(d1, d2, d3, r12, r13, r23)
    removal_loss_kernel(n1, n2, r12, r13, r23, removal)


@njit(cache=True, nogil=True)
def fastermsc_core_kernel(dist, med, max_laps, hist):
    """Eager first-improvement descent over candidates in round-robin order.

    ``med`` is modified in place.  Each accepted swap is recorded into
    ``hist`` (rows of medoid position, new point index) as capacity allows.
    Returns ``(swaps, laps, converged, passes)`` where passes counts
    candidate accumulator passes and laps counts completed wraps over the
    point indices.
    """
    n = dist.shape[0]
    k = med.shape[0]
    n1 = np.empty(n, dtype=np.int64)
    n2 = np.empty(n, dtype=np.int64)
    d1 = np.empty(n, dtype=np.float64)
    d2 = np.empty(n, dtype=np.float64)
    d3 = np.empty(n, dtype=np.float64)
    r12 = np.empty(n, dtype=np.float64)
    r13 = np.empty(n, dtype=np.float64)
    r23 = np.empty(n, dtype=np.float64)
    removal = np.empty(k, dtype=np.float64)
    acc = np.empty(k, dtype=np.float64)
    ismed = np.zeros(n, dtype=np.bool_)
    for p in range(k):
        ismed[med[p]] = True
    _refresh(dist, med, n1, n2, d1, d2, d3, r12, r13, r23, removal)
    swaps = 0
    laps = 0
    fails = 0
    passes = 0
    converged = False
    j = 0
    while True:
        if j == n:
            j = 0
            laps += 1
            if laps >= max_laps:
                break
        if ismed[j]:
            j += 1
            continue
        add = candidate_pass_kernel(dist[j], n1, n2, d1, d2, d3,
                                    r12, r13, r23, removal, acc)
        passes += 1
        bi = 0
        for i in range(1, k):
            if acc[i] > acc[bi]:
                bi = i
        if acc[bi] + add > 0.0:
            ismed[med[bi]] = False
            med[bi] = j
            ismed[j] = True
            if swaps < hist.shape[0]:
                hist[swaps, 0] = bi
                hist[swaps, 1] = j
            swaps += 1
            fails = 0
            _refresh(dist, med, n1, n2, d1, d2, d3, r12, r13, r23, removal)
        else:
            fails += 1
            if fails >= n - k:
                converged = True
                break
        j += 1
    return swaps, laps, converged, passes


@njit(cache=True, nogil=True)
def build_init_kernel(dist, k, out):
    """Greedy BUILD initialization; ties go to the lowest point index."""
    n = dist.shape[0]
    best = -1
    best_sum = INF
    for c in range(n):
        s = 0.0
        for o in range(n):
            s += dist[c, o]
        if s < best_sum:
            best_sum = s
            best = c
    out[0] = best
    dnear = np.empty(n, dtype=np.float64)
    for o in range(n):
        dnear[o] = dist[best, o]
    chosen = np.zeros(n, dtype=np.bool_)
    chosen[best] = True
    for step in range(1, k):
        best_red = -INF
        best_c = -1
        for c in range(n):
            if chosen[c]:
                continue
            red = 0.0
            for o in range(n):
                diff = dnear[o] - dist[c, o]
                if diff > 0.0:
                    red += diff
            if red > best_red:
                best_red = red
                best_c = c
        out[step] = best_c
        chosen[best_c] = True
        for o in range(n):
            if dist[best_c, o] < dnear[o]:
                dnear[o] = dist[best_c, o]
