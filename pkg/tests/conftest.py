"""Shared fixtures, instance generators, and independent oracles.

The oracle functions here recompute everything from definitions with plain
Python/numpy (no shared code with the optimizer internals) so the fast
paths have something honest to be checked against.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

import medsil as ms


@pytest.fixture(scope="session", autouse=True)
def _warm():
    ms.warm_kernels()


@pytest.fixture()
def line_provider() -> ms.DissimilarityProvider:
    """Four points on a line at 0, 1, 10, 11 — the hand-checked fixture."""
    return ms.from_points([[0.0], [1.0], [10.0], [11.0]])


# ---------------------------------------------------------------------------
# instance generators


def random_points_provider(rng: np.random.Generator, n: int,
                           dim: int = 2) -> ms.DissimilarityProvider:
    return ms.from_points(rng.uniform(0.0, 10.0, size=(n, dim)))


def random_matrix_provider(rng: np.random.Generator,
                           n: int) -> ms.DissimilarityProvider:
    """Non-metric instance: symmetric uniform dissimilarities."""
    m = rng.uniform(0.1, 1.0, size=(n, n))
    m = (m + m.T) / 2.0
    np.fill_diagonal(m, 0.0)
    return ms.from_matrix(m)


def random_instance(rng: np.random.Generator,
                    n: int) -> ms.DissimilarityProvider:
    if rng.random() < 0.5:
        return random_points_provider(rng, n)
    return random_matrix_provider(rng, n)


# ---------------------------------------------------------------------------
# oracles (definition-level recomputation)


def oracle_point_value(dist: np.ndarray, medoids, o: int) -> float:
    """Medoid silhouette of one point straight from the definition."""
    d = sorted(float(dist[o, m]) for m in medoids)
    d1, d2 = d[0], d[1]
    ratio = 0.0 if d1 == 0.0 else d1 / d2
    return 1.0 - ratio


def oracle_ams(dist: np.ndarray, medoids) -> float:
    n = dist.shape[0]
    return math.fsum(oracle_point_value(dist, medoids, o)
                     for o in range(n)) / n


def oracle_ams_sum(dist: np.ndarray, medoids) -> float:
    return math.fsum(oracle_point_value(dist, medoids, o)
                     for o in range(dist.shape[0]))


def oracle_best_possible_ams(dist: np.ndarray, k: int) -> float:
    """Global optimum over all C(n, k) medoid sets (brute force)."""
    from itertools import combinations
    n = dist.shape[0]
    return max(oracle_ams(dist, list(med))
               for med in combinations(range(n), k))


def exhaustive_improvement(dist: np.ndarray, medoids: np.ndarray) -> float:
    """Largest single-swap AMS-sum gain over the full move set."""
    n = dist.shape[0]
    med = list(medoids)
    base = oracle_ams_sum(dist, med)
    non = [j for j in range(n) if j not in set(med)]
    best = -math.inf
    for j in non:
        for pos in range(len(med)):
            trial = list(med)
            trial[pos] = j
            best = max(best, oracle_ams_sum(dist, trial) - base)
    return best


def oracle_asw(dist: np.ndarray, labels) -> float:
    """Classical silhouette from the definition, self excluded from a."""
    labels = list(labels)
    n = dist.shape[0]
    clusters: dict = {}
    for i, lab in enumerate(labels):
        clusters.setdefault(lab, []).append(i)
    values = []
    for i in range(n):
        own = clusters[labels[i]]
        if len(own) == 1:
            values.append(0.0)
            continue
        a = math.fsum(dist[i, j] for j in own if j != i) / (len(own) - 1)
        b = min(math.fsum(dist[i, j] for j in members) / len(members)
                for lab, members in clusters.items() if lab != labels[i])
        top = max(a, b)
        values.append(0.0 if top == 0.0 else (b - a) / top)
    return math.fsum(values) / n


def oracle_ari_pairs(a, b) -> float:
    """ARI by brute-force pair enumeration (independent of the
    contingency-table formula used in the package)."""
    a = list(a)
    b = list(b)
    n = len(a)
    n11 = n00 = n10 = n01 = 0
    for i in range(n):
        for j in range(i + 1, n):
            sa = a[i] == a[j]
            sb = b[i] == b[j]
            if sa and sb:
                n11 += 1
            elif sa:
                n10 += 1
            elif sb:
                n01 += 1
            else:
                n00 += 1
    num = 2 * (n11 * n00 - n10 * n01)
    den = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00)
    if den == 0:
        return 1.0
    return num / den


def oracle_nmi(a, b) -> float:
    """NMI from joint probabilities, arithmetic-mean normalization."""
    a = list(a)
    b = list(b)
    n = len(a)
    joint: dict = {}
    pa: dict = {}
    pb: dict = {}
    for x, y in zip(a, b):
        joint[(x, y)] = joint.get((x, y), 0) + 1
        pa[x] = pa.get(x, 0) + 1
        pb[y] = pb.get(y, 0) + 1
    ha = -math.fsum((c / n) * math.log(c / n) for c in pa.values())
    hb = -math.fsum((c / n) * math.log(c / n) for c in pb.values())
    if ha + hb == 0.0:
        return 1.0
    info = math.fsum(
        (c / n) * math.log((c / n) / ((pa[x] / n) * (pb[y] / n)))
        for (x, y), c in joint.items())
    if info <= 0.0:
        return 0.0
    return min(info / ((ha + hb) / 2.0), 1.0)
