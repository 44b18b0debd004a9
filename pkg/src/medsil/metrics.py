"""Supervised partition-agreement indices: ARI and NMI.

Both are computed from a contingency table.  ARI uses exact integer pair
counts (Python integers), so symmetry, relabeling invariance, and the
identical-partition value 1 hold exactly, not just to rounding.  NMI uses
natural-log entropies normalized by their arithmetic mean — conventions
differ across the literature, so this choice is part of the contract; sums
are exactly rounded (``math.fsum``), which again makes relabeling and
argument order irrelevant bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ContingencyTable", "contingency_table", "ari", "nmi"]


@dataclass(frozen=True)
class ContingencyTable:
    """Co-occurrence counts between two labelings plus marginals."""

    counts: np.ndarray
    row_totals: np.ndarray
    col_totals: np.ndarray
    n: int


def _factorize(labels, name: str) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D sequence of labels")
    _, inv = np.unique(arr, return_inverse=True)
    return inv.astype(np.int64)


def contingency_table(a, b) -> ContingencyTable:
    """Build the contingency table of two equal-length labelings."""
    ai = _factorize(a, "a")
    bi = _factorize(b, "b")
    if ai.shape[0] != bi.shape[0]:
        raise ValueError(
            f"label sequences differ in length: {ai.shape[0]} vs {bi.shape[0]}")
    n = ai.shape[0]
    if n == 0:
        raise ValueError("empty labelings")
    ka = int(ai.max()) + 1
    kb = int(bi.max()) + 1
    counts = np.bincount(ai * kb + bi, minlength=ka * kb).reshape(ka, kb)
    return ContingencyTable(counts=counts,
                            row_totals=counts.sum(axis=1),
                            col_totals=counts.sum(axis=0),
                            n=n)


def _check_lengths(a, b) -> ContingencyTable:
    t = contingency_table(a, b)
    if t.n < 2:
        raise ValueError("need at least 2 labeled objects")
    return t


def _pairs(counts: np.ndarray) -> int:
    # Exact integer sum of C(c, 2) over all entries.
    total = 0
    for c in counts.ravel().tolist():
        total += c * (c - 1) // 2
    return total


def ari(a, b) -> float:
    """Adjusted Rand index (Hubert–Arabie, adjusted for chance).

    1 for identical partitions, about 0 for independent ones.  When the
    adjustment denominator vanishes — both partitions all-singletons or
    both the single all-inclusive cluster — the partitions are identical
    and the value is defined as 1.
    """
    t = _check_lengths(a, b)
    index = _pairs(t.counts)
    pairs_a = _pairs(t.row_totals)
    pairs_b = _pairs(t.col_totals)
    total = t.n * (t.n - 1) // 2
    # All quantities are exact integers; scale numerator and denominator by
    # 2·total to avoid any intermediate rounding.
    num = 2 * (total * index - pairs_a * pairs_b)
    den = total * (pairs_a + pairs_b) - 2 * pairs_a * pairs_b
    if den == 0:
        return 1.0
    return num / den


def nmi(a, b) -> float:
    """Normalized mutual information, arithmetic-mean normalization.

    ``I(a;b) / ((H(a)+H(b))/2)`` with natural logarithms.  Identical
    partitions give exactly 1; when either labeling is constant and the
    other is not, mutual information is 0 and so is the result; two
    constant labelings are identical, giving 1.
    """
    t = _check_lengths(a, b)
    n = t.n
    pa = t.row_totals / n
    pb = t.col_totals / n
    la = np.log(pa)
    lb = np.log(pb)
    h_a = math.fsum(-pa[i] * la[i] for i in range(pa.shape[0]))
    h_b = math.fsum(-pb[j] * lb[j] for j in range(pb.shape[0]))
    mean_h = (h_a + h_b) / 2.0
    if mean_h == 0.0:
        return 1.0
    rows, cols = np.nonzero(t.counts)
    p_nz = t.counts[rows, cols] / n
    lp = np.log(p_nz)
    # Group the marginal logs so each term is symmetric under argument
    # swap: fp addition commutes, left-to-right subtraction does not.
    info = math.fsum(p_nz[m] * (lp[m] - (la[rows[m]] + lb[cols[m]]))
                     for m in range(p_nz.shape[0]))
    if info <= 0.0:
        return 0.0
    return min(info / mean_h, 1.0)
