"""Data ingestion and uniform dissimilarity access.

Every downstream algorithm sees data through a :class:`DissimilarityProvider`,
which always behaves like a dense symmetric matrix of non-negative double
precision dissimilarities with a zero diagonal.  Providers are built either
from a precomputed matrix (:func:`load_matrix`, :func:`from_matrix`) or from
coordinate points plus a metric (:func:`from_points`).  The metric does not
need to satisfy the triangle inequality.
"""

from __future__ import annotations

import warnings
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "DataFormatError",
    "DissimilarityProvider",
    "EUCLIDEAN",
    "SQUARED_EUCLIDEAN",
    "MANHATTAN",
    "COSINE_DISTANCE",
    "PRECOMPUTED",
    "METRICS",
    "POINT_METRICS",
    "from_matrix",
    "from_points",
    "load_matrix",
    "load_points",
]

EUCLIDEAN = "euclidean"
SQUARED_EUCLIDEAN = "squared-euclidean"
MANHATTAN = "manhattan"
COSINE_DISTANCE = "cosine-distance"
PRECOMPUTED = "precomputed"

#: Metrics usable with coordinate input.
POINT_METRICS = frozenset({EUCLIDEAN, SQUARED_EUCLIDEAN, MANHATTAN, COSINE_DISTANCE})
#: Every metric identifier, including the precomputed pseudo-metric.
METRICS = POINT_METRICS | {PRECOMPUTED}


class DataFormatError(ValueError):
    """Raised when input data cannot be turned into a valid provider."""


class DissimilarityProvider:
    """Read-only pairwise dissimilarity access for ``n`` objects.

    The provider owns an ``(n, n)`` float64 matrix (materialized lazily for
    point-backed providers; both routes go through the same matrix, so lazy
    and eager construction give identical values).  Instances are immutable
    after construction and safe to share across concurrent optimizer runs.
    """

    def __init__(self, matrix: np.ndarray | None = None,
                 points: np.ndarray | None = None,
                 metric: str = PRECOMPUTED):
        if (matrix is None) == (points is None):
            raise ValueError("provide exactly one of matrix or points")
        self._matrix = matrix
        self._points = points
        self.metric = metric
        self.n = int(matrix.shape[0] if matrix is not None else points.shape[0])

    def matrix(self) -> np.ndarray:
        """Return the full dissimilarity matrix (float64, C-contiguous)."""
        if self._matrix is None:
            self._matrix = _compute_matrix(self._points, self.metric)
        return self._matrix

    def dist(self, i: int, j: int) -> float:
        """Dissimilarity between objects ``i`` and ``j``."""
        n = self.n
        if not (0 <= i < n and 0 <= j < n):
            raise IndexError(f"index pair ({i}, {j}) out of range for n={n}")
        return float(self.matrix()[i, j])

    @property
    def points(self) -> np.ndarray | None:
        """Backing coordinates, or None for matrix-backed providers."""
        return self._points

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = "matrix" if self._points is None else f"points/{self.metric}"
        return f"DissimilarityProvider(n={self.n}, {kind})"


# ---------------------------------------------------------------------------
# construction


def from_matrix(matrix: np.ndarray | Sequence[Sequence[float]],
                copy: bool = True) -> DissimilarityProvider:
    """Build a provider from an in-memory square matrix.

    The matrix is validated (square, finite, non-negative), symmetrized by
    averaging with its transpose (a warning is emitted when the input was
    asymmetric), and its diagonal is forced to zero.
    """
    m = np.array(matrix, dtype=np.float64, copy=copy, order="C")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataFormatError(
            f"dissimilarity matrix must be square, got shape {m.shape}")
    if m.shape[0] < 2:
        raise DataFormatError("need at least 2 objects")
    if not np.isfinite(m).all():
        raise DataFormatError("dissimilarity matrix contains NaN or infinite entries")
    if (m < 0).any():
        raise DataFormatError("dissimilarity matrix contains negative entries")
    if not np.array_equal(m, m.T):
        warnings.warn("asymmetric dissimilarity matrix; symmetrizing by averaging",
                      stacklevel=2)
        m = (m + m.T) / 2.0
    np.fill_diagonal(m, 0.0)
    return DissimilarityProvider(matrix=np.ascontiguousarray(m))


def from_points(points: np.ndarray | Sequence[Sequence[float]],
                metric: str = EUCLIDEAN,
                eager: bool = False) -> DissimilarityProvider:
    """Build a provider that derives dissimilarities from coordinates.

    Parameters
    ----------
    points : array-like, shape (n, dim) or (n,)
        Coordinate rows; a 1-D array is treated as n one-dimensional points.
    metric : str
        One of ``euclidean``, ``squared-euclidean``, ``manhattan``,
        ``cosine-distance``.
    eager : bool
        Materialize the matrix immediately instead of on first access.
        Values are identical either way.
    """
    if metric == PRECOMPUTED:
        raise ValueError("metric 'precomputed' requires a matrix input")
    if metric not in POINT_METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of "
                         f"{sorted(POINT_METRICS)}")
    x = _as_point_array(points)
    p = DissimilarityProvider(points=x, metric=metric)
    if eager:
        p.matrix()
    return p


def _as_point_array(points) -> np.ndarray:
    try:
        x = np.array(points, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"could not parse points: {exc}") from None
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.ndim != 2:
        raise DataFormatError(f"points must form a 2-D table, got shape {x.shape}")
    if x.shape[0] < 2:
        raise DataFormatError("need at least 2 points")
    if not np.isfinite(x).all():
        raise DataFormatError("points contain NaN or infinite coordinates")
    return np.ascontiguousarray(x)


def _compute_matrix(x: np.ndarray, metric: str) -> np.ndarray:
    if metric == EUCLIDEAN:
        m = cdist(x, x, "euclidean")
    elif metric == SQUARED_EUCLIDEAN:
        m = cdist(x, x, "sqeuclidean")
    elif metric == MANHATTAN:
        m = cdist(x, x, "cityblock")
    elif metric == COSINE_DISTANCE:
        m = _cosine_distance_matrix(x)
    else:  # pragma: no cover - guarded in from_points
        raise ValueError(f"unknown metric {metric!r}")
    # Exact symmetry and a zero diagonal are provider invariants; enforce them
    # here rather than trusting each backend's rounding behavior.
    m = (m + m.T) / 2.0
    np.fill_diagonal(m, 0.0)
    return np.ascontiguousarray(np.maximum(m, 0.0))


def _cosine_distance_matrix(x: np.ndarray) -> np.ndarray:
    """1 - cosine similarity, with zero vectors at distance 1 from everything."""
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    unit = x / safe[:, None]
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    d = 1.0 - sim
    d[zero, :] = 1.0
    d[:, zero] = 1.0
    return d


# ---------------------------------------------------------------------------
# text ingestion


def load_points(source: str | Path) -> np.ndarray:
    """Parse a comma-separated coordinate table (row per object).

    A single header row is auto-detected (first row containing a token that
    does not parse as a number) and skipped.
    """
    rows = _parse_table(_read_text(source), str(source))
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DataFormatError(f"{source}: ragged rows (expected width {width})")
    if len(rows) < 2:
        raise DataFormatError(f"{source}: need at least 2 rows")
    return np.array(rows, dtype=np.float64)


def load_matrix(source: str | Path) -> DissimilarityProvider:
    """Parse a comma-separated square dissimilarity matrix into a provider.

    Symmetry is enforced by averaging mirrored entries (with a warning when
    they differ) and the diagonal is forced to zero.
    """
    rows = _parse_table(_read_text(source), str(source))
    width = len(rows[0])
    if any(len(r) != width for r in rows) or len(rows) != width:
        raise DataFormatError(
            f"{source}: matrix must be square, got {len(rows)} rows of "
            f"width {width}")
    try:
        return from_matrix(np.array(rows, dtype=np.float64), copy=False)
    except DataFormatError as exc:
        raise DataFormatError(f"{source}: {exc}") from None


def _read_text(source: str | Path) -> str:
    try:
        return Path(source).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {source}: {exc}") from None


def _split_row(line: str) -> list[str]:
    return [tok.strip() for tok in line.split(",")]


def _parse_table(text: str, name: str) -> list[list[float]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError(f"{name}: empty input")
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines):
        toks = _split_row(line)
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            if lineno == 0:
                continue  # header row
            raise DataFormatError(
                f"{name}: non-numeric cell on line {lineno + 1}") from None
    if not rows:
        raise DataFormatError(f"{name}: no numeric rows")
    return rows
