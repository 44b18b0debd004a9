"""Ingestion layer: parsing, validation, metric computation."""

import numpy as np
import pytest

import medsil as ms
from medsil.dissim import DataFormatError

from conftest import random_points_provider


class TestFromMatrix:
    def test_stored_values(self):
        p = ms.from_matrix([[0, 1], [1, 0]])
        assert p.n == 2
        assert p.dist(0, 1) == 1.0

    def test_asymmetric_entries_averaged_with_warning(self):
        with pytest.warns(UserWarning, match="symmetriz"):
            p = ms.from_matrix([[0, 1], [3, 0]])
        assert p.dist(0, 1) == 2.0
        assert p.dist(1, 0) == 2.0

    def test_diagonal_forced_to_zero(self):
        p = ms.from_matrix([[5.0, 1], [1, 5.0]])
        assert p.dist(0, 0) == 0.0
        assert p.dist(1, 1) == 0.0

    def test_rejects_non_square(self):
        with pytest.raises(DataFormatError, match="square"):
            ms.from_matrix(np.ones((3, 4)))

    def test_rejects_negative(self):
        with pytest.raises(DataFormatError, match="negative"):
            ms.from_matrix([[0, -1], [-1, 0]])

    def test_rejects_non_finite(self):
        with pytest.raises(DataFormatError, match="NaN|infinite"):
            ms.from_matrix([[0, np.nan], [np.nan, 0]])

    def test_rejects_single_object(self):
        with pytest.raises(DataFormatError):
            ms.from_matrix([[0.0]])


class TestFromPoints:
    def test_line_distance(self):
        p = ms.from_points([[0.0], [3.0]])
        assert p.dist(0, 1) == 3.0

    def test_3_4_5_triangle(self):
        p = ms.from_points([[0.0, 0.0], [3.0, 4.0]])
        assert p.dist(0, 1) == 5.0

    def test_orthogonal_cosine(self):
        p = ms.from_points([[1.0, 0.0], [0.0, 1.0]], metric="cosine-distance")
        assert p.dist(0, 1) == pytest.approx(1.0, abs=1e-15)

    def test_zero_vector_cosine_distance_is_one(self):
        p = ms.from_points([[0.0, 0.0], [1.0, 2.0], [0.0, 0.0]],
                           metric="cosine-distance")
        assert p.dist(0, 1) == 1.0
        assert p.dist(0, 2) == 1.0
        assert p.dist(0, 0) == 0.0

    def test_squared_euclidean(self):
        p = ms.from_points([[0.0], [3.0]], metric="squared-euclidean")
        assert p.dist(0, 1) == 9.0

    def test_manhattan(self):
        p = ms.from_points([[0.0, 0.0], [1.0, 2.0]], metric="manhattan")
        assert p.dist(0, 1) == 3.0

    def test_line_fixture_far_corner(self, line_provider):
        assert line_provider.dist(0, 3) == 11.0

    def test_one_dimensional_input(self):
        p = ms.from_points([0.0, 2.0, 5.0])
        assert p.n == 3
        assert p.dist(1, 2) == 3.0

    def test_lazy_equals_eager(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(size=(20, 3))
        lazy = ms.from_points(pts)
        eager = ms.from_points(pts, eager=True)
        assert np.array_equal(lazy.matrix(), eager.matrix())

    def test_unknown_metric(self):
        with pytest.raises(ValueError, match="unknown metric"):
            ms.from_points([[0.0], [1.0]], metric="chebyshev")

    def test_precomputed_metric_rejected(self):
        with pytest.raises(ValueError, match="precomputed"):
            ms.from_points([[0.0], [1.0]], metric="precomputed")

    def test_empty_input(self):
        with pytest.raises(DataFormatError):
            ms.from_points(np.empty((0, 2)))

    def test_ragged_rows(self):
        with pytest.raises(DataFormatError):
            ms.from_points([[0.0, 1.0], [2.0]])


class TestProviderContract:
    """Symmetry / zero diagonal / bounds, checked exhaustively."""

    @pytest.mark.parametrize("metric", sorted(ms.POINT_METRICS))
    def test_invariants_exhaustive(self, metric):
        rng = np.random.default_rng(42)
        x = rng.normal(size=(64, 4))
        x[0] = 0.0  # exercise the zero-vector rule for cosine
        m = ms.from_points(x, metric=metric).matrix()
        assert m.shape == (64, 64)
        assert np.array_equal(m, m.T)
        assert np.all(np.diag(m) == 0.0)
        assert np.all(m >= 0.0)
        assert np.isfinite(m).all()

    def test_matrix_roundtrip_matches_points_provider(self):
        rng = np.random.default_rng(3)
        p = random_points_provider(rng, 30, dim=3)
        q = ms.from_matrix(p.matrix())
        assert np.allclose(p.matrix(), q.matrix(), atol=1e-12, rtol=0.0)

    def test_dist_index_errors(self):
        p = ms.from_points([[0.0], [1.0]])
        with pytest.raises(IndexError):
            p.dist(0, 2)
        with pytest.raises(IndexError):
            p.dist(-1, 0)


class TestTextIngestion:
    def test_load_matrix(self, tmp_path):
        f = tmp_path / "m.csv"
        f.write_text("0,1,4\n1,0,2\n4,2,0\n")
        p = ms.load_matrix(f)
        assert p.n == 3
        assert p.dist(0, 2) == 4.0

    def test_load_matrix_header_detected(self, tmp_path):
        f = tmp_path / "m.csv"
        f.write_text("a,b\n0,1\n1,0\n")
        p = ms.load_matrix(f)
        assert p.n == 2
        assert p.dist(0, 1) == 1.0

    def test_load_matrix_non_square(self, tmp_path):
        f = tmp_path / "m.csv"
        f.write_text("0,1,2\n1,0,2\n")
        with pytest.raises(DataFormatError, match="square"):
            ms.load_matrix(f)

    def test_load_points_with_header(self, tmp_path):
        f = tmp_path / "pts.csv"
        f.write_text("x,y\n0,0\n3,4\n")
        pts = ms.load_points(f)
        assert pts.shape == (2, 2)
        assert ms.from_points(pts).dist(0, 1) == 5.0

    def test_load_points_non_numeric_body(self, tmp_path):
        f = tmp_path / "pts.csv"
        f.write_text("0,0\n3,oops\n")
        with pytest.raises(DataFormatError, match="non-numeric"):
            ms.load_points(f)

    def test_load_points_ragged(self, tmp_path):
        f = tmp_path / "pts.csv"
        f.write_text("0,0\n1\n")
        with pytest.raises(DataFormatError, match="ragged"):
            ms.load_points(f)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            ms.load_points(tmp_path / "absent.csv")

    def test_load_empty_file(self, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("\n\n")
        with pytest.raises(DataFormatError, match="empty"):
            ms.load_points(f)
