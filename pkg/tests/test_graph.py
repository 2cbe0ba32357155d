import numpy as np
import pytest

from mvmlfs import knn_affinity, smoothness_trace
from mvmlfs.graph import save_affinity_csv


def pairwise_disagreement(S, Y):
    """Brute-force half double sum of s_ij * ||y_i - y_j||^2."""
    total = 0.0
    n = S.shape[0]
    for i in range(n):
        for j in range(n):
            total += S[i, j] * np.sum((Y[i] - Y[j]) ** 2)
    return 0.5 * total


class TestKnnAffinity:
    def test_identical_neighbors_affinity_one(self):
        pts = np.array([[1.0, 2.0], [1.0, 2.0], [9.0, 9.0]])
        g = knn_affinity(pts, q=1, sigma=1.0)
        assert g.affinity[0, 1] == 1.0
        assert g.affinity[1, 0] == 1.0

    def test_distance_sigma_gives_inverse_e(self):
        sigma = 0.7
        pts = np.array([[0.0], [sigma]])
        g = knn_affinity(pts, q=1, sigma=sigma)
        assert g.affinity[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-12)

    def test_non_neighbors_zero(self):
        # Two tight clusters: opposite endpoints are never in each other's
        # 1-neighborhood.
        pts = np.array([[0.0], [0.1], [5.0], [5.1]])
        g = knn_affinity(pts, q=1, sigma=1.0)
        assert g.affinity[0, 3] == 0.0
        assert g.affinity[0, 1] > 0.0
        assert g.affinity[2, 3] > 0.0

    def test_or_rule_symmetry(self):
        rng = np.random.default_rng(0)
        pts = rng.random((12, 3))
        g = knn_affinity(pts, q=3, sigma=0.5)
        np.testing.assert_array_equal(g.affinity, g.affinity.T)

    def test_diagonal_zero(self):
        rng = np.random.default_rng(1)
        g = knn_affinity(rng.random((8, 2)), q=2, sigma=1.0)
        np.testing.assert_array_equal(np.diag(g.affinity), np.zeros(8))

    def test_affinity_in_unit_interval(self):
        rng = np.random.default_rng(2)
        g = knn_affinity(rng.random((15, 4)), q=4, sigma=0.3)
        assert g.affinity.min() >= 0.0
        assert g.affinity.max() <= 1.0

    def test_laplacian_row_sums_zero(self):
        rng = np.random.default_rng(3)
        g = knn_affinity(rng.random((10, 2)), q=3, sigma=1.0)
        np.testing.assert_allclose(g.laplacian.sum(axis=1), 0.0, atol=1e-9)

    def test_laplacian_psd(self):
        rng = np.random.default_rng(4)
        g = knn_affinity(rng.random((12, 3)), q=3, sigma=0.8)
        for _ in range(20):
            x = rng.normal(size=12)
            assert x @ g.laplacian @ x >= -1e-9

    def test_permutation_consistency(self):
        rng = np.random.default_rng(5)
        pts = rng.random((9, 3))
        perm = rng.permutation(9)
        g = knn_affinity(pts, q=3, sigma=1.0)
        gp = knn_affinity(pts[perm], q=3, sigma=1.0)
        P = np.eye(9)[perm]
        np.testing.assert_allclose(gp.affinity, P @ g.affinity @ P.T, atol=1e-12)
        np.testing.assert_allclose(gp.laplacian, P @ g.laplacian @ P.T, atol=1e-12)

    def test_invalid_arguments(self):
        pts = np.zeros((4, 2))
        with pytest.raises(ValueError):
            knn_affinity(pts, q=4, sigma=1.0)
        with pytest.raises(ValueError):
            knn_affinity(pts, q=2, sigma=0.0)
        with pytest.raises(ValueError):
            knn_affinity(pts[:1], q=1, sigma=1.0)

    def test_tie_break_by_index(self):
        # Points 1 and 2 are equidistant from 0; q=1 must pick index 1.
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [10.0, 0.0]])
        g = knn_affinity(pts, q=1, sigma=1.0)
        assert g.affinity[0, 1] > 0.0


class TestSmoothnessTrace:
    def test_identical_rows_zero(self):
        from mvmlfs.graph import GraphPair
        S = np.array([[0.0, 1.0], [1.0, 0.0]])
        L = np.diag(S.sum(1)) - S
        g = GraphPair(affinity=S, degrees=S.sum(1), laplacian=L, sigma=1.0, q=1)
        assert smoothness_trace(g, np.array([[1.0], [1.0]])) == 0.0

    def test_unit_disagreement(self):
        from mvmlfs.graph import GraphPair
        S = np.array([[0.0, 1.0], [1.0, 0.0]])
        L = np.diag(S.sum(1)) - S
        g = GraphPair(affinity=S, degrees=S.sum(1), laplacian=L, sigma=1.0, q=1)
        assert smoothness_trace(g, np.array([[1.0], [0.0]])) == pytest.approx(1.0)

    def test_matches_double_sum_oracle(self):
        rng = np.random.default_rng(6)
        pts = rng.random((4, 3))
        Y = rng.random((4, 2))
        g = knn_affinity(pts, q=2, sigma=0.9)
        expected = pairwise_disagreement(g.affinity, Y)
        got = smoothness_trace(g, Y)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(7)
        for seed in range(10):
            r = np.random.default_rng(seed)
            g = knn_affinity(r.random((8, 2)), q=3, sigma=0.5)
            Y = r.normal(size=(8, 3))
            assert smoothness_trace(g, Y) >= -1e-9

    def test_dimension_mismatch(self):
        g = knn_affinity(np.random.default_rng(8).random((5, 2)), q=2, sigma=1.0)
        with pytest.raises(ValueError):
            smoothness_trace(g, np.zeros((4, 2)))


def test_triplet_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    g = knn_affinity(rng.random((6, 2)), q=2, sigma=1.0)
    out = tmp_path / "graph.csv"
    save_affinity_csv(g, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "i,j,s_ij"
    rebuilt = np.zeros_like(g.affinity)
    for ln in lines[1:]:
        i, j, s = ln.split(",")
        rebuilt[int(i), int(j)] = float(s)
    np.testing.assert_array_equal(rebuilt, g.affinity)
