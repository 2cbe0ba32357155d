import json

import numpy as np
import pytest

from mvmlfs import MultiViewDataset, build_fusion, compute_view_weights, knn_affinity
from mvmlfs.fusion import ViewWeights, save_view_weights_json, uniform_view_weights

from test_graph import pairwise_disagreement


def weights_from_traces(traces):
    inv = 1.0 / np.asarray(traces, dtype=float)
    return inv / inv.sum()


class TestViewWeights:
    def test_trace_arithmetic(self):
        w = weights_from_traces([2.0, 1.0])
        np.testing.assert_allclose(w, [1.0 / 3.0, 2.0 / 3.0])

    def test_identical_views_equal_weights(self):
        rng = np.random.default_rng(0)
        x = rng.random((12, 5))
        labels = (rng.random((12, 3)) < 0.5).astype(float)
        ds = MultiViewDataset(views=[x.copy(), x.copy(), x.copy()],
                              labels=labels, view_names=["a", "b", "c"])
        w = compute_view_weights(ds, q=3, sigma=1.0)
        np.testing.assert_allclose(w.weights, 1.0 / 3.0, atol=1e-12)

    def test_matches_double_sum_oracle(self):
        # Independent route: affinity graphs scored by the explicit pairwise
        # disagreement sum, then inverted and normalized.
        rng = np.random.default_rng(1)
        views = [rng.random((6, 3)), rng.random((6, 4))]
        labels = (rng.random((6, 2)) < 0.5).astype(float)
        ds = MultiViewDataset(views=views, labels=labels, view_names=["a", "b"])

        traces = []
        for x in views:
            g = knn_affinity(x, q=2, sigma=0.8)
            traces.append(pairwise_disagreement(g.affinity, labels))
        expected = weights_from_traces(traces)

        got = compute_view_weights(ds, q=2, sigma=0.8)
        np.testing.assert_allclose(got.weights, expected, rtol=1e-9)

    def test_normalized_and_nonnegative(self):
        for seed in range(8):
            rng = np.random.default_rng(seed)
            views = [rng.random((10, 4)), rng.random((10, 6))]
            labels = (rng.random((10, 3)) < 0.4).astype(float)
            ds = MultiViewDataset(views=views, labels=labels,
                                  view_names=["a", "b"])
            w = compute_view_weights(ds, q=3, sigma=1.0)
            assert abs(w.weights.sum() - 1.0) <= 1e-12
            assert np.all(w.weights >= 0.0)

    def test_trace_scale_invariance(self):
        w1 = weights_from_traces([3.0, 5.0, 9.0])
        w2 = weights_from_traces([30.0, 50.0, 90.0])
        np.testing.assert_allclose(w1, w2, atol=1e-15)

    def test_degenerate_trace_floor(self):
        # Identical label rows on every edge give zero traces; the floor
        # keeps the inversion finite and the weights uniform.
        rng = np.random.default_rng(2)
        views = [rng.random((8, 3)), rng.random((8, 3))]
        labels = np.ones((8, 2))
        ds = MultiViewDataset(views=views, labels=labels, view_names=["a", "b"])
        w = compute_view_weights(ds, q=2, sigma=1.0)
        assert np.all(np.isfinite(w.weights))
        assert abs(w.weights.sum() - 1.0) <= 1e-12

    def test_sample_permutation_invariance(self):
        rng = np.random.default_rng(3)
        views = [rng.random((9, 4)), rng.random((9, 3))]
        labels = (rng.random((9, 2)) < 0.5).astype(float)
        ds = MultiViewDataset(views=views, labels=labels, view_names=["a", "b"])
        perm = rng.permutation(9)
        ds_p = MultiViewDataset(views=[x[perm] for x in views],
                                labels=labels[perm], view_names=["a", "b"])
        w = compute_view_weights(ds, q=3, sigma=1.0)
        w_p = compute_view_weights(ds_p, q=3, sigma=1.0)
        np.testing.assert_allclose(w.weights, w_p.weights, rtol=1e-12)


class TestBuildFusion:
    def test_scalar_blocks(self):
        ds = MultiViewDataset(views=[np.array([[2.0], [2.0]]),
                                     np.array([[4.0], [4.0]])],
                              labels=np.array([[1.0], [0.0]]),
                              view_names=["a", "b"])
        w = ViewWeights(weights=np.array([0.5, 0.5]), traces=np.array([1.0, 1.0]))
        fusion = build_fusion(ds, w)
        np.testing.assert_allclose(fusion.data[0], [1.0, 2.0])
        assert fusion.block_offsets == [0, 1]

    def test_block_widths(self):
        rng = np.random.default_rng(4)
        ds = MultiViewDataset(views=[rng.random((5, 79)), rng.random((5, 24))],
                              labels=(rng.random((5, 14)) < 0.5).astype(float),
                              view_names=["GE", "PP"])
        fusion = build_fusion(ds, uniform_view_weights(2))
        assert fusion.data.shape == (5, 103)
        assert fusion.block_offsets == [0, 79]

    def test_uniform_weights_rescale_concatenation(self):
        rng = np.random.default_rng(5)
        views = [rng.random((6, 3)), rng.random((6, 2))]
        ds = MultiViewDataset(views=views,
                              labels=(rng.random((6, 2)) < 0.5).astype(float),
                              view_names=["a", "b"])
        fusion = build_fusion(ds, uniform_view_weights(2))
        np.testing.assert_allclose(fusion.data, 0.5 * np.hstack(views))

    def test_block_recovery(self):
        rng = np.random.default_rng(6)
        views = [rng.random((7, 4)), rng.random((7, 5))]
        ds = MultiViewDataset(views=views,
                              labels=(rng.random((7, 3)) < 0.5).astype(float),
                              view_names=["a", "b"])
        w = ViewWeights(weights=np.array([0.25, 0.75]),
                        traces=np.array([3.0, 1.0]))
        fusion = build_fusion(ds, w)
        for i, x in enumerate(views):
            np.testing.assert_allclose(fusion.block(i) / w.weights[i], x)

    def test_weight_count_mismatch(self):
        rng = np.random.default_rng(7)
        ds = MultiViewDataset(views=[rng.random((4, 2))],
                              labels=np.zeros((4, 1)), view_names=["a"])
        with pytest.raises(ValueError):
            build_fusion(ds, uniform_view_weights(2))


def test_weights_json_export(tmp_path):
    w = ViewWeights(weights=np.array([0.25, 0.75]), traces=np.array([4.0, 2.0]))
    out = tmp_path / "weights.json"
    save_view_weights_json(w, ["color", "texture"], out)
    payload = json.loads(out.read_text())
    assert payload == {"color": 0.25, "texture": 0.75}
