import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from spgraph.errors import ParameterError
from spgraph.graph import (SuperpixelGraph, adjacency_and_degree, build_graph, build_knn_graph,
                           build_pixel_grid_graph, build_rag, canonical_edges, node_features)
from spgraph.segmentation import compact

from conftest import path_graph

label_maps = arrays(np.int64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
                    elements=st.integers(0, 5)).map(compact)


def pixel_pairs(labels):
    """Every unordered pair of distinct labels that touch 4-adjacently, by scanning pixels."""
    h, w = labels.shape
    out = set()
    for y in range(h):
        for x in range(w):
            for yy, xx in ((y + 1, x), (y, x + 1), (y - 1, x), (y, x - 1)):
                if 0 <= yy < h and 0 <= xx < w and labels[y, x] != labels[yy, xx]:
                    a, b = sorted((int(labels[y, x]), int(labels[yy, xx])))
                    out.add((a, b))
    return out


def test_rag_single_segment():
    g = build_rag(np.zeros((3, 3)), np.zeros((3, 3), int))
    assert (g.num_nodes, g.num_edges) == (1, 0)


def test_rag_four_labels():
    g = build_rag(np.zeros((2, 2)), np.array([[0, 1], [2, 3]]))
    assert g.num_nodes == 4
    assert g.edge_set() == {(0, 1), (0, 2), (1, 3), (2, 3)}


@given(label_maps)
def test_rag_matches_pixel_scan(labels):
    g = build_rag(np.zeros(labels.shape), labels)
    assert g.edge_set() == pixel_pairs(labels)
    assert g.num_nodes == labels.max() + 1


@given(label_maps)
def test_rag_connected(labels):
    from scipy.sparse.csgraph import connected_components
    g = build_rag(np.zeros(labels.shape), labels)
    adj, _ = adjacency_and_degree(g)
    assert connected_components(adj, directed=False)[0] == 1


@given(label_maps, st.randoms(use_true_random=False))
def test_permutation_consistency(labels, rnd):
    img = np.random.default_rng(0).random(labels.shape + (3,))
    m = labels.max() + 1
    perm = list(range(m))
    rnd.shuffle(perm)
    perm = np.array(perm)
    g1 = build_rag(img, labels)
    g2 = build_rag(img, perm[labels])
    assert {tuple(sorted((perm[a], perm[b]))) for a, b in g1.edge_set()} == g2.edge_set()
    assert np.allclose(g2.features[perm], g1.features)


def test_node_features_constant_and_sizes():
    img = np.full((4, 5, 3), 0.3)
    labels = np.array([[0, 0, 1, 1, 2]] * 4)
    f = node_features(img, labels)
    assert f.shape == (3, 6)
    assert np.allclose(f[:, :3], 0.3)
    assert abs(f[:, 5].sum() - 1) <= 1e-6


def test_left_half_centroid_integer_index():
    labels = np.zeros((4, 4), int)
    labels[:, 2:] = 1
    f = node_features(np.zeros((4, 4)), labels)
    # pixel x in {0, 1} -> mean 0.5 -> 0.5 / 4
    assert f[0, 1] == pytest.approx(0.125)
    assert f[0, 2] == pytest.approx(1.5 / 4)
    assert f[1, 1] == pytest.approx(2.5 / 4)


@given(label_maps)
def test_node_feature_ranges(labels):
    img = np.random.default_rng(1).random(labels.shape)
    f = node_features(img, labels)
    assert f.shape[1] == 1 + 3
    assert np.all((f[:, 1:3] >= 0) & (f[:, 1:3] <= 1))
    assert abs(f[:, 3].sum() - 1) <= 1e-6


def test_knn_examples():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert build_knn_graph(pts, 0).num_edges == 0
    assert build_knn_graph(pts, 1).edge_set() == {(0, 1), (1, 2)}
    full = build_knn_graph(np.random.default_rng(0).random((6, 2)), 5)
    assert full.edge_set() == set(itertools.combinations(range(6), 2))
    with pytest.raises(ParameterError):
        build_knn_graph(pts, 3)
    with pytest.raises(ParameterError):
        build_knn_graph(pts, -1)


@given(st.integers(2, 12), st.integers(0, 11), st.integers(0, 1000))
def test_knn_brute_force(m, k, seed):
    k = min(k, m - 1)
    pts = np.random.default_rng(seed).integers(0, 4, (m, 2)).astype(float)  # many distance ties
    want = set()
    for v in range(m):
        others = sorted((u for u in range(m) if u != v),
                        key=lambda u: (np.sum((pts[u] - pts[v]) ** 2), u))
        want |= {tuple(sorted((v, u))) for u in others[:k]}
    g = build_knn_graph(pts, k)
    assert g.edge_set() == want
    assert np.all(g.degrees() >= k)


@pytest.mark.parametrize("h,w,edges", [(1, 1, 0), (2, 2, 4), (3, 3, 12)])
def test_pixel_grid_examples(h, w, edges):
    g = build_pixel_grid_graph(np.zeros((h, w)))
    assert (g.num_nodes, g.num_edges) == (h * w, edges)


@given(st.integers(1, 12), st.integers(1, 12), st.sampled_from([1, 3]))
def test_pixel_grid_edge_formula(h, w, c):
    g = build_pixel_grid_graph(np.zeros((h, w, c)))
    assert g.num_edges == h * (w - 1) + w * (h - 1)
    assert g.num_features == c + 2


def test_adjacency_and_degree():
    adj, deg = adjacency_and_degree(SuperpixelGraph(3, np.zeros((0, 2)), np.zeros((3, 1))))
    assert adj.nnz == 0 and deg.count_nonzero() == 0
    adj, deg = adjacency_and_degree(path_graph(3))
    assert deg.diagonal().tolist() == [1, 2, 1]
    assert np.array_equal(np.asarray(adj.sum(1)).ravel(), deg.diagonal())
    assert (adj != adj.T).nnz == 0


@pytest.mark.parametrize("edges", [[[0, 0]], [[0, 3]], [[0, 1], [1, 0]], [[-1, 1]]])
def test_graph_validation(edges):
    with pytest.raises(ValueError):
        SuperpixelGraph(3, np.array(edges), np.zeros((3, 2)))


def test_canonical_edges():
    e = canonical_edges([2, 0, 1, 1], [0, 2, 1, 2])
    assert e.tolist() == [[0, 2], [1, 2]]


def test_build_graph_kinds():
    img = np.random.default_rng(0).random((5, 5))
    labels = np.repeat(np.arange(5)[:, None], 5, 1)
    assert build_graph(img, labels, "rag", label=3).label == 3
    assert build_graph(img, labels, "knn", k=50).num_edges == 10  # k clamped to m - 1
    assert build_graph(img, None, "pixel").num_nodes == 25
    with pytest.raises(ValueError):
        build_graph(img, labels, "object")


def test_characteristics():
    g = build_rag(np.zeros((2, 2)), np.array([[0, 1], [2, 3]]))
    assert g.characteristics() == 4 * 4 + 2 * 4
