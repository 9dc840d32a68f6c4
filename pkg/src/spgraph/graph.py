"""Graph construction from label maps and images.

A :class:`SuperpixelGraph` stores undirected edges once, as ``(a, b)`` rows
with ``a < b``, sorted lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError
from .segmentation import num_segments


def canonical_edges(a, b, num_nodes=None):
    """Undirected, de-duplicated, self-loop-free edge array from endpoint lists."""
    a = np.asarray(a, dtype=np.int64).ravel()
    b = np.asarray(b, dtype=np.int64).ravel()
    keep = a != b
    lo, hi = np.minimum(a[keep], b[keep]), np.maximum(a[keep], b[keep])
    if lo.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    width = int(num_nodes if num_nodes is not None else hi.max() + 1)
    key = np.unique(lo * width + hi)
    return np.stack([key // width, key % width], axis=1)


@dataclass(frozen=True)
class SuperpixelGraph:
    num_nodes: int
    edges: np.ndarray
    features: np.ndarray
    label: Optional[int] = None
    _degrees: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim == 1:
            feats = feats[:, None]
        if feats.shape[0] != self.num_nodes:
            raise ValueError(f"{feats.shape[0]} feature rows for {self.num_nodes} nodes")
        if len(edges):
            if (edges[:, 0] == edges[:, 1]).any():
                raise ValueError("self-loop in edge list")
            if edges.min() < 0 or edges.max() >= self.num_nodes:
                raise ValueError("edge endpoint out of range")
            if len(canonical_edges(edges[:, 0], edges[:, 1], self.num_nodes)) != len(edges):
                raise ValueError("duplicate edge in edge list")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "_degrees",
                           np.bincount(edges.ravel(), minlength=self.num_nodes))

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_features(self):
        return self.features.shape[1]

    def degrees(self):
        return self._degrees

    def edge_set(self):
        return {(int(a), int(b)) for a, b in self.edges}

    def with_label(self, label):
        return SuperpixelGraph(self.num_nodes, self.edges, self.features, label)

    def characteristics(self):
        """Scalars needed to store the graph: node features plus edge endpoints."""
        return self.num_nodes * self.num_features + 2 * self.num_edges


def _check_labels(image, labels):
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    labels = np.asarray(labels)
    if labels.shape != img.shape[:2]:
        raise ValueError(f"label map {labels.shape} does not match image {img.shape[:2]}")
    return img, labels


def node_features(image, labels):
    """Per-segment ``[mean color per channel, x/W, y/H, pixels/(H*W)]``.

    Pixel ``(x, y)`` contributes its integer column/row index to the centroid.
    """
    img, labels = _check_labels(image, labels)
    h, w, c = img.shape
    m = num_segments(labels)
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=m).astype(np.float64)
    feats = np.empty((m, c + 3))
    for k in range(c):
        feats[:, k] = np.bincount(flat, img[:, :, k].ravel(), m) / counts
    ys, xs = np.indices((h, w))
    feats[:, c] = np.bincount(flat, xs.ravel(), m) / counts / w
    feats[:, c + 1] = np.bincount(flat, ys.ravel(), m) / counts / h
    feats[:, c + 2] = counts / (h * w)
    return feats


def rag_edges(labels):
    labels = np.asarray(labels)
    a = np.concatenate([labels[:, :-1].ravel(), labels[:-1, :].ravel()])
    b = np.concatenate([labels[:, 1:].ravel(), labels[1:, :].ravel()])
    return canonical_edges(a, b, num_segments(labels))


def build_rag(image, labels, label=None):
    """Region adjacency graph: one node per segment, an edge per 4-adjacent segment pair."""
    img, labels = _check_labels(image, labels)
    return SuperpixelGraph(num_segments(labels), rag_edges(labels), node_features(img, labels), label)


def build_knn_graph(centroids, k, features=None, label=None):
    """Connect every node to its ``k`` nearest centroids (union-symmetrized).

    Distance ties go to the smaller node id.
    """
    pts = np.asarray(centroids, dtype=np.float64).reshape(len(centroids), -1)
    m = len(pts)
    if k < 0 or k >= max(m, 1):
        raise ParameterError(f"k must satisfy 0 <= k < num_nodes ({m}), got {k}")
    feats = pts if features is None else features
    if k == 0:
        return SuperpixelGraph(m, np.zeros((0, 2), np.int64), feats, label)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    # Stable sort on distance keeps candidates in id order among ties.
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    src = np.repeat(np.arange(m), k)
    return SuperpixelGraph(m, canonical_edges(src, nearest.ravel(), m), feats, label)


def build_knn_from_labels(image, labels, k, label=None):
    feats = node_features(image, labels)
    c = feats.shape[1] - 3
    return build_knn_graph(feats[:, c:c + 2], k, feats, label)


def build_pixel_grid_graph(image, label=None):
    """One node per pixel with ``[channels..., x/W, y/H]`` features, 4-adjacency edges."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    h, w, c = img.shape
    if h == 0 or w == 0:
        raise ValueError("empty image")
    ys, xs = np.indices((h, w))
    feats = np.concatenate([img.reshape(-1, c), (xs / w).reshape(-1, 1), (ys / h).reshape(-1, 1)], 1)
    return SuperpixelGraph(h * w, rag_edges(np.arange(h * w).reshape(h, w)), feats, label)


GRAPH_KINDS = ("rag", "knn", "pixel")


def build_graph(image, labels=None, kind="rag", k=8, label=None):
    if kind == "rag":
        return build_rag(image, labels, label)
    if kind == "knn":
        m = num_segments(labels)
        return build_knn_from_labels(image, labels, min(k, m - 1), label)
    if kind == "pixel":
        return build_pixel_grid_graph(image, label)
    raise ValueError(f"unknown graph kind {kind!r}")


def adjacency_and_degree(graph: SuperpixelGraph):
    """Binary symmetric adjacency ``M`` and diagonal degree ``D`` as CSR matrices."""
    m = graph.num_nodes
    e = graph.edges
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    deg = sp.diags(graph.degrees().astype(np.float64), format="csr")
    return adj, deg
