"""Felzenszwalb-Huttenlocher greedy graph segmentation on the 8-connected pixel grid."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ._common import COLOR_RANGE, as_hwc, compact


class _DisjointSet:
    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n
        self.internal = [0.0] * n

    def find(self, a):
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a, b, weight):
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        self.internal[a] = weight
        return a


def grid_edges(h, w, connectivity=8):
    """Pixel-pair edges ``(E, 2)`` of the grid as flat indices."""
    idx = np.arange(h * w).reshape(h, w)
    pairs = [
        (idx[:, :-1], idx[:, 1:]),
        (idx[:-1, :], idx[1:, :]),
    ]
    if connectivity == 8:
        pairs += [(idx[:-1, :-1], idx[1:, 1:]), (idx[:-1, 1:], idx[1:, :-1])]
    return np.concatenate([np.stack([a.ravel(), b.ravel()], 1) for a, b in pairs])


def felzenszwalb(image, scale=100.0, min_size=5):
    img = as_hwc(image)
    if not scale > 0:
        raise ParameterError(f"scale must be > 0, got {scale}")
    if int(min_size) != min_size or min_size < 1:
        raise ParameterError(f"min_size must be an integer >= 1, got {min_size}")
    h, w, c = img.shape
    color = img.reshape(-1, c) * COLOR_RANGE
    edges = grid_edges(h, w)
    weight = np.sqrt(((color[edges[:, 0]] - color[edges[:, 1]]) ** 2).sum(1))
    order = np.argsort(weight, kind="stable")
    edges = edges[order].tolist()
    weight = weight[order].tolist()

    ds = _DisjointSet(h * w)
    for (a, b), wt in zip(edges, weight):
        ra, rb = ds.find(a), ds.find(b)
        if ra == rb:
            continue
        if wt <= min(ds.internal[ra] + scale / ds.size[ra], ds.internal[rb] + scale / ds.size[rb]):
            ds.union(ra, rb, wt)

    for (a, b), wt in zip(edges, weight):
        ra, rb = ds.find(a), ds.find(b)
        if ra != rb and (ds.size[ra] < min_size or ds.size[rb] < min_size):
            ds.union(ra, rb, max(wt, ds.internal[ra], ds.internal[rb]))

    return compact(np.array([ds.find(i) for i in range(h * w)]).reshape(h, w))
