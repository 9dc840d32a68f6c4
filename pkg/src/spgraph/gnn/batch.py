from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from ..spectral import inv_sqrt_degree


@dataclass
class Batch:
    """Block-diagonal union of graphs.

    ``graph_ids`` maps each stacked node to its graph and is non-decreasing;
    edges are shifted by each graph's node offset so none crosses graphs.
    """
    x: np.ndarray
    edges: np.ndarray
    graph_ids: np.ndarray
    num_graphs: int
    labels: Optional[np.ndarray] = None
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def num_nodes(self):
        return self.x.shape[0]

    def _adjacency(self):
        if "adj" not in self._ops:
            n = self.num_nodes
            e = self.edges
            rows = np.concatenate([e[:, 0], e[:, 1]])
            cols = np.concatenate([e[:, 1], e[:, 0]])
            adj = sp.csr_matrix((np.ones(len(rows), dtype=self.x.dtype), (rows, cols)), shape=(n, n))
            self._ops["adj"] = adj
            self._ops["deg"] = np.bincount(rows, minlength=n).astype(self.x.dtype)
        return self._ops["adj"], self._ops["deg"]

    @property
    def mean_adjacency(self):
        """``D^-1 M``: row ``v`` averages over the neighbours of ``v`` (zero row if isolated)."""
        if "mean" not in self._ops:
            adj, deg = self._adjacency()
            inv = np.zeros_like(deg)
            np.divide(1.0, deg, out=inv, where=deg > 0)
            self._ops["mean"] = sp.csr_matrix(sp.diags(inv) @ adj)
            self._ops["mean_T"] = sp.csr_matrix(self._ops["mean"].T)
        return self._ops["mean"]

    @property
    def mean_adjacency_T(self):
        self.mean_adjacency
        return self._ops["mean_T"]

    @property
    def scaled_laplacian(self):
        """``2 L / 2 - I`` for the normalized Laplacian (lambda_max fixed at 2)."""
        if "lhat" not in self._ops:
            adj, deg = self._adjacency()
            s = inv_sqrt_degree(deg).astype(self.x.dtype)
            isolated = (deg == 0).astype(self.x.dtype)
            self._ops["lhat"] = sp.csr_matrix(-(sp.diags(s) @ adj @ sp.diags(s)) - sp.diags(isolated))
        return self._ops["lhat"]

    @property
    def pool(self):
        """``(G, N)`` indicator summing node rows into their graph."""
        if "pool" not in self._ops:
            n = self.num_nodes
            self._ops["pool"] = sp.csr_matrix(
                (np.ones(n, dtype=self.x.dtype), (self.graph_ids, np.arange(n))),
                shape=(self.num_graphs, n))
            self._ops["pool_T"] = sp.csr_matrix(self._ops["pool"].T)
        return self._ops["pool"]

    @property
    def pool_T(self):
        self.pool
        return self._ops["pool_T"]


def make_batch(graphs: Sequence, dtype=np.float64) -> Batch:
    sizes = np.array([g.num_nodes for g in graphs], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    x = np.concatenate([np.asarray(g.features, dtype=dtype) for g in graphs], axis=0)
    edges = np.concatenate([g.edges + off for g, off in zip(graphs, offsets)], axis=0) \
        if len(graphs) else np.zeros((0, 2), np.int64)
    gids = np.repeat(np.arange(len(graphs)), sizes)
    labels = None
    if all(g.label is not None for g in graphs):
        labels = np.array([g.label for g in graphs], dtype=np.int64)
    return Batch(x=x, edges=edges.reshape(-1, 2), graph_ids=gids, num_graphs=len(graphs), labels=labels)


def as_batch(graph_or_batch, dtype=np.float64) -> Batch:
    if isinstance(graph_or_batch, Batch):
        return graph_or_batch
    if isinstance(graph_or_batch, (list, tuple)):
        return make_batch(graph_or_batch, dtype)
    return make_batch([graph_or_batch], dtype)
