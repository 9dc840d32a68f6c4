"""Graph classifier: graph-conv layers, sum readout, MLP head, losses and metrics."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from .batch import Batch, as_batch
from .layers import ChebConv, Dense, SpatialConv

LAYER_KINDS = ("cheb", "spatial")
PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "cheb"
    in_features: int = 4
    hidden: Tuple[int, ...] = (32, 64)
    mlp_hidden: Tuple[int, ...] = (64,)
    num_classes: int = 10
    order: int = 3
    activation: str = "relu"
    seed: int = 0
    dtype: str = "float64"

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"kind must be one of {LAYER_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        object.__setattr__(self, "mlp_hidden", tuple(int(h) for h in self.mlp_hidden))

    def to_dict(self):
        d = asdict(self)
        d["hidden"], d["mlp_hidden"] = list(self.hidden), list(self.mlp_hidden)
        return d


class Model:
    """Message passing + ``MLP(sum_v h_v)`` readout.

    For ``spatial`` layers the message from ``w`` to ``v`` is ``h_w / |N(v)|``,
    aggregation sums them and the update is ``act(W1 h_v + W2 a_v + b)``.
    For ``cheb`` layers propagation is a K-term Chebyshev polynomial of the
    normalized Laplacian.
    """

    def __init__(self, config: ModelConfig):
        self.config = config
        dtype = np.dtype(config.dtype).type
        rng = np.random.default_rng(config.seed)
        self.convs = []
        f = config.in_features
        for width in config.hidden:
            if config.kind == "cheb":
                self.convs.append(ChebConv(f, width, config.order, rng, config.activation, dtype))
            else:
                self.convs.append(SpatialConv(f, width, rng, config.activation, dtype))
            f = width
        self.head = []
        for width in config.mlp_hidden:
            self.head.append(Dense(f, width, rng, "relu", dtype))
            f = width
        self.head.append(Dense(f, config.num_classes, rng, "identity", dtype))
        self._batch = None

    @property
    def dtype(self):
        return np.dtype(self.config.dtype).type

    @property
    def layers(self):
        return self.convs + self.head

    def named_layers(self):
        for i, layer in enumerate(self.convs):
            yield f"conv{i}", layer
        for i, layer in enumerate(self.head):
            yield f"mlp{i}", layer

    def parameters(self):
        """Flat ``{name: array}`` view of every parameter (arrays are live)."""
        return {f"{ln}.{pn}": arr for ln, layer in self.named_layers() for pn, arr in layer.params.items()}

    def gradients(self):
        return {f"{ln}.{pn}": layer.grads[pn] for ln, layer in self.named_layers() for pn in layer.params}

    def zero_grad(self):
        for layer in self.layers:
            layer.zero_grad()

    def forward(self, batch: Batch):
        if batch.x.shape[1] != self.config.in_features:
            raise ValueError(f"model expects {self.config.in_features} node features, "
                             f"batch has {batch.x.shape[1]}")
        h = batch.x.astype(self.dtype, copy=False)
        for conv in self.convs:
            h = conv.forward(h, batch)
        pooled = batch.pool @ h
        for layer in self.head:
            pooled = layer.forward(pooled)
        self._batch = batch
        return pooled

    def backward(self, dlogits):
        """Accumulate parameter gradients for ``dloss/dlogits``."""
        g = dlogits
        for layer in reversed(self.head):
            g = layer.backward(g)
        g = self._batch.pool_T @ g
        for i in range(len(self.convs) - 1, -1, -1):
            g = self.convs[i].backward(g, need_input_grad=i > 0)
        return self.gradients()


def forward(graph_or_batch, model: Model):
    return model.forward(as_batch(graph_or_batch, model.dtype))


def softmax(y):
    y = np.asarray(y, dtype=np.float64)
    z = np.exp(y - y.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def _check_targets(targets, num_classes):
    targets = np.asarray(targets, dtype=np.int64).ravel()
    if targets.size and (targets.min() < 0 or targets.max() >= num_classes):
        raise ValueError(f"class index outside [0, {num_classes})")
    return targets


def cross_entropy(pred, targets):
    """Mean of ``-log p[target]`` with probabilities clamped below at 1e-12."""
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    targets = _check_targets(targets, pred.shape[1])
    if len(targets) != len(pred):
        raise ValueError("one target per prediction row required")
    picked = pred[np.arange(len(targets)), targets]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def cross_entropy_grad(logits, targets):
    """``d cross_entropy(softmax(logits)) / d logits``."""
    p = softmax(logits)
    targets = _check_targets(targets, p.shape[1])
    rows = np.arange(len(targets))
    live = p[rows, targets] >= PROB_FLOOR
    g = p.copy()
    g[rows, targets] -= 1.0
    g[~live] = 0.0
    return g / len(targets)


def accuracy(preds, targets):
    """Fraction of rows whose argmax (first index on ties) equals the target."""
    preds = np.atleast_2d(np.asarray(preds))
    if preds.shape[0] == 0:
        raise ValueError("accuracy of an empty batch is undefined")
    targets = _check_targets(targets, preds.shape[1])
    return float(np.mean(np.argmax(preds, axis=1) == targets))


def loss_and_grads(model: Model, batch: Batch):
    if batch.labels is None:
        raise ValueError("batch has no labels")
    logits = model.forward(batch)
    loss = cross_entropy(softmax(logits), batch.labels)
    model.zero_grad()
    grads = model.backward(cross_entropy_grad(logits, batch.labels).astype(model.dtype))
    return loss, logits, grads


def backward(model: Model, batch: Batch):
    """Gradients of the mean cross-entropy over ``batch`` for every parameter."""
    return loss_and_grads(model, batch)[2]
