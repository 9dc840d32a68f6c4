from __future__ import annotations

import json
import time
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..errors import TrainingError
from .batch import make_batch
from .model import Model, ModelConfig, accuracy, cross_entropy, loss_and_grads, softmax
from .optim import Adam

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    epochs: int = 30
    batch_size: int = 64
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_check: bool = False

    def __post_init__(self):
        if not self.lr >= 0:
            raise ValueError(f"learning rate must be >= 0, got {self.lr}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")


@dataclass
class MetricRow:
    epoch: int
    split: str
    loss: float
    accuracy: float


def _batches(graphs, batch_size, order, dtype):
    for start in range(0, len(order), batch_size):
        yield make_batch([graphs[i] for i in order[start:start + batch_size]], dtype)


def gradient_check(model: Model, batch, step=1e-4, params=None):
    """Largest relative error between backprop and central finite differences."""
    _, _, grads = loss_and_grads(model, batch)
    grads = {k: v.copy() for k, v in grads.items()}
    worst = 0.0
    for name, p in model.parameters().items():
        if params is not None and name not in params:
            continue
        for idx in np.ndindex(p.shape):
            orig = p[idx]
            p[idx] = orig + step
            up = cross_entropy(softmax(model.forward(batch)), batch.labels)
            p[idx] = orig - step
            down = cross_entropy(softmax(model.forward(batch)), batch.labels)
            p[idx] = orig
            num = (up - down) / (2 * step)
            ana = float(grads[name][idx])
            denom = max(abs(num), abs(ana), 1e-10)
            worst = max(worst, abs(num - ana) / denom if denom > 1e-10 else 0.0)
    return worst


def evaluate(model: Model, graphs: Sequence, batch_size=256):
    """Accuracy, mean loss and per-class accuracy over ``graphs``."""
    t0 = time.perf_counter()
    logits = []
    order = np.arange(len(graphs))
    for batch in _batches(graphs, batch_size, order, model.dtype):
        logits.append(model.forward(batch).astype(np.float64))
    logits = np.concatenate(logits)
    labels = np.array([g.label for g in graphs], dtype=np.int64)
    pred = np.argmax(logits, axis=1)
    per_class = {}
    for c in range(model.config.num_classes):
        mask = labels == c
        if mask.any():
            per_class[c] = float(np.mean(pred[mask] == c))
    return {
        "accuracy": accuracy(logits, labels),
        "loss": cross_entropy(softmax(logits), labels),
        "per_class_accuracy": per_class,
        "num_samples": len(graphs),
        "seconds": time.perf_counter() - t0,
    }


def train(model: Model, train_set: Sequence, val_set: Optional[Sequence], config: TrainConfig,
          log=None):
    """Mini-batch Adam on mean cross-entropy.

    Returns ``(model, rows)`` where ``rows`` holds one train row (and one
    validation row when ``val_set`` is given) per epoch.  The shuffle order
    depends only on ``config.seed``.
    """
    if not train_set:
        raise ValueError("empty training set")
    f = train_set[0].num_features
    if f != model.config.in_features:
        raise ValueError(f"graphs carry {f} features, model expects {model.config.in_features}")
    if config.grad_check:
        err = gradient_check(model, make_batch(list(train_set[:2]), model.dtype))
        if err > 1e-4:
            raise TrainingError(f"gradient check failed: relative error {err:.3g}", epoch=0)
    rng = np.random.default_rng(config.seed)
    opt = Adam(model.parameters(), config.lr, config.beta1, config.beta2, config.adam_eps)
    rows: List[MetricRow] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_set))
        total_loss = 0.0
        correct = 0.0
        for batch in _batches(train_set, config.batch_size, order, model.dtype):
            loss, logits, grads = loss_and_grads(model, batch)
            if not np.isfinite(loss):
                raise TrainingError(f"loss became {loss} in epoch {epoch}", epoch=epoch)
            opt.step(grads)
            total_loss += loss * batch.num_graphs
            correct += accuracy(logits, batch.labels) * batch.num_graphs
        rows.append(MetricRow(epoch, "train", total_loss / len(train_set), correct / len(train_set)))
        if val_set:
            ev = evaluate(model, val_set)
            rows.append(MetricRow(epoch, "validation", ev["loss"], ev["accuracy"]))
        if log is not None:
            log(" ".join(f"{r.split}: loss={r.loss:.4f} acc={r.accuracy:.4f}"
                         for r in rows if r.epoch == epoch) + f" [epoch {epoch}]")
    return model, rows


def write_metrics(path, rows: Sequence[MetricRow]):
    lines = ["epoch,split,loss,accuracy"]
    lines += [f"{r.epoch},{r.split},{r.loss!r},{r.accuracy!r}" for r in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_metrics(path):
    rows = []
    for line in Path(path).read_text().splitlines()[1:]:
        e, s, l, a = line.split(",")
        rows.append(MetricRow(int(e), s, float(l), float(a)))
    return rows


def save_model(path, model: Model):
    """Write an ``.npz`` archive readable by :func:`numpy.load`.

    Zip entries carry a fixed timestamp so identical models give identical bytes.
    """
    meta = {"version": CHECKPOINT_VERSION, "config": model.config.to_dict()}
    arrays = {"__meta__": np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)}
    arrays.update({f"param/{k}": v for k, v in model.parameters().items()})
    with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
        for name, arr in arrays.items():
            with zf.open(zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0)), "w") as fh:
                np.lib.format.write_array(fh, np.ascontiguousarray(arr), allow_pickle=False)


def load_model(path) -> Model:
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {meta.get('version')}")
        model = Model(ModelConfig(**meta["config"]))
        params = model.parameters()
        for name, arr in params.items():
            stored = data[f"param/{name}"]
            if stored.shape != arr.shape:
                raise ValueError(f"{path}: {name} has shape {stored.shape}, expected {arr.shape}")
            arr[...] = stored
    return model
