"""Image set -> label maps -> graphs, plus dataset-level reporting."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .graph import build_graph
from .segmentation import CIFAR10_PARAMS, MNIST_PARAMS, segment, segmentation_stats

DEFAULT_QUICKSHIFT = {
    "mnist": MNIST_PARAMS,
    "cifar10": CIFAR10_PARAMS,
}


def quickshift_kwargs(dataset):
    p = DEFAULT_QUICKSHIFT[dataset]
    return {"epsilon": p.epsilon, "alpha": p.alpha, "window": p.window}


def _map(fn, items, workers):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def segment_images(images, method="quickshift", workers=1, **params):
    return _map(lambda img: segment(img, method, **params), images, workers)


def build_graphs(images, label_maps, labels=None, kind="rag", k=8, workers=1):
    labels = [None] * len(images) if labels is None else [int(y) for y in labels]
    return _map(lambda t: build_graph(t[0], t[1], kind, k, t[2]),
                list(zip(images, label_maps, labels)), workers)


def image_set_to_graphs(dataset, method="quickshift", kind="rag", k=8, workers=1, **params):
    """Segment every image of a :class:`LabeledImageSet` and build its graphs."""
    maps = segment_images(dataset.images, method, workers, **params)
    return maps, build_graphs(dataset.images, maps, dataset.labels, kind, k, workers)


def data_reduction(graphs, raw_features):
    """Mean stored scalars per graph and the saving relative to ``raw_features``."""
    counts = np.array([g.characteristics() for g in graphs], dtype=np.float64)
    mean = float(counts.mean())
    return {"mean_characteristics": mean, "raw_features": int(raw_features),
            "reduction": 1.0 - mean / raw_features}


def dataset_report(label_maps, graphs=None):
    return segmentation_stats(label_maps, graphs).to_dict()
