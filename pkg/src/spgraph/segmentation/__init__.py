"""Superpixel segmenters producing compact ``(H, W)`` integer label maps."""

from ._common import COLOR_RANGE, compact, num_segments
from .felzenszwalb import felzenszwalb
from .quickshift import (CIFAR10_PARAMS, MNIST_PARAMS, QuickshiftParams, QuickshiftTree,
                         quickshift, quickshift_tree)
from .slic import slic
from .stats import SegmentationStats, segmentation_stats

SEGMENTERS = ("quickshift", "slic", "felzenszwalb")


def segment(image, method="quickshift", **params):
    """Dispatch to a segmenter by name.

    ``quickshift`` takes ``epsilon``, ``alpha``, ``window``; ``slic`` takes
    ``n_segments``, ``compactness``; ``felzenszwalb`` takes ``scale``,
    ``min_size``.
    """
    if method == "quickshift":
        return quickshift(image, QuickshiftParams(**params))
    if method == "slic":
        return slic(image, **params)
    if method == "felzenszwalb":
        return felzenszwalb(image, **params)
    raise ValueError(f"unknown segmenter {method!r}")


__all__ = [
    "COLOR_RANGE", "CIFAR10_PARAMS", "MNIST_PARAMS", "QuickshiftParams", "QuickshiftTree",
    "SEGMENTERS", "SegmentationStats", "compact", "felzenszwalb", "num_segments",
    "quickshift", "quickshift_tree", "segment", "segmentation_stats", "slic",
]
