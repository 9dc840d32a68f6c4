"""Quickshift mode seeking over joint color/position features.

Each pixel ``p`` gets the feature ``(alpha * COLOR_RANGE * color, y, x)``.
A Gaussian Parzen density is accumulated over the pixel's window, every
pixel links to the closest window neighbour of higher density, and links
longer than the window diagonal are cut.  The roots of the resulting forest
are the superpixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ._common import COLOR_RANGE, as_hwc, compact, roots


@dataclass(frozen=True)
class QuickshiftParams:
    epsilon: float
    alpha: float = 1.0
    window: int = 2

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be >= 0, got {self.alpha}")
        if int(self.window) != self.window or self.window < 1:
            raise ParameterError(f"window must be an integer >= 1, got {self.window}")

    @property
    def radius(self):
        # Half-width of the square window; S = 2 gives the 3x3 neighbourhood.
        return max(1, int(self.window) // 2)

    @property
    def max_dist(self):
        return self.window * math.sqrt(2.0)


# Reference settings for the two datasets.
MNIST_PARAMS = QuickshiftParams(epsilon=2.0, alpha=1.0, window=2)
CIFAR10_PARAMS = QuickshiftParams(epsilon=1.0, alpha=1.0, window=5)


@dataclass
class QuickshiftTree:
    density: np.ndarray   # (H, W)
    parent: np.ndarray    # (H*W,) flat index of parent; self for roots
    link_dist: np.ndarray  # (H, W) feature distance to parent, 0 for roots


def _shifted(padded, r, dy, dx, h, w):
    return padded[r + dy:r + dy + h, r + dx:r + dx + w]


def quickshift_tree(image, params: QuickshiftParams) -> QuickshiftTree:
    img = as_hwc(image)
    h, w, _ = img.shape
    r = params.radius
    color = img * (params.alpha * COLOR_RANGE)
    offsets = [(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)]

    # NaN padding marks out-of-image neighbours; they contribute no density.
    cpad = np.pad(color, ((r, r), (r, r), (0, 0)), constant_values=np.nan)
    dist2 = {}
    density = np.zeros((h, w))
    inv = 1.0 / (2.0 * params.epsilon ** 2)
    for dy, dx in offsets:
        d2 = ((_shifted(cpad, r, dy, dx, h, w) - color) ** 2).sum(axis=2) + (dy * dy + dx * dx)
        dist2[dy, dx] = d2
        density += np.where(np.isnan(d2), 0.0, np.exp(-d2 * inv))

    index = np.arange(h * w).reshape(h, w)
    dpad = np.pad(density, r, constant_values=-np.inf)
    ipad = np.pad(index, r, constant_values=-1)
    best = np.full((h, w), np.inf)
    parent = index.copy()
    limit = params.max_dist ** 2
    # Offsets run in (dy, dx) order and a candidate must be strictly closer to
    # replace the incumbent, so distance ties go to the smallest (y, x).
    for dy, dx in offsets:
        if dy == 0 and dx == 0:
            continue
        qd = _shifted(dpad, r, dy, dx, h, w)
        qi = _shifted(ipad, r, dy, dx, h, w)
        d2 = dist2[dy, dx]
        # Equal densities are ordered by scan position: earlier pixel ranks higher.
        higher = (qd > density) | ((qd == density) & (qi >= 0) & (qi < index))
        take = higher & (d2 < best) & (d2 <= limit)
        best = np.where(take, d2, best)
        parent = np.where(take, qi, parent)

    link = np.where(np.isfinite(best), np.sqrt(np.where(np.isfinite(best), best, 0.0)), 0.0)
    return QuickshiftTree(density=density, parent=parent.ravel(), link_dist=link)


def quickshift(image, params: QuickshiftParams) -> np.ndarray:
    """Segment ``image`` into a compact ``(H, W)`` label map."""
    img = as_hwc(image)
    tree = quickshift_tree(img, params)
    return compact(roots(tree.parent).reshape(img.shape[:2]))
