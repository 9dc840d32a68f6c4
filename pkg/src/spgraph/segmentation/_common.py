from __future__ import annotations

import numpy as np

# Color channels arrive in [0, 1]; segmenters measure color on a 0-100 scale
# (the lightness range of CIELAB) so spatial pixel units and color units are
# commensurate at alpha = 1.
COLOR_RANGE = 100.0


def as_hwc(image):
    """View a 2-D or 3-D image as float64 ``(H, W, C)``."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError(f"expected a non-empty (H, W[, C]) image, got shape {np.shape(image)}")
    return img


def compact(labels):
    """Relabel arbitrary integer ids to ``0..k-1``, ordered by first appearance in scan order."""
    flat = np.asarray(labels).ravel()
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first, kind="stable"), kind="stable")
    return order[inverse].reshape(np.shape(labels)).astype(np.int64)


def num_segments(labels):
    return int(np.max(labels)) + 1


def roots(parent):
    """Follow parent pointers to their fixed points (pointer jumping)."""
    par = np.asarray(parent).copy()
    while True:
        nxt = par[par]
        if np.array_equal(nxt, par):
            return par
        par = nxt
