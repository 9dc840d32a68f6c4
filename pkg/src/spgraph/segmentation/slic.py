"""SLIC: k-means in (color, position) space seeded on a regular grid."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ..errors import ParameterError
from ._common import COLOR_RANGE, as_hwc, compact

_FOUR = ndimage.generate_binary_structure(2, 1)


def _grid(h, w, n_segments):
    ny = min(n_segments, h, max(1, math.ceil(math.sqrt(n_segments * h / w))))
    nx = min(w, max(1, n_segments // ny))
    ys = (np.arange(ny) + 0.5) * h / ny - 0.5
    xs = (np.arange(nx) + 0.5) * w / nx - 0.5
    yy, xx = np.meshgrid(np.round(ys), np.round(xs), indexing="ij")
    return np.stack([yy.ravel(), xx.ravel()], axis=1)


def slic(image, n_segments=100, compactness=10.0, max_iter=10, enforce_connectivity=True):
    img = as_hwc(image)
    h, w, c = img.shape
    if n_segments < 1:
        raise ParameterError(f"n_segments must be >= 1, got {n_segments}")
    if n_segments > h * w:
        raise ParameterError(f"n_segments={n_segments} exceeds pixel count {h * w}")
    if compactness < 0:
        raise ParameterError(f"compactness must be >= 0, got {compactness}")

    step = math.sqrt(h * w / n_segments)
    color = img.reshape(-1, c) * COLOR_RANGE
    yx = np.indices((h, w)).reshape(2, -1).T.astype(np.float64)

    pos = _grid(h, w, n_segments)
    cidx = pos[:, 0].astype(int) * w + pos[:, 1].astype(int)
    ccolor = color[cidx].copy()
    spatial_w = (compactness / step) ** 2

    assign = np.zeros(h * w, dtype=np.int64)
    for it in range(max_iter):
        dyx = np.abs(yx[:, None, :] - pos[None, :, :])
        d = ((color[:, None, :] - ccolor[None, :, :]) ** 2).sum(-1) + spatial_w * (dyx ** 2).sum(-1)
        in_reach = (dyx <= step).all(-1)
        # Pixels no centre reaches fall back to the unrestricted nearest centre.
        d = np.where(in_reach | ~in_reach.any(1, keepdims=True), d, np.inf)
        new = np.argmin(d, axis=1)
        if it > 0 and np.array_equal(new, assign):
            break
        assign = new
        counts = np.bincount(assign, minlength=len(pos))
        live = counts > 0
        for k in range(c):
            ccolor[live, k] = np.bincount(assign, color[:, k], len(pos))[live] / counts[live]
        for k in range(2):
            pos[live, k] = np.bincount(assign, yx[:, k], len(pos))[live] / counts[live]

    labels = assign.reshape(h, w)
    if enforce_connectivity:
        labels = _merge_orphans(labels)
    return compact(labels)


def _merge_orphans(labels):
    """Keep each cluster's largest 4-connected piece; fold the other pieces
    into the largest segment they touch."""
    h, w = labels.shape
    comp = np.zeros((h, w), dtype=np.int64)
    seg_of = [0]   # component id -> segment id (index 0 unused)
    sizes = [0]
    nxt = 1
    for lab in np.unique(labels):
        pieces, n = ndimage.label(labels == lab, structure=_FOUR)
        comp[pieces > 0] = pieces[pieces > 0] + nxt - 1
        seg_of.extend([int(lab)] * n)
        sizes.extend(np.bincount(pieces.ravel(), minlength=n + 1)[1:].tolist())
        nxt += n
    seg_of = np.array(seg_of)
    sizes = np.array(sizes)

    keep = np.zeros(nxt, dtype=bool)
    for lab in np.unique(seg_of[1:]):
        ids = np.flatnonzero(seg_of == lab)
        ids = ids[ids > 0]
        keep[ids[np.argmax(sizes[ids])]] = True

    owner = np.where(keep, seg_of, -1)
    seg_size = {int(s): int(sizes[(seg_of == s) & keep].sum()) for s in np.unique(seg_of[1:])}
    pairs = np.concatenate([
        np.stack([comp[:, :-1].ravel(), comp[:, 1:].ravel()], 1),
        np.stack([comp[:-1, :].ravel(), comp[1:, :].ravel()], 1),
    ])
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.concatenate([pairs, pairs[:, ::-1]])

    pending = [i for i in range(1, nxt) if not keep[i]]
    while pending:
        left = []
        for i in pending:
            nbr_comps = np.unique(pairs[pairs[:, 0] == i, 1])
            nbr_segs = sorted({int(owner[j]) for j in nbr_comps if owner[j] >= 0})
            if not nbr_segs:
                left.append(i)
                continue
            target = max(nbr_segs, key=lambda s: (seg_size[s], -s))
            owner[i] = target
            seg_size[target] += int(sizes[i])
        if len(left) == len(pending):
            raise RuntimeError("orphan merge made no progress")
        pending = left
    return owner[comp]
