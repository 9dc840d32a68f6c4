"""Plain-text label-map and graph files.

Label map::

    H W num_segments
    <H rows of W integer labels>

Graph (several may be concatenated in one container file)::

    m n F label          # label is -1 when unset
    <m rows of F decimals>
    <n rows "a b">
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator, List

import numpy as np

from .errors import FormatError
from .graph import SuperpixelGraph


def write_label_map(path, labels):
    labels = np.asarray(labels, dtype=np.int64)
    h, w = labels.shape
    lines = [f"{h} {w} {int(labels.max()) + 1}"]
    lines += [" ".join(map(str, row)) for row in labels.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_label_map(path):
    text = Path(path).read_text().split("\n")
    try:
        h, w, k = (int(t) for t in text[0].split())
        rows = [list(map(int, line.split())) for line in text[1:1 + h]]
        labels = np.array(rows, dtype=np.int64).reshape(h, w)
    except ValueError as exc:
        raise FormatError(f"{path}: malformed label map ({exc})") from exc
    if labels.size and (labels.min() != 0 or labels.max() != k - 1):
        raise FormatError(f"{path}: labels do not span 0..{k - 1}")
    return labels


def _fmt(x):
    return repr(float(x))


def graph_to_text(g: SuperpixelGraph) -> str:
    label = -1 if g.label is None else int(g.label)
    out = [f"{g.num_nodes} {g.num_edges} {g.num_features} {label}"]
    out += [" ".join(_fmt(v) for v in row) for row in g.features]
    out += [f"{a} {b}" for a, b in g.edges.tolist()]
    return "\n".join(out) + "\n"


def write_graphs(path, graphs: Iterable[SuperpixelGraph]):
    with open(path, "w") as fh:
        for g in graphs:
            fh.write(graph_to_text(g))


def iter_graphs(path) -> Iterator[SuperpixelGraph]:
    with open(path) as fh:
        lines = (ln for ln in (raw.strip() for raw in fh) if ln)
        for header in lines:
            try:
                m, n, f, label = (int(t) for t in header.split())
                feats = np.array([[float(t) for t in next(lines).split()] for _ in range(m)],
                                 dtype=np.float64).reshape(m, f)
                edges = np.array([[int(t) for t in next(lines).split()] for _ in range(n)],
                                 dtype=np.int64).reshape(n, 2)
            except (ValueError, StopIteration) as exc:
                raise FormatError(f"{path}: malformed graph record ({exc!r})") from exc
            yield SuperpixelGraph(m, edges, feats, None if label < 0 else label)


def read_graphs(path) -> List[SuperpixelGraph]:
    return list(iter_graphs(path))
