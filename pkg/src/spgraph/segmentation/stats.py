from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from ._common import num_segments


@dataclass(frozen=True)
class SegmentationStats:
    """Dataset-level superpixel counts and RAG degrees.

    Degrees are pooled over every node of every graph.
    """
    mean_nodes: float
    min_nodes: int
    max_nodes: int
    mean_degree: Optional[float] = None
    min_degree: Optional[int] = None
    max_degree: Optional[int] = None

    def to_dict(self):
        return asdict(self)


def segmentation_stats(label_maps: Sequence, graphs: Optional[Sequence] = None) -> SegmentationStats:
    if label_maps is None or len(label_maps) == 0:
        raise ValueError("segmentation_stats needs at least one label map")
    counts = np.array([num_segments(lm) for lm in label_maps])
    deg = {}
    if graphs is not None:
        if len(graphs) == 0:
            raise ValueError("graphs given but empty")
        degrees = np.concatenate([g.degrees() for g in graphs])
        deg = dict(mean_degree=float(degrees.mean()), min_degree=int(degrees.min()),
                   max_degree=int(degrees.max()))
    return SegmentationStats(mean_nodes=float(counts.mean()), min_nodes=int(counts.min()),
                             max_nodes=int(counts.max()), **deg)
