"""Image classification through superpixel region-adjacency graphs."""

__version__ = "0.1.0"
