"""MNIST (IDX) and CIFAR-10 (binary batch) readers.

Images are returned as ``(N, H, W, C)`` float arrays with intensities in
``[0, 1]``; labels are ``int64`` class indices.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, FormatError, LengthError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

CIFAR_SIDE = 32
CIFAR_PIXELS = CIFAR_SIDE * CIFAR_SIDE * 3
CIFAR_RECORD = 1 + CIFAR_PIXELS

MNIST_VALIDATION = 5000
CIFAR_VALIDATION = 5000

SPLITS = ("train", "validation", "test")

DATA_ROOT_ENV = "SPGRAPH_DATA"

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
CIFAR_TRAIN_BATCHES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
CIFAR_TEST_BATCH = "test_batch.bin"


@dataclass(frozen=True)
class LabeledImageSet:
    images: np.ndarray
    labels: np.ndarray
    split: str

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ConsistencyError(
                f"{len(self.images)} images but {len(self.labels)} labels")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        if self.images.ndim != 4:
            raise ValueError("images must be shaped (N, H, W, C)")
        # Freeze the buffers so the set can be shared between threads.
        self.images.setflags(write=False)
        self.labels.setflags(write=False)

    def __len__(self):
        return len(self.labels)

    @property
    def shape(self):
        return self.images.shape[1:]

    def head(self, n):
        """First ``n`` samples (file order) as a new set."""
        if n is None or n >= len(self):
            return self
        return LabeledImageSet(self.images[:n], self.labels[:n], self.split)


def normalize(raw, dtype=np.float64):
    """Scale bytes in [0, 255] to intensities in [0, 1]."""
    return np.asarray(raw, dtype=dtype) / dtype(255.0)


def default_data_root():
    return Path(os.environ.get(DATA_ROOT_ENV, Path.home() / "data"))


def _read_bytes(path):
    return Path(path).read_bytes()


def read_idx_images(path):
    """Raw uint8 image tensor ``(N, rows, cols)`` from an IDX3 file."""
    buf = _read_bytes(path)
    if len(buf) < 16:
        raise FormatError(f"{path}: too short for an IDX image header")
    magic, n, rows, cols = struct.unpack(">IIII", buf[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise FormatError(f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}")
    need = n * rows * cols
    if len(buf) - 16 < need:
        raise LengthError(f"{path}: payload has {len(buf) - 16} bytes, header implies {need}")
    return np.frombuffer(buf, dtype=np.uint8, count=need, offset=16).reshape(n, rows, cols)


def read_idx_labels(path):
    buf = _read_bytes(path)
    if len(buf) < 8:
        raise FormatError(f"{path}: too short for an IDX label header")
    magic, n = struct.unpack(">II", buf[:8])
    if magic != IDX_LABELS_MAGIC:
        raise FormatError(f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}")
    if len(buf) - 8 < n:
        raise LengthError(f"{path}: payload has {len(buf) - 8} bytes, header implies {n}")
    return np.frombuffer(buf, dtype=np.uint8, count=n, offset=8)


def write_idx_images(path, images):
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    Path(path).write_bytes(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols) + images.tobytes())


def write_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    Path(path).write_bytes(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)) + labels.tobytes())


def load_mnist(images_path, labels_path, split="test", dtype=np.float32):
    """Load one IDX image/label file pair as a single split."""
    raw = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(raw) != len(labels):
        raise ConsistencyError(
            f"{images_path} holds {len(raw)} images but {labels_path} holds {len(labels)} labels")
    images = normalize(raw[..., None], dtype=dtype)
    return LabeledImageSet(images, labels.astype(np.int64), split)


def split_validation(train, size):
    """Split off the last ``size`` samples (file order) as the validation set."""
    size = min(size, len(train))
    cut = len(train) - size
    return (LabeledImageSet(train.images[:cut], train.labels[:cut], "train"),
            LabeledImageSet(train.images[cut:], train.labels[cut:], "validation"))


def _find(root, names):
    for name in names:
        for cand in (root / name, root / name.replace("-idx", ".idx")):
            if cand.exists():
                return cand
    raise FileNotFoundError(f"none of {list(names)} under {root}")


def load_mnist_splits(root=None, dtype=np.float32):
    """Train/validation/test sets from the four standard MNIST files under ``root``.

    The 60,000-image training file is split 55,000 / 5,000 in file order.
    """
    root = Path(root) if root else default_data_root()
    if (root / "mnist").is_dir():
        root = root / "mnist"
    out = {}
    for split, (img, lab) in MNIST_FILES.items():
        out[split] = load_mnist(_find(root, [img]), _find(root, [lab]), split, dtype)
    out["train"], out["validation"] = split_validation(out["train"], MNIST_VALIDATION)
    return {s: out[s] for s in SPLITS}


def read_cifar_batch(path):
    """Raw ``(labels, pixels)`` from a CIFAR-10 binary batch.

    Pixels come back as uint8 ``(N, 32, 32, 3)``, channel-interleaved.
    """
    buf = _read_bytes(path)
    if len(buf) % CIFAR_RECORD:
        raise LengthError(f"{path}: {len(buf)} bytes is not a multiple of {CIFAR_RECORD}")
    rec = np.frombuffer(buf, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
    labels = rec[:, 0]
    if labels.size and labels.max() > 9:
        bad = int(np.argmax(labels > 9))
        raise ValueError(f"{path}: record {bad} has label byte {labels[bad]} > 9")
    planes = rec[:, 1:].reshape(-1, 3, CIFAR_SIDE, CIFAR_SIDE)
    return labels, planes.transpose(0, 2, 3, 1)


def load_cifar10(batch_paths: Sequence, split="test", dtype=np.float32):
    """Concatenate CIFAR-10 batch files, in the given order, into one split."""
    labels, pixels = [], []
    for p in batch_paths:
        lab, pix = read_cifar_batch(p)
        labels.append(lab)
        pixels.append(pix)
    if not labels:
        raise ValueError("no batch files given")
    images = normalize(np.concatenate(pixels), dtype=dtype)
    return LabeledImageSet(images, np.concatenate(labels).astype(np.int64), split)


def load_cifar10_splits(root=None, dtype=np.float32):
    """Train/validation/test sets from the six CIFAR-10 binary batches.

    The five training batches (50,000 images) are split 45,000 / 5,000.
    """
    root = Path(root) if root else default_data_root()
    for sub in ("cifar10", "cifar-10-batches-bin"):
        if (root / sub).is_dir():
            root = root / sub
    train = load_cifar10([_find(root, [b]) for b in CIFAR_TRAIN_BATCHES], "train", dtype)
    test = load_cifar10([_find(root, [CIFAR_TEST_BATCH])], "test", dtype)
    train, val = split_validation(train, CIFAR_VALIDATION)
    return {"train": train, "validation": val, "test": test}


def load_splits(name, root=None, dtype=np.float32):
    if name == "mnist":
        return load_mnist_splits(root, dtype)
    if name == "cifar10":
        return load_cifar10_splits(root, dtype)
    raise ValueError(f"unknown dataset {name!r}")
