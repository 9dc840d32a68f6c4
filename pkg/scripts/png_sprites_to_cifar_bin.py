"""Convert CIFAR-10 PNG sprite sheets (one image per row, RGB interleaved)
plus JSON label lists into the official CIFAR-10 binary batch files.

Usage: python png_sprites_to_cifar_bin.py SRC_DIR DST_DIR
"""
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image


def convert(png, labels, out):
    rows = np.asarray(Image.open(png).convert("RGB"), dtype=np.uint8)
    n = rows.shape[0]
    planes = rows.reshape(n, 32 * 32, 3).transpose(0, 2, 1).reshape(n, 3072)
    records = np.concatenate([np.asarray(labels, dtype=np.uint8)[:, None], planes], axis=1)
    out.write_bytes(records.tobytes())


def main(src, dst):
    src, dst = Path(src), Path(dst)
    dst.mkdir(parents=True, exist_ok=True)
    train = json.loads((src / "train_lables.json").read_text())
    test = json.loads((src / "test_lables.json").read_text())
    for b in range(5):
        convert(src / f"data_batch_{b + 1}.png", train[b * 10000:(b + 1) * 10000],
                dst / f"data_batch_{b + 1}.bin")
    convert(src / "test_batch.png", test, dst / "test_batch.bin")


if __name__ == "__main__":
    main(*sys.argv[1:3])
