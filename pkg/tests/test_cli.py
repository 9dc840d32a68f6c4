import json
import subprocess
import sys

import numpy as np
import pytest

from spgraph import dataset as ds
from spgraph.cli import main
from spgraph.formats import read_graphs, write_graphs, write_label_map
from spgraph.graph import SuperpixelGraph


def make_root(path, n_train=5060, n_test=30, size=10, seed=0):
    """Tiny MNIST-shaped IDX files: a bright square on black, label = square position bucket."""
    rng = np.random.default_rng(seed)
    path.mkdir(parents=True, exist_ok=True)
    for prefix, n in (("train", n_train), ("t10k", n_test)):
        imgs = np.zeros((n, size, size), np.uint8)
        labels = rng.integers(0, 10, n)
        for i, y in enumerate(labels):
            s = max(1, size // 4)
            r0, c0 = (y // 5) * (size - s) // 1, (y % 5) * (size - s) // 4
            imgs[i, r0:r0 + s, c0:c0 + s] = 200 + rng.integers(0, 55)
        ds.write_idx_images(path / f"{prefix}-images-idx3-ubyte", imgs)
        ds.write_idx_labels(path / f"{prefix}-labels-idx1-ubyte", labels)
    return path


@pytest.fixture(scope="module")
def root(tmp_path_factory):
    return make_root(tmp_path_factory.mktemp("data"))


def run(*argv):
    return main([str(a) for a in argv])


def test_limit_one_writes_one_file(root, tmp_path):
    assert run("segment", "--data-root", root, "--out", tmp_path, "--split", "train", "--limit", 1) == 0
    assert len(list((tmp_path / "labelmaps" / "train").glob("*.txt"))) == 1
    stats = json.loads((tmp_path / "stats.json").read_text())
    assert stats["train"]["min_nodes"] <= stats["train"]["mean_nodes"] <= stats["train"]["max_nodes"]


def test_bad_epsilon_exit_3(root, tmp_path, capsys):
    assert run("segment", "--data-root", root, "--out", tmp_path, "--epsilon", 0, "--limit", 1) == 3
    assert "epsilon" in capsys.readouterr().err


def test_bad_limit_exit_3(root, tmp_path):
    assert run("segment", "--data-root", root, "--out", tmp_path, "--limit", 0) == 3


def test_missing_inputs_exit_2(tmp_path, capsys):
    assert run("segment", "--data-root", tmp_path / "none", "--out", tmp_path) == 2
    assert run("graph", "--out", tmp_path) == 2
    assert run("train", "--out", tmp_path) == 2
    assert run("eval", "--out", tmp_path) == 2
    assert run("stats", "--out", tmp_path) == 2
    assert run("spectrum", tmp_path / "x.graphs") == 2
    assert run("--config", tmp_path / "cfg.json", "stats", "--out", tmp_path) == 2
    assert "error" in capsys.readouterr().err


def test_pipeline_end_to_end_and_idempotent(root, tmp_path, capsys):
    out = tmp_path / "o"
    seg = ["segment", "--data-root", root, "--out", out, "--limit", 40]
    assert run(*seg) == 0
    first = {p: p.read_bytes() for p in (out / "labelmaps").rglob("*") if p.is_file()}
    assert run(*seg) == 0
    assert first == {p: p.read_bytes() for p in (out / "labelmaps").rglob("*") if p.is_file()}

    assert run("graph", "--data-root", root, "--out", out) == 0
    stats = json.loads((out / "stats.json").read_text())
    assert {"mean_degree", "min_degree", "max_degree", "reduction"} <= set(stats["test"])
    assert len(read_graphs(out / "graphs" / "train.graphs")) == 40

    metrics = []
    for _ in range(2):
        assert run("train", "--out", out, "--model", "spatial", "--epochs", 2, "--batch-size", 8,
                   "--seed", 3) == 0
        metrics.append((out / "runs" / "3" / "spatial_metrics.csv").read_bytes())
    assert metrics[0] == metrics[1]
    assert metrics[0].startswith(b"epoch,split,loss,accuracy\n")

    capsys.readouterr()
    assert run("eval", "--out", out, "--model", "spatial", "--seed", 3) == 0
    row = capsys.readouterr().out.strip().splitlines()[-1].split(" | ")
    assert row[:4] == ["Superpixel based RAG", "Spatial Graph Filtering", "GCN baseline", "MNIST"]
    rec1 = (out / "runs" / "3" / "spatial_eval.json").read_bytes()
    assert run("eval", "--out", out, "--model", "spatial", "--seed", 3) == 0
    assert rec1 == (out / "runs" / "3" / "spatial_eval.json").read_bytes()
    assert run("eval", "--out", out, "--model", "cheb", "--seed", 3) == 2

    assert run("stats", "--out", out) == 0
    capsys.readouterr()
    assert run("spectrum", out / "graphs" / "test.graphs", "--index", 0) == 0
    lam = [float(t) for t in capsys.readouterr().out.split()]
    assert lam == sorted(lam) and max(lam) <= 2 + 1e-9
    assert run("spectrum", out / "graphs" / "test.graphs", "--index", 999) == 3


def test_other_segmenters_and_graph_kinds(root, tmp_path):
    for seg, extra in (("slic", ["--n-segments", 9]), ("felzenszwalb", ["--scale", 50])):
        out = tmp_path / seg
        assert run("segment", "--data-root", root, "--out", out, "--limit", 3, "--segmenter", seg, *extra) == 0
        for kind in ("rag", "knn", "pixel"):
            assert run("graph", "--data-root", root, "--out", out, "--graph", kind, "--knn-k", 3) == 0
    pix = read_graphs(tmp_path / "felzenszwalb" / "graphs" / "test.graphs")
    assert pix[0].num_nodes == 100 and pix[0].num_edges == 2 * 10 * 9


def test_config_file_flags_win(root, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"limit": 2, "data_root": str(root), "epsilon": -5}))
    assert run("--config", cfg, "segment", "--out", tmp_path / "a") == 3
    assert run("--config", cfg, "segment", "--out", tmp_path / "a", "--epsilon", 2) == 0
    assert len(list((tmp_path / "a" / "labelmaps" / "test").glob("*.txt"))) == 2


def test_synthetic_maps_become_graphs(tmp_path):
    root = make_root(tmp_path / "d2", n_train=5002, n_test=2, size=2)
    out = tmp_path / "o"
    assert run("segment", "--data-root", root, "--out", out, "--split", "test", "--limit", 2) == 0
    write_label_map(out / "labelmaps" / "test" / "00000.txt", np.array([[0, 1], [2, 3]]))
    write_label_map(out / "labelmaps" / "test" / "00001.txt", np.zeros((2, 2), int))
    assert run("graph", "--data-root", root, "--out", out) == 0
    g4, g1 = read_graphs(out / "graphs" / "test.graphs")
    assert (g4.num_nodes, g4.num_edges) == (4, 4)
    assert (g1.num_nodes, g1.num_edges) == (1, 0)


def test_nan_training_exit_4(tmp_path):
    (tmp_path / "graphs").mkdir()
    g = SuperpixelGraph(3, np.array([[0, 1]]), np.full((3, 4), np.nan), 1)
    write_graphs(tmp_path / "graphs" / "train.graphs", [g, g])
    assert run("train", "--out", tmp_path, "--epochs", 1) == 4


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "spgraph.cli", "stats", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 2 and "spgraph: error" in r.stderr
    r = subprocess.run([sys.executable, "-m", "spgraph.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "segment" in r.stdout
