"""``spgraph`` command line: segment -> graph -> train -> eval.

Artifacts live under ``--out``::

    labelmaps/<split>/<index>.txt   + labelmaps/manifest.json
    graphs/<split>.graphs
    stats.json
    runs/<seed>/<model>.npz, <model>_metrics.csv, <model>_eval.json

Exit codes: 0 ok, 2 missing input, 3 bad parameter, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from .errors import FormatError, NumericalError, ParameterError
from .formats import read_graphs, read_label_map, write_graphs, write_label_map
from .graph import GRAPH_KINDS
from .pipeline import build_graphs, data_reduction, quickshift_kwargs, segment_images
from .segmentation import SEGMENTERS, QuickshiftParams, segmentation_stats
from .spectral import MODES, eigendecompose, laplacian_of

log = logging.getLogger("spgraph")

EXIT_OK, EXIT_MISSING, EXIT_PARAM, EXIT_NUMERIC = 0, 2, 3, 4

# Desk-scale caps used when --limit is not given.
DESK_LIMITS = {"train": 12000, "validation": 1000, "test": 2000}

INPUT_NAMES = {"rag": "Superpixel based RAG", "knn": "Superpixel based KNNG", "pixel": "Pixel based RAG"}
MODEL_NAMES = {"cheb": ("Spectral Convolution Filtering", "ChebNet"),
               "spatial": ("Spatial Graph Filtering", "GCN baseline")}
DATASET_NAMES = {"mnist": "MNIST", "cifar10": "CIFAR-10"}


class MissingInput(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _read_json(path, default=None):
    p = Path(path)
    return json.loads(p.read_text()) if p.exists() else default


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _splits(args):
    return args.split or list(ds.SPLITS)


def _limit(args, split):
    return args.limit if args.limit is not None else DESK_LIMITS[split]


def _load_dataset(args):
    try:
        return ds.load_splits(args.dataset, args.data_root)
    except FileNotFoundError as exc:
        raise MissingInput(f"dataset {args.dataset!r} not found: {exc}") from exc


def _segmenter_params(args):
    if args.segmenter == "quickshift":
        defaults = quickshift_kwargs(args.dataset)
        params = {k: getattr(args, k) if getattr(args, k) is not None else v
                  for k, v in defaults.items()}
        QuickshiftParams(**params)
        return params
    if args.segmenter == "slic":
        return {"n_segments": args.n_segments, "compactness": args.compactness}
    return {"scale": args.scale, "min_size": args.min_size}


# ---------------------------------------------------------------- commands

def cmd_segment(args):
    params = _segmenter_params(args)
    if args.limit is not None and args.limit < 1:
        raise ParameterError("--limit must be >= 1")
    data = _load_dataset(args)
    out = Path(args.out)
    manifest = {"dataset": args.dataset, "segmenter": args.segmenter, "params": params, "splits": {}}
    stats = _read_json(out / "stats.json", {})
    for split in _splits(args):
        subset = data[split].head(_limit(args, split))
        target = out / "labelmaps" / split
        target.mkdir(parents=True, exist_ok=True)
        for old in target.glob("*.txt"):
            old.unlink()
        maps = segment_images(subset.images, args.segmenter, args.workers, **params)
        for i, lm in enumerate(maps):
            write_label_map(target / f"{i:05d}.txt", lm)
        manifest["splits"][split] = len(maps)
        report = segmentation_stats(maps).to_dict()
        stats[split] = {k: v for k, v in report.items() if v is not None}
        log.info("%s: %d label maps, mean segments %.2f", split, len(maps), report["mean_nodes"])
    _write_json(out / "labelmaps" / "manifest.json", manifest)
    _write_json(out / "stats.json", stats)
    print(json.dumps(stats, indent=2, sort_keys=True))
    return EXIT_OK


def _read_label_maps(out, split):
    files = sorted((out / "labelmaps" / split).glob("*.txt"))
    return [read_label_map(f) for f in files]


def cmd_graph(args):
    out = Path(args.out)
    manifest = _read_json(out / "labelmaps" / "manifest.json")
    if manifest is None:
        raise MissingInput(f"no label maps under {out / 'labelmaps'}; run `segment` first")
    if args.graph == "knn" and args.knn_k < 0:
        raise ParameterError("--knn-k must be >= 0")
    args.dataset = manifest["dataset"]
    data = _load_dataset(args)
    stats = _read_json(out / "stats.json", {})
    (out / "graphs").mkdir(parents=True, exist_ok=True)
    raw = int(np.prod(data["test"].shape))
    for split in args.split or list(manifest["splits"]):
        if split not in manifest["splits"]:
            raise MissingInput(f"split {split!r} was not segmented")
        maps = _read_label_maps(out, split)
        n = len(maps)
        images = data[split].images[:n]
        graphs = build_graphs(images, maps, data[split].labels[:n], args.graph, args.knn_k, args.workers)
        write_graphs(out / "graphs" / f"{split}.graphs", graphs)
        report = segmentation_stats(maps, graphs).to_dict()
        report.update(data_reduction(graphs, raw))
        report["graph"] = args.graph
        stats[split] = report
        log.info("%s: %d graphs, mean degree %.2f", split, n, report["mean_degree"])
    _write_json(out / "stats.json", stats)
    print(json.dumps(stats, indent=2, sort_keys=True))
    return EXIT_OK


def _load_split_graphs(out, split, required=True):
    path = out / "graphs" / f"{split}.graphs"
    if not path.exists():
        if required:
            raise MissingInput(f"{path} not found; run `graph` first")
        return None
    return read_graphs(path)


def _run_dir(args):
    return Path(args.out) / "runs" / str(args.seed)


def cmd_train(args):
    from .gnn import Model, ModelConfig, TrainConfig, save_model, train, write_metrics

    out = Path(args.out)
    try:
        tcfg = TrainConfig(lr=args.lr, epochs=args.epochs, batch_size=args.batch_size, seed=args.seed,
                           grad_check=args.grad_check)
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc
    train_set = _load_split_graphs(out, "train")
    val_set = _load_split_graphs(out, "validation", required=False)
    if not train_set:
        raise MissingInput("training graph file is empty")
    mcfg = ModelConfig(kind=args.model, in_features=train_set[0].num_features, hidden=args.hidden,
                       mlp_hidden=args.mlp_hidden, order=args.order, seed=args.seed, dtype=args.dtype)
    model = Model(mcfg)
    model, rows = train(model, train_set, val_set, tcfg, log=log.info)
    run = _run_dir(args)
    run.mkdir(parents=True, exist_ok=True)
    save_model(run / f"{args.model}.npz", model)
    write_metrics(run / f"{args.model}_metrics.csv", rows)
    last = [r for r in rows if r.epoch == tcfg.epochs]
    for r in last:
        print(f"epoch {r.epoch} {r.split}: loss {r.loss:.4f} accuracy {r.accuracy:.4f}")
    return EXIT_OK


def cmd_eval(args):
    from .gnn import evaluate, load_model

    out = Path(args.out)
    ckpt = _run_dir(args) / f"{args.model}.npz"
    if not ckpt.exists():
        raise MissingInput(f"checkpoint {ckpt} not found; run `train` first")
    model = load_model(ckpt)
    graphs = _load_split_graphs(out, args.eval_split)
    metrics = evaluate(model, graphs)
    stats = _read_json(out / "stats.json", {})
    manifest = _read_json(out / "labelmaps" / "manifest.json", {})
    kind = stats.get(args.eval_split, {}).get("graph", "rag")
    family, name = MODEL_NAMES[args.model]
    row = {
        "input": INPUT_NAMES.get(kind, kind),
        "type": family,
        "model": name,
        "dataset": DATASET_NAMES.get(manifest.get("dataset"), manifest.get("dataset")),
        "accuracy": round(100.0 * metrics["accuracy"], 3),
    }
    record = {k: v for k, v in metrics.items() if k != "seconds"}
    record["row"] = row
    _write_json(_run_dir(args) / f"{args.model}_eval.json", record)
    print(" | ".join(["Input", "CNN/GCNN Type", "Model", "Datasets", "Accuracy (%)"]))
    print(" | ".join(str(row[k]) for k in ("input", "type", "model", "dataset", "accuracy")))
    log.info("evaluated %d graphs in %.2fs", metrics["num_samples"], metrics["seconds"])
    return EXIT_OK


def cmd_stats(args):
    out = Path(args.out)
    stats = _read_json(out / "stats.json")
    if stats is None:
        raise MissingInput(f"{out / 'stats.json'} not found; run `segment` first")
    print(json.dumps(stats, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_spectrum(args):
    path = Path(args.graph_file)
    if not path.exists():
        raise MissingInput(f"{path} not found")
    graphs = read_graphs(path)
    if not 0 <= args.index < len(graphs):
        raise ParameterError(f"--index {args.index} outside 0..{len(graphs) - 1}")
    basis = eigendecompose(laplacian_of(graphs[args.index], args.mode), max_nodes=args.max_nodes)
    for lam in basis.eigenvalues:
        print(f"{lam:.12g}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _ints(text):
    return tuple(int(t) for t in str(text).split(",") if t.strip())


def build_parser():
    p = argparse.ArgumentParser(prog="spgraph", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="JSON file of option defaults (flags override)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_):
        sp_.add_argument("--out", default="spgraph-out", help="artifact directory")
        sp_.add_argument("--data-root", default=None,
                         help=f"dataset root (default ${ds.DATA_ROOT_ENV} or ~/data)")
        sp_.add_argument("--workers", type=int, default=1)
        sp_.add_argument("--split", action="append", choices=ds.SPLITS,
                         help="split to process (repeatable; default all)")

    s = sub.add_parser("segment", help="superpixel label maps + node-count statistics")
    common(s)
    s.add_argument("--dataset", choices=["mnist", "cifar10"], default="mnist")
    s.add_argument("--limit", type=int, default=None,
                   help="images per split (default 12000 train / 1000 validation / 2000 test)")
    s.add_argument("--segmenter", choices=SEGMENTERS, default="quickshift")
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--window", type=int, default=None)
    s.add_argument("--n-segments", type=int, default=100)
    s.add_argument("--compactness", type=float, default=10.0)
    s.add_argument("--scale", type=float, default=100.0)
    s.add_argument("--min-size", type=int, default=5)
    s.set_defaults(func=cmd_segment)

    g = sub.add_parser("graph", help="graphs from label maps + degree statistics")
    common(g)
    g.add_argument("--graph", choices=GRAPH_KINDS, default="rag")
    g.add_argument("--knn-k", type=int, default=8)
    g.set_defaults(func=cmd_graph)

    t = sub.add_parser("train", help="train a graph classifier")
    common(t)
    t.add_argument("--model", choices=["cheb", "spatial"], default="cheb")
    t.add_argument("--epochs", type=int, default=30)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--batch-size", type=int, default=64)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--order", type=int, default=3, help="Chebyshev order K")
    t.add_argument("--hidden", type=_ints, default=(32, 64))
    t.add_argument("--mlp-hidden", type=_ints, default=(64,))
    t.add_argument("--dtype", choices=["float32", "float64"], default="float64")
    t.add_argument("--grad-check", action="store_true")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint and print a results row")
    common(e)
    e.add_argument("--model", choices=["cheb", "spatial"], default="cheb")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--eval-split", choices=ds.SPLITS, default="test")
    e.set_defaults(func=cmd_eval)

    st = sub.add_parser("stats", help="print the statistics report")
    common(st)
    st.set_defaults(func=cmd_stats)

    sp_ = sub.add_parser("spectrum", help="dump Laplacian eigenvalues of one stored graph")
    sp_.add_argument("graph_file")
    sp_.add_argument("--index", type=int, default=0)
    sp_.add_argument("--mode", choices=MODES, default="normalized")
    sp_.add_argument("--max-nodes", type=int, default=256)
    sp_.set_defaults(func=cmd_spectrum)
    return p


def _config_defaults(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    path = Path(known.config)
    if not path.exists():
        raise MissingInput(f"config file {path} not found")
    cfg = json.loads(path.read_text())
    return {k.replace("-", "_"): (tuple(v) if isinstance(v, list) else v) for k, v in cfg.items()}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        defaults = _config_defaults(argv)
    except MissingInput as exc:
        print(f"spgraph: error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    parser = build_parser()
    for action in parser._subparsers._group_actions:
        for sub in action.choices.values():
            sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (MissingInput, FileNotFoundError) as exc:
        print(f"spgraph: error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ParameterError, FormatError) as exc:
        code = EXIT_PARAM if isinstance(exc, ParameterError) else EXIT_MISSING
        print(f"spgraph: error: {exc}", file=sys.stderr)
        return code
    except NumericalError as exc:
        print(f"spgraph: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"spgraph: error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
