"""Command-line pipeline: ``preprocess``, ``train``, ``inspect``.

``preprocess`` turns a TU-format dataset directory into on-disk
artifacts (prototype files, one grid file and one mixing-matrix file
per graph, a JSON manifest); ``train`` runs cross-validation from those
artifacts and writes metrics plus per-fold checkpoints; ``inspect``
prints a human-readable report about one graph.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Failures print a single ``error: ...`` line on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import os
import sys

import numpy as np

from . import __version__
from .alignment import (
    AlignedGrid,
    affinity_matrix,
    correspondence_matrix,
    load_prototypes,
    save_prototypes,
)
from .depth import db_representation
from .graphs import feature_dimension, load_tu_dataset, validate_graph
from .network import param_arrays
from .quantum import average_mixing_matrix
from .tensorio import read_tensors, write_checkpoint, write_tensors
from .training import (
    PreparedInputs,
    TrainConfig,
    prepare_inputs,
    train,
    write_metrics,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract here is 1
    def error(self, message):  # noqa: D102 - argparse override
        raise UsageError(message)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--dataset", required=True, help="TU-format dataset directory")
    sub.add_argument("--name", required=True, help="dataset file prefix")
    sub.add_argument("--out", default="runs", help="artifact root directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwgrid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("preprocess", help="build grids, mixing matrices, prototypes")
    _add_common(pre)
    pre.add_argument("--prototypes", type=int, default=64, metavar="M")
    pre.add_argument("--depth", type=int, default=10, metavar="L")
    pre.add_argument("--seed", type=int, default=0)
    pre.set_defaults(func=cmd_preprocess)

    tr = sub.add_parser("train", help="cross-validated training from artifacts")
    _add_common(tr)
    tr.add_argument("--prototypes", type=int, default=64, metavar="M")
    tr.add_argument("--depth", type=int, default=10, metavar="L")
    tr.add_argument("--layers", type=int, default=5, metavar="T")
    tr.add_argument("--channels", type=int, default=32)
    tr.add_argument("--lr", type=float, default=5e-5)
    tr.add_argument("--epochs", type=int, default=100)
    tr.add_argument("--batch", type=int, default=32)
    tr.add_argument("--folds", type=int, default=10)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument(
        "--inductive",
        action="store_true",
        help="re-discover prototypes per fold from training graphs only",
    )
    tr.set_defaults(func=cmd_train)

    ins = sub.add_parser("inspect", help="report on one graph")
    _add_common(ins)
    ins.add_argument("--graph", type=int, required=True)
    ins.add_argument("--depth", type=int, default=10, metavar="L")
    ins.add_argument(
        "--check",
        action="store_true",
        help="run graph and mixing-matrix validity checks",
    )
    ins.set_defaults(func=cmd_inspect)
    return parser


def _artifact_dir(args) -> str:
    return os.path.join(args.out, args.name)


def _prototype_path(root: str, level: int) -> str:
    return os.path.join(root, f"prototypes_K{level:02d}.txt")


def _grid_path(root: str, index: int) -> str:
    return os.path.join(root, f"grid_{index:05d}.bin")


def _q_path(root: str, index: int) -> str:
    return os.path.join(root, f"qmatrix_{index:05d}.bin")


def _manifest_path(root: str) -> str:
    return os.path.join(root, "manifest.json")


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def cmd_preprocess(args) -> int:
    dataset = load_tu_dataset(args.dataset, args.name)
    config = TrainConfig(M=args.prototypes, L=args.depth, seed=args.seed)
    prepared = prepare_inputs(dataset, config)

    root = _artifact_dir(args)
    os.makedirs(root, exist_ok=True)
    proto_paths = []
    for level, proto in enumerate(prepared.prototypes, start=1):
        path = _prototype_path(root, level)
        save_prototypes(path, proto, L=args.depth, seed=args.seed)
        proto_paths.append(path)
    for p, (grid, Q) in enumerate(zip(prepared.grids, prepared.mixing)):
        write_tensors(_grid_path(root, p), [grid.features, grid.adjacency])
        write_tensors(_q_path(root, p), [Q])

    manifest = {
        "version": __version__,
        "dataset": {"path": os.path.abspath(args.dataset), "name": args.name},
        "preprocess": {
            "prototypes": args.prototypes,
            "depth": args.depth,
            "seed": args.seed,
            "graphs": len(dataset),
            "feature_dimension": feature_dimension(dataset),
            "prototype_files": [os.path.basename(p) for p in proto_paths],
            "grid_files": len(dataset),
            "q_files": len(dataset),
            "written_at": _now(),
        },
    }
    if os.path.isfile(_manifest_path(root)):
        with open(_manifest_path(root), "r", encoding="utf-8") as fh:
            previous = json.load(fh)
        previous.update(manifest)
        manifest = previous
    with open(_manifest_path(root), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(
        f"preprocessed {len(dataset)} graphs "
        f"(M={args.prototypes}, L={args.depth}) into {root}"
    )
    return EXIT_OK


def _load_prepared(root: str, dataset, M: int, L: int) -> PreparedInputs:
    prototypes = []
    for level in range(1, L + 1):
        path = _prototype_path(root, level)
        if not os.path.isfile(path):
            raise FileNotFoundError(
                f"missing prototype file {path}; run preprocess first"
            )
        proto, _, _ = load_prototypes(path)
        if proto.M != M:
            raise ValueError(
                f"cached prototypes were built with M={proto.M}, requested M={M}; "
                "re-run preprocess"
            )
        prototypes.append(proto)
    grids = []
    mixing = []
    for p in range(len(dataset)):
        gpath, qpath = _grid_path(root, p), _q_path(root, p)
        for path in (gpath, qpath):
            if not os.path.isfile(path):
                raise FileNotFoundError(f"missing artifact {path}; run preprocess first")
        features, adjacency = read_tensors(gpath)
        if features.shape[0] != M:
            raise ValueError(
                f"cached grid {gpath} has {features.shape[0]} rows, requested M={M}; "
                "re-run preprocess"
            )
        grids.append(AlignedGrid(features=features, adjacency=adjacency, graph_index=p))
        (Q,) = read_tensors(qpath)
        mixing.append(Q)
    return PreparedInputs(prototypes=prototypes, grids=grids, mixing=mixing)


def cmd_train(args) -> int:
    dataset = load_tu_dataset(args.dataset, args.name)
    config = TrainConfig(
        M=args.prototypes,
        T=args.layers,
        conv_channels=args.channels,
        L=args.depth,
        learning_rate=args.lr,
        epochs=args.epochs,
        batch_size=args.batch,
        folds=args.folds,
        seed=args.seed,
        transductive_prototypes=not args.inductive,
    )
    root = _artifact_dir(args)
    prepared = None
    if config.transductive_prototypes:
        prepared = _load_prepared(root, dataset, args.prototypes, args.depth)

    result = train(dataset, config, prepared=prepared)

    os.makedirs(root, exist_ok=True)
    metrics_path = os.path.join(root, "metrics.txt")
    write_metrics(metrics_path, result)
    header_config = dataclasses.asdict(config)
    checkpoint_files = []
    for f, params in enumerate(result.models):
        path = os.path.join(root, f"checkpoint_fold{f:02d}.bin")
        write_checkpoint(
            path,
            {
                "kind": "fold-model",
                "fold": f,
                "config": header_config,
                "input_channels": feature_dimension(dataset),
                "n_classes": dataset.n_classes,
            },
            param_arrays(params),
        )
        checkpoint_files.append(os.path.basename(path))

    manifest_path = _manifest_path(root)
    manifest = {}
    if os.path.isfile(manifest_path):
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    manifest["train"] = {
        "config": header_config,
        "metrics_file": os.path.basename(metrics_path),
        "checkpoints": checkpoint_files,
        "mean_accuracy": result.mean_accuracy,
        "stderr_accuracy": result.stderr_accuracy,
        "written_at": _now(),
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    for fm in result.fold_metrics:
        print(
            f"fold {fm.fold}: accuracy {fm.accuracy:.4f} "
            f"(final loss {fm.loss_final:.4f}, {fm.epochs} epochs)"
        )
    print(
        f"mean accuracy {result.mean_accuracy:.4f} "
        f"± {result.stderr_accuracy:.4f} (stderr over {config.folds} folds)"
    )
    return EXIT_OK


def cmd_inspect(args) -> int:
    dataset = load_tu_dataset(args.dataset, args.name)
    if not 0 <= args.graph < len(dataset):
        raise ValueError(
            f"graph index {args.graph} out of range [0, {len(dataset)})"
        )
    graph = dataset.graphs[args.graph]
    degrees = graph.degrees()
    print(f"graph {args.graph} of {dataset.name}: "
          f"{graph.n} vertices, {graph.edge_count()} edges, "
          f"class {int(dataset.class_labels[args.graph])}")
    if degrees.size:
        print(f"degrees: min {degrees.min()} mean {degrees.mean():.3f} "
              f"max {degrees.max()}")

    depth = args.depth
    reps = np.vstack(
        [db_representation(graph, v, depth).values for v in range(graph.n)]
    )
    per_level = " ".join(f"{x:.4f}" for x in reps.mean(axis=0))
    print(f"depth profile (mean entropy per level, K=1..{depth}): {per_level}")

    Q = average_mixing_matrix(graph.adjacency)
    diag = " ".join(f"{x:.6f}" for x in np.diag(Q)[: min(8, graph.n)])
    print(f"mixing matrix diagonal (first {min(8, graph.n)}): {diag}")
    print(f"mixing row-sum deviation from 1: {np.abs(Q.sum(axis=1) - 1).max():.2e}")

    root = _artifact_dir(args)
    proto_path = _prototype_path(root, depth)
    if os.path.isfile(proto_path):
        proto, _, _ = load_prototypes(proto_path)
        C = correspondence_matrix(affinity_matrix(reps[:, :depth], proto))
        counts = C.entries.sum(axis=0).astype(int)
        used = np.nonzero(counts)[0]
        listing = ", ".join(f"{j}:{counts[j]}" for j in used)
        print(f"prototype assignments (level {depth}): {listing}")
    grid_path = _grid_path(root, args.graph)
    if os.path.isfile(grid_path):
        features, adjacency = read_tensors(grid_path)
        print(
            f"grid: features {features.shape} frobenius {np.linalg.norm(features):.4f}, "
            f"adjacency {adjacency.shape} frobenius {np.linalg.norm(adjacency):.4f}, "
            f"edge mass {adjacency.sum():.4f}"
        )

    if args.check:
        diagnostics = validate_graph(graph)
        row_dev = float(np.abs(Q.sum(axis=1) - 1).max())
        col_dev = float(np.abs(Q.sum(axis=0) - 1).max())
        if diagnostics:
            raise ValueError("; ".join(diagnostics))
        if max(row_dev, col_dev) > 1e-9:
            raise FloatingPointError(
                f"mixing matrix is not doubly stochastic (deviation {max(row_dev, col_dev):.2e})"
            )
        print("checks passed: graph valid, mixing matrix doubly stochastic")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (FileNotFoundError, NotADirectoryError, IsADirectoryError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
