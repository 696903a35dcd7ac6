"""Command-line pipeline: subcommands, artifacts, exit codes."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qwgrid import cli
from qwgrid.graphs import save_tu_dataset
from qwgrid.synth import make_two_class_dataset
from qwgrid.tensorio import read_checkpoint, read_tensors
from qwgrid.training import read_metrics

N_GRAPHS = 12
M = 32  # smallest grid the default head accepts


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    ds = make_two_class_dataset(n_graphs=N_GRAPHS, seed=5, name="TOY")
    save_tu_dataset(ds, str(root))
    return str(root)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("runs"))


def run_cli(*args, cwd):
    env = dict(os.environ, OPENBLAS_NUM_THREADS="1")
    return subprocess.run(
        [sys.executable, "-m", "qwgrid.cli", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
        env=env,
    )


def preprocess_args(dataset_dir, out):
    return (
        "preprocess", "--dataset", dataset_dir, "--name", "TOY",
        "--out", out, "--prototypes", str(M), "--depth", "2",
    )


def test_usage_errors_exit_1(tmp_path):
    for args in ([], ["frobnicate"], ["preprocess", "--name", "X"]):
        proc = run_cli(*args, cwd=str(tmp_path))
        assert proc.returncode == 1
        assert proc.stderr.startswith("error:")


def test_preprocess_writes_artifacts(dataset_dir, workdir):
    proc = run_cli(*preprocess_args(dataset_dir, workdir), cwd=workdir)
    assert proc.returncode == 0, proc.stderr
    assert "preprocessed 12 graphs" in proc.stdout

    root = os.path.join(workdir, "TOY")
    assert os.path.isfile(os.path.join(root, "prototypes_K01.txt"))
    assert os.path.isfile(os.path.join(root, "prototypes_K02.txt"))
    for p in range(N_GRAPHS):
        features, adjacency = read_tensors(os.path.join(root, f"grid_{p:05d}.bin"))
        assert features.shape[0] == M
        assert adjacency.shape == (M, M)
        (Q,) = read_tensors(os.path.join(root, f"qmatrix_{p:05d}.bin"))
        assert Q.shape == (M, M)
        assert np.abs(Q.sum(axis=1) - 1.0).max() < 1e-9

    manifest = json.load(open(os.path.join(root, "manifest.json")))
    assert manifest["preprocess"]["prototypes"] == M
    assert manifest["preprocess"]["depth"] == 2
    assert manifest["preprocess"]["graphs"] == N_GRAPHS
    assert "written_at" in manifest["preprocess"]


def test_preprocess_is_idempotent(dataset_dir, workdir):
    root = os.path.join(workdir, "TOY")
    tracked = ["prototypes_K01.txt", "prototypes_K02.txt", "grid_00003.bin",
               "qmatrix_00007.bin"]
    before = {f: open(os.path.join(root, f), "rb").read() for f in tracked}
    proc = run_cli(*preprocess_args(dataset_dir, workdir), cwd=workdir)
    assert proc.returncode == 0, proc.stderr
    for f in tracked:
        assert open(os.path.join(root, f), "rb").read() == before[f]


def test_train_from_cached_artifacts(dataset_dir, workdir):
    proc = run_cli(
        "train", "--dataset", dataset_dir, "--name", "TOY", "--out", workdir,
        "--prototypes", str(M), "--depth", "2", "--layers", "1",
        "--channels", "4", "--epochs", "1", "--folds", "2",
        cwd=workdir,
    )
    assert proc.returncode == 0, proc.stderr
    assert "mean accuracy" in proc.stdout

    root = os.path.join(workdir, "TOY")
    folds, mean, stderr = read_metrics(os.path.join(root, "metrics.txt"))
    assert len(folds) == 2
    assert all(fm.epochs == 1 for fm in folds)
    assert 0.0 <= mean <= 1.0

    header, tensors = read_checkpoint(os.path.join(root, "checkpoint_fold00.bin"))
    assert header["kind"] == "fold-model"
    assert header["config"]["M"] == M
    assert header["config"]["epochs"] == 1
    assert header["n_classes"] == 2
    assert len(tensors) > 0

    manifest = json.load(open(os.path.join(root, "manifest.json")))
    assert "preprocess" in manifest  # earlier section survives
    assert manifest["train"]["metrics_file"] == "metrics.txt"
    assert len(manifest["train"]["checkpoints"]) == 2


def test_train_without_cache_exits_2(dataset_dir, tmp_path):
    proc = run_cli(
        "train", "--dataset", dataset_dir, "--name", "TOY",
        "--out", str(tmp_path), "--prototypes", str(M), "--folds", "2",
        cwd=str(tmp_path),
    )
    assert proc.returncode == 2
    assert "run preprocess first" in proc.stderr


def test_train_with_mismatched_prototype_count_exits_2(dataset_dir, workdir):
    proc = run_cli(
        "train", "--dataset", dataset_dir, "--name", "TOY", "--out", workdir,
        "--prototypes", "40", "--depth", "2", "--folds", "2",
        cwd=workdir,
    )
    assert proc.returncode == 2
    assert "re-run preprocess" in proc.stderr


def test_missing_dataset_exits_2(tmp_path):
    proc = run_cli(
        "preprocess", "--dataset", str(tmp_path / "nowhere"), "--name", "X",
        cwd=str(tmp_path),
    )
    assert proc.returncode == 2
    assert proc.stderr.startswith("error:")


def test_malformed_dataset_exits_2(tmp_path):
    (tmp_path / "BAD_A.txt").write_text("1, 1\n")
    (tmp_path / "BAD_graph_indicator.txt").write_text("1\n")
    (tmp_path / "BAD_graph_labels.txt").write_text("0\n")
    proc = run_cli(
        "preprocess", "--dataset", str(tmp_path), "--name", "BAD",
        cwd=str(tmp_path),
    )
    assert proc.returncode == 2
    assert "self-loop" in proc.stderr


def test_inspect_reports_and_checks(dataset_dir, workdir):
    proc = run_cli(
        "inspect", "--dataset", dataset_dir, "--name", "TOY", "--out", workdir,
        "--graph", "0", "--depth", "2", "--check",
        cwd=workdir,
    )
    assert proc.returncode == 0, proc.stderr
    assert "vertices" in proc.stdout
    assert "mixing matrix diagonal" in proc.stdout
    assert "prototype assignments" in proc.stdout  # artifacts exist by now
    assert "grid: features" in proc.stdout
    assert "checks passed" in proc.stdout


def test_inspect_rejects_out_of_range_index(dataset_dir, tmp_path):
    proc = run_cli(
        "inspect", "--dataset", dataset_dir, "--name", "TOY",
        "--graph", "99",
        cwd=str(tmp_path),
    )
    assert proc.returncode == 2
    assert "out of range" in proc.stderr


def test_numeric_failure_exits_3(dataset_dir, tmp_path, monkeypatch):
    # a mixing matrix that lost mass must be flagged as a numeric failure
    def broken_mixing(adjacency, group_tol=1e-8):
        n = adjacency.shape[0]
        return np.full((n, n), 0.9 / n)

    monkeypatch.setattr(cli, "average_mixing_matrix", broken_mixing)
    code = cli.main([
        "inspect", "--dataset", dataset_dir, "--name", "TOY",
        "--out", str(tmp_path), "--graph", "0", "--depth", "2", "--check",
    ])
    assert code == 3


def test_main_returns_usage_code_in_process():
    assert cli.main(["preprocess"]) == 1
