"""End-to-end acceptance checks, one test per contract item (c01..c10).

Each test pins its tolerance and time budget inline.  Items that call
for a labeled molecular benchmark run against the bundled two-class
generator by default; setting QWGRID_MUTAG_DIR to a directory holding
MUTAG_*.txt files additionally runs the *_mutag variants against the
real dataset.
"""

import os
import time

import numpy as np
import pytest
from conftest import permuted_graph, random_graph

from qwgrid.alignment import (
    affinity_matrix,
    aligned_grid,
    aligned_grid_level,
    correspondence_matrix,
    discover_prototypes,
    graph_db_matrix,
)
from qwgrid.depth import db_representation
from qwgrid.graphs import Dataset, Graph, load_tu_dataset, vertex_features
from qwgrid.network import (
    NetworkConfig,
    batch_forward,
    finite_difference_check,
    init_params,
)
from qwgrid.quantum import average_mixing_matrix, cesaro_mixing_estimate
from qwgrid.training import (
    TrainConfig,
    evaluate,
    fit,
    prepare_inputs,
    train,
    write_metrics,
)

TRIANGLE = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)


def mutag_dataset():
    directory = os.environ.get("QWGRID_MUTAG_DIR")
    if not directory:
        pytest.skip("QWGRID_MUTAG_DIR is not set; no MUTAG copy available here")
    return load_tu_dataset(directory, "MUTAG")


def subset(dataset, indices, name):
    return Dataset(
        name=name,
        graphs=[dataset.graphs[i] for i in indices],
        class_labels=dataset.class_labels[list(indices)],
        label_alphabet=dataset.label_alphabet,
    )


def balanced_ten(dataset):
    """First five graphs of each class, in dataset order."""
    picks = []
    for cls in (0, 1):
        members = np.nonzero(dataset.class_labels == cls)[0][:5]
        picks.extend(int(i) for i in members)
    return subset(dataset, picks, f"{dataset.name}-ten")


def overfit_accuracy(dataset):
    """Train on all graphs of `dataset` and score on the same graphs."""
    config = TrainConfig(epochs=200, batch_size=2)
    prepared = prepare_inputs(dataset, config)
    net = config.network_config(
        len(dataset.label_alphabet), dataset.n_classes
    )
    features = np.stack([g.features for g in prepared.grids])
    mixing = np.stack(prepared.mixing)
    params, _ = fit(
        features, mixing, dataset.class_labels, net,
        config.learning_rate, config.epochs, config.batch_size,
        np.random.default_rng(0),
    )
    accuracy, _ = evaluate(
        params, net, prepared.grids, prepared.mixing, dataset.class_labels
    )
    return accuracy


def test_c01_mixing_matrices_are_doubly_stochastic_on_100_graphs():
    rng = np.random.default_rng(101)
    start = time.process_time()
    for _ in range(100):
        n = int(rng.integers(2, 21))
        Q = average_mixing_matrix(random_graph(rng, n).adjacency)
        assert np.abs(Q - Q.T).max() < 1e-9
        assert np.abs(Q.sum(axis=0) - 1.0).max() < 1e-9
        assert np.abs(Q.sum(axis=1) - 1.0).max() < 1e-9
        assert Q.min() >= -1e-12
        assert Q.max() <= 1.0 + 1e-12
    assert time.process_time() - start < 10.0


def test_c02_time_average_agrees_with_closed_form_on_20_graphs():
    rng = np.random.default_rng(202)
    start = time.process_time()
    for _ in range(20):
        n = int(rng.integers(2, 13))
        H = random_graph(rng, n).adjacency
        Q = average_mixing_matrix(H)
        estimate = cesaro_mixing_estimate(H, horizon_T=2000.0, steps=20000)
        assert np.abs(estimate - Q).max() < 0.01
    assert time.process_time() - start < 120.0


def test_c03_closed_form_fixtures():
    Q = average_mixing_matrix(TRIANGLE)
    expected = np.full((3, 3), 2.0 / 9.0)
    np.fill_diagonal(expected, 5.0 / 9.0)
    assert np.abs(Q - expected).max() < 1e-12

    Q2 = average_mixing_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.abs(Q2 - 0.5).max() < 1e-12

    assert np.array_equal(average_mixing_matrix(np.zeros((6, 6))), np.eye(6))


def test_c04_depth_entropy_fixtures():
    triangle = Graph(adjacency=TRIANGLE)
    rep = db_representation(triangle, 0, 2).values
    assert np.abs(rep - [np.log(3.0), np.log(3.0)]).max() < 1e-12

    path3 = Graph(
        adjacency=np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
    )
    rep = db_representation(path3, 0, 2).values
    assert np.abs(rep - [np.log(2.0), 1.5 * np.log(2.0)]).max() < 1e-12


def _assert_exact_conservation(dataset):
    L, M = 10, 64
    protos = discover_prototypes(dataset, M=M, L=L, seed=0)
    for p, graph in enumerate(dataset.graphs):
        X = vertex_features(dataset, p)
        reps = graph_db_matrix(graph, L)
        for k, proto in enumerate(protos, start=1):
            C = correspondence_matrix(affinity_matrix(reps[:, :k], proto))
            Xh, Ah = aligned_grid_level(X, graph.adjacency, C)
            assert np.array_equal(Xh.sum(axis=0), X.sum(axis=0))
            assert Ah.sum() == graph.adjacency.sum()


def test_c05_grid_transport_is_exactly_conservative(benchmark_dataset):
    _assert_exact_conservation(benchmark_dataset)


def test_c05_mutag_grid_transport_is_exactly_conservative():
    _assert_exact_conservation(mutag_dataset())


def test_c06_isomorphic_graphs_get_identical_grids_and_probabilities():
    rng = np.random.default_rng(606)
    for trial in range(20):
        n = int(rng.integers(4, 16))
        g = random_graph(rng, n, p=0.4)
        twin = permuted_graph(g, rng.permutation(n))
        ds = Dataset(
            name="pair", graphs=[g, twin], class_labels=np.array([0, 1])
        )
        protos = discover_prototypes(ds, M=8, L=3, seed=trial)
        grids = [
            aligned_grid(p, ds, protos, vertex_features(ds, p)) for p in (0, 1)
        ]
        assert np.abs(grids[0].features - grids[1].features).max() <= 1e-12
        assert np.abs(grids[0].adjacency - grids[1].adjacency).max() <= 1e-12

        net = NetworkConfig(
            input_channels=grids[0].features.shape[1],
            n_classes=2,
            grid_size=8,
            conv_layers=2,
            conv_channels=4,
            head_conv_channels=(4,),
            head_pool_after=(True,),
            head_dense_units=8,
        )
        params = init_params(net, seed=trial)
        probs = [
            batch_forward(
                average_mixing_matrix(grid.adjacency)[None],
                grid.features[None],
                params,
                net,
            ).probs[0]
            for grid in grids
        ]
        assert np.abs(probs[0] - probs[1]).max() <= 1e-12


def test_c07_gradient_check_on_the_tiny_network():
    start = time.process_time()
    config = NetworkConfig(
        input_channels=3,
        n_classes=2,
        grid_size=8,
        conv_layers=2,
        conv_channels=4,
        head_conv_channels=(4,),
        head_pool_after=(True,),
        head_dense_units=8,
    )
    err = finite_difference_check(config, seed=3, epsilon=1e-4)
    assert err < 1e-4
    assert time.process_time() - start < 60.0


@pytest.mark.slow
def test_c08_training_overfits_ten_graphs(benchmark_dataset):
    assert overfit_accuracy(balanced_ten(benchmark_dataset)) == 1.0


@pytest.mark.slow
def test_c08_mutag_training_overfits_ten_graphs():
    assert overfit_accuracy(balanced_ten(mutag_dataset())) == 1.0


@pytest.fixture(scope="session")
def full_scale_run(benchmark_dataset):
    start = time.process_time()
    result = train(benchmark_dataset, TrainConfig())
    return result, time.process_time() - start


@pytest.mark.slow
def test_c09_cross_validation_reaches_80_percent(full_scale_run):
    result, cpu_seconds = full_scale_run
    assert len(result.fold_metrics) == 10
    assert result.mean_accuracy >= 0.80
    assert cpu_seconds < 3600.0


@pytest.mark.slow
def test_c09_mutag_cross_validation_reaches_80_percent():
    start = time.process_time()
    result = train(mutag_dataset(), TrainConfig())
    assert result.mean_accuracy >= 0.80
    assert time.process_time() - start < 3600.0


@pytest.mark.slow
def test_c10_metrics_files_are_bitwise_reproducible(
    full_scale_run, benchmark_dataset, tmp_path
):
    first, _ = full_scale_run
    second = train(benchmark_dataset, TrainConfig())
    path_a, path_b = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
    write_metrics(path_a, first)
    write_metrics(path_b, second)
    assert open(path_a, "rb").read() == open(path_b, "rb").read()
