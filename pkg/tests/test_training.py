"""Cross-validation harness: folds, Adam, fitting, metrics files."""

import numpy as np
import pytest
from conftest import small_dataset

from qwgrid.training import (
    AdamState,
    TrainConfig,
    adam_step,
    cross_entropy,
    evaluate,
    fit,
    init_adam,
    kfold_split,
    prepare_inputs,
    read_metrics,
    train,
    write_metrics,
)

SMALL = dict(
    M=8,
    T=2,
    conv_channels=4,
    L=2,
    epochs=3,
    batch_size=4,
    folds=2,
    head_conv_channels=(4,),
    head_pool_after=(True,),
    head_dense_units=8,
)


def small_config(**overrides):
    return TrainConfig(**{**SMALL, **overrides})


# -- folds ---------------------------------------------------------------


def test_kfold_partitions_every_graph_exactly_once(rng):
    ds = small_dataset(rng, n_graphs=23)
    splits = kfold_split(ds, folds=5, seed=0)
    assert len(splits) == 5
    seen = []
    for train_idx, test_idx in splits:
        assert np.intersect1d(train_idx, test_idx).size == 0
        assert len(train_idx) + len(test_idx) == len(ds)
        seen.extend(test_idx.tolist())
    assert sorted(seen) == list(range(len(ds)))


def test_kfold_is_stratified(rng):
    ds = small_dataset(rng, n_graphs=20)  # 10 per class
    splits = kfold_split(ds, folds=5, seed=3)
    for _, test_idx in splits:
        counts = np.bincount(ds.class_labels[test_idx], minlength=2)
        assert np.array_equal(counts, [2, 2])


def test_kfold_sizes_differ_by_at_most_one(rng):
    ds = small_dataset(rng, n_graphs=17)
    sizes = [len(test) for _, test in kfold_split(ds, folds=4, seed=0)]
    assert max(sizes) - min(sizes) <= 1
    assert sum(sizes) == 17


def test_kfold_validation_and_warnings(rng):
    ds = small_dataset(rng, n_graphs=6)
    with pytest.raises(ValueError, match="folds"):
        kfold_split(ds, folds=1, seed=0)
    with pytest.raises(ValueError, match="cannot make"):
        kfold_split(ds, folds=7, seed=0)
    with pytest.warns(UserWarning, match="stratification"):
        kfold_split(ds, folds=5, seed=0)  # 3 per class < 5 folds


def test_kfold_is_seeded(rng):
    ds = small_dataset(rng, n_graphs=12)
    a = kfold_split(ds, folds=3, seed=7)
    b = kfold_split(ds, folds=3, seed=7)
    c = kfold_split(ds, folds=3, seed=8)
    for (ta, sa), (tb, sb) in zip(a, b):
        assert np.array_equal(ta, tb) and np.array_equal(sa, sb)
    assert any(not np.array_equal(sa, sc) for (_, sa), (_, sc) in zip(a, c))


# -- loss and optimizer ----------------------------------------------------


def test_cross_entropy_floors_tiny_probabilities():
    assert cross_entropy(np.array([0.25, 0.75]), 1) == pytest.approx(-np.log(0.75))
    floored = cross_entropy(np.array([1.0, 0.0]), 1)
    assert np.isfinite(floored)
    assert floored == pytest.approx(-np.log(1e-12))


def test_adam_matches_a_reference_implementation():
    # independent scalar reference, bias-corrected, eps outside the sqrt
    lr, b1, b2, eps = 0.01, 0.9, 0.999, 1e-8
    p_ref, m_ref, v_ref = 1.0, 0.0, 0.0
    params = [np.array([1.0])]
    state = init_adam(params)
    for t in range(1, 6):
        g = float(np.sin(t))
        m_ref = b1 * m_ref + (1 - b1) * g
        v_ref = b2 * v_ref + (1 - b2) * g * g
        m_hat = m_ref / (1 - b1**t)
        v_hat = v_ref / (1 - b2**t)
        p_ref -= lr * m_hat / (np.sqrt(v_hat) + eps)
        params, state = adam_step(params, [np.array([g])], state, lr)
        assert params[0][0] == pytest.approx(p_ref, abs=1e-15)
    assert state.step == 5


def test_adam_rejects_non_finite_gradients():
    params = [np.zeros(3)]
    state = init_adam(params)
    with pytest.raises(FloatingPointError, match="non-finite"):
        adam_step(params, [np.array([1.0, np.nan, 0.0])], state, 0.1)
    assert state.step == 0  # aborted before any state advanced


def test_adam_returns_fresh_arrays():
    params = [np.ones(2)]
    state = init_adam(params)
    updated, _ = adam_step(params, [np.ones(2)], state, 0.1)
    assert updated[0] is not params[0]
    assert np.all(params[0] == 1.0)


# -- fit / evaluate ----------------------------------------------------------


def _prepared_problem(rng, n_graphs=10):
    ds = small_dataset(rng, n_graphs=n_graphs)
    config = small_config()
    prepared = prepare_inputs(ds, config)
    net = config.network_config(len(ds.label_alphabet), ds.n_classes)
    features = np.stack([g.features for g in prepared.grids])
    mixing = np.stack(prepared.mixing)
    return ds, config, prepared, net, features, mixing


def test_fit_is_reproducible_and_reduces_loss(rng):
    ds, config, prepared, net, features, mixing = _prepared_problem(rng)
    labels = ds.class_labels

    losses = []
    finals = []
    for _ in range(2):
        params, loss = fit(
            features, mixing, labels, net,
            learning_rate=1e-3, epochs=8, batch_size=4,
            rng=np.random.default_rng(5),
        )
        losses.append(loss)
        finals.append(params)
    assert losses[0] == losses[1]
    for a, b in zip(
        [finals[0].final_W, finals[0].final_b],
        [finals[1].final_W, finals[1].final_b],
    ):
        assert np.array_equal(a, b)

    _, early_loss = fit(
        features, mixing, labels, net,
        learning_rate=1e-3, epochs=1, batch_size=4,
        rng=np.random.default_rng(5),
    )
    assert losses[0] < early_loss


def test_evaluate_counts_confusion_by_true_class(rng):
    ds, config, prepared, net, features, mixing = _prepared_problem(rng)
    params, _ = fit(
        features, mixing, ds.class_labels, net,
        learning_rate=1e-3, epochs=2, batch_size=4,
        rng=np.random.default_rng(0),
    )
    accuracy, confusion = evaluate(
        params, net, prepared.grids, prepared.mixing, ds.class_labels
    )
    assert confusion.shape == (2, 2)
    assert confusion.sum() == len(ds)
    assert accuracy == pytest.approx(np.trace(confusion) / len(ds))
    per_class = np.bincount(ds.class_labels, minlength=2)
    assert np.array_equal(confusion.sum(axis=1), per_class)


# -- end-to-end train ---------------------------------------------------------


def test_train_runs_both_prototype_modes(rng):
    ds = small_dataset(rng, n_graphs=10)
    trans = train(ds, small_config(epochs=2))
    assert len(trans.fold_metrics) == 2
    assert len(trans.models) == 2
    assert 0.0 <= trans.mean_accuracy <= 1.0

    induc = train(ds, small_config(epochs=2, transductive_prototypes=False))
    assert len(induc.fold_metrics) == 2


def test_train_reuses_prepared_inputs(rng):
    ds = small_dataset(rng, n_graphs=10)
    config = small_config(epochs=2)
    prepared = prepare_inputs(ds, config)
    a = train(ds, config, prepared=prepared)
    b = train(ds, config)
    assert a.mean_accuracy == b.mean_accuracy
    for fa, fb in zip(a.fold_metrics, b.fold_metrics):
        assert fa.accuracy == fb.accuracy
        assert fa.loss_final == fb.loss_final


def test_train_stderr_uses_sample_std(rng):
    ds = small_dataset(rng, n_graphs=12)
    result = train(ds, small_config(epochs=2, folds=3))
    accs = np.array([fm.accuracy for fm in result.fold_metrics])
    expected = accs.std(ddof=1) / np.sqrt(len(accs))
    assert result.stderr_accuracy == pytest.approx(expected, abs=1e-15)
    assert result.mean_accuracy == pytest.approx(accs.mean(), abs=1e-15)


def test_config_validation():
    with pytest.raises(ValueError, match="folds"):
        small_config(folds=1)
    with pytest.raises(ValueError, match="dropout"):
        small_config(dropout=1.0)
    with pytest.raises(ValueError, match="learning_rate"):
        small_config(learning_rate=0.0)
    with pytest.raises(ValueError, match="M must be"):
        small_config(M=0)


# -- metrics files -------------------------------------------------------------


def test_metrics_file_roundtrip(tmp_path, rng):
    ds = small_dataset(rng, n_graphs=10)
    result = train(ds, small_config(epochs=2))
    path = str(tmp_path / "metrics.txt")
    write_metrics(path, result)

    folds, mean, stderr = read_metrics(path)
    assert len(folds) == 2
    for got, want in zip(folds, result.fold_metrics):
        assert got.fold == want.fold
        assert got.accuracy == want.accuracy  # %.17g roundtrips exactly
        assert got.loss_final == want.loss_final
        assert got.epochs == want.epochs
    assert mean == result.mean_accuracy
    assert stderr == result.stderr_accuracy

    lines = open(path).read().splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("0,") and lines[1].startswith("1,")
    assert len(lines[0].split(",")) == 4
    assert len(lines[2].split(",")) == 2


def test_metrics_file_validation(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("\n")
    with pytest.raises(ValueError, match="empty"):
        read_metrics(str(empty))
    bad = tmp_path / "bad.txt"
    bad.write_text("0,1.0\n0.5,0.1\n")
    with pytest.raises(ValueError, match="malformed fold line"):
        read_metrics(str(bad))
