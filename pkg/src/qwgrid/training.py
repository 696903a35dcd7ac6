"""Cross-validation training harness: folds, loss, Adam, metrics.

One ``train`` invocation runs a single stratified k-fold experiment;
every random choice (fold assignment, weight init, batch order, dropout
masks) derives from ``TrainConfig.seed``, so a rerun with the same
config and dataset reproduces the metrics bit for bit in
single-threaded mode.  Repetition with fresh randomness is a matter of
calling ``train`` again with different seeds and aggregating.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .alignment import AlignedGrid, PrototypeSet, aligned_grid, discover_prototypes
from .graphs import Dataset, feature_dimension, vertex_features
from .network import (
    NetworkConfig,
    NetworkParams,
    batch_backward,
    batch_forward,
    init_params,
    param_arrays,
    params_from_arrays,
)
from .quantum import average_mixing_matrix

PROB_FLOOR = 1e-12


@dataclass
class TrainConfig:
    """Hyperparameters of one cross-validated experiment."""

    M: int = 64  # grid rows / prototype count
    T: int = 5  # graph convolution layers
    conv_channels: int = 32
    L: int = 10  # depth levels for alignment
    learning_rate: float = 5e-5
    dropout: float = 0.5
    epochs: int = 100
    batch_size: int = 32
    folds: int = 10
    seed: int = 0
    transductive_prototypes: bool = True  # False: re-cluster per fold on train graphs
    head_conv_channels: tuple[int, ...] = (64, 64, 64)
    head_pool_after: tuple[bool, ...] = (True, True, False)
    head_dense_units: int = 64
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("M", "T", "conv_channels", "L", "epochs", "batch_size",
                     "head_dense_units", "kmeans_max_iter"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")

    def network_config(self, input_channels: int, n_classes: int) -> NetworkConfig:
        return NetworkConfig(
            input_channels=input_channels,
            n_classes=n_classes,
            grid_size=self.M,
            conv_layers=self.T,
            conv_channels=self.conv_channels,
            head_conv_channels=self.head_conv_channels,
            head_pool_after=self.head_pool_after,
            head_dense_units=self.head_dense_units,
            dropout_rate=self.dropout,
        )


def kfold_split(
    dataset: Dataset, folds: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified shuffled k-fold partition.

    Each class is shuffled and dealt round-robin into folds with a
    cursor that carries over between classes, so per-class fold counts
    differ by at most one and total fold sizes stay balanced.  A class
    smaller than the fold count cannot be stratified and is reported
    with a warning (its members are still dealt out).
    """
    n = len(dataset)
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > n:
        raise ValueError(f"cannot make {folds} folds from {n} graphs")
    rng = np.random.default_rng(seed)
    fold_members: list[list[int]] = [[] for _ in range(folds)]
    cursor = 0
    for cls in sorted({int(c) for c in dataset.class_labels}):
        members = np.nonzero(dataset.class_labels == cls)[0].copy()
        if len(members) < folds:
            warnings.warn(
                f"class {cls} has {len(members)} graphs for {folds} folds; "
                "stratification is impossible for it",
                stacklevel=2,
            )
        rng.shuffle(members)
        for idx in members:
            fold_members[cursor % folds].append(int(idx))
            cursor += 1
    splits = []
    everything = set(range(n))
    for f in range(folds):
        test = np.array(sorted(fold_members[f]), dtype=int)
        train = np.array(sorted(everything.difference(fold_members[f])), dtype=int)
        splits.append((train, test))
    return splits


def cross_entropy(probabilities: np.ndarray, label: int) -> float:
    """−ln p[label], with p floored at 1e−12 so the loss stays finite."""
    p = float(np.asarray(probabilities).reshape(-1)[label])
    return float(-np.log(max(p, PROB_FLOOR)))


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(arrays: list[np.ndarray]) -> AdamState:
    return AdamState(
        m=[np.zeros_like(a) for a in arrays],
        v=[np.zeros_like(a) for a in arrays],
    )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update over a list of tensors.

    Returns fresh parameter arrays; the moment accumulators in ``state``
    are updated in place and the step counter advances.  A non-finite
    gradient aborts the step.
    """
    for k, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in tensor {k}")
    state.step += 1
    t = state.step
    correct1 = 1.0 - state.beta1**t
    correct2 = 1.0 - state.beta2**t
    updated = []
    for k, (p, g) in enumerate(zip(params, grads)):
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[k] / correct1
        v_hat = state.v[k] / correct2
        updated.append(p - lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return updated, state


# --------------------------------------------------------------------------
# preprocessing glue


@dataclass
class PreparedInputs:
    """Alignment products for a whole dataset: one grid and Q per graph."""

    prototypes: list[PrototypeSet]
    grids: list[AlignedGrid]
    mixing: list[np.ndarray]


def prepare_inputs(
    dataset: Dataset,
    config: TrainConfig,
    prototype_graphs: list[int] | None = None,
) -> PreparedInputs:
    """Discover prototypes and build every graph's grid and mixing matrix.

    ``prototype_graphs`` restricts prototype discovery (the inductive
    setting passes the training indices); grids and Q are always built
    for all graphs.
    """
    prototypes = discover_prototypes(
        dataset,
        config.M,
        config.L,
        config.seed,
        graph_indices=prototype_graphs,
        max_iter=config.kmeans_max_iter,
        tol=config.kmeans_tol,
    )
    grids = [
        aligned_grid(p, dataset, prototypes, vertex_features(dataset, p))
        for p in range(len(dataset))
    ]
    mixing = [average_mixing_matrix(g.adjacency) for g in grids]
    return PreparedInputs(prototypes=prototypes, grids=grids, mixing=mixing)


# --------------------------------------------------------------------------
# fitting and evaluation


def fit(
    features: np.ndarray,
    mixing: np.ndarray,
    labels: np.ndarray,
    net_config: NetworkConfig,
    learning_rate: float,
    epochs: int,
    batch_size: int,
    rng: np.random.Generator,
) -> tuple[NetworkParams, float]:
    """Mini-batch Adam on one training set; returns (params, final-epoch loss).

    ``rng`` drives initialization, epoch shuffling, and dropout masks in
    a fixed consumption order, which is what makes training runs
    reproducible from a single seed.
    """
    n = features.shape[0]
    labels = np.asarray(labels, dtype=int)
    params = init_params(net_config, rng)
    arrays = param_arrays(params)
    state = init_adam(arrays)
    last_epoch_loss = float("nan")
    for epoch in range(epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, batch_size):
            sel = order[start : start + batch_size]
            trace = batch_forward(
                mixing[sel], features[sel], params, net_config,
                train_mode=True, rng=rng,
            )
            picked = trace.probs[np.arange(len(sel)), labels[sel]]
            loss = float(-np.log(np.maximum(picked, PROB_FLOOR)).mean())
            if not np.isfinite(loss):
                raise FloatingPointError(
                    f"non-finite training loss at epoch {epoch}, batch start {start}"
                )
            grads = batch_backward(trace, labels[sel])
            arrays, state = adam_step(arrays, param_arrays(grads), state, learning_rate)
            params = params_from_arrays(net_config, arrays)
            batch_losses.append(loss)
        last_epoch_loss = float(np.mean(batch_losses))
    return params, last_epoch_loss


def evaluate(
    params: NetworkParams,
    net_config: NetworkConfig,
    grids: list[AlignedGrid],
    mixing: list[np.ndarray],
    labels: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Argmax-probability predictions → (accuracy, confusion matrix).

    Confusion rows index the true class, columns the prediction.
    """
    Z = np.stack([g.features for g in grids])
    Q = np.stack(mixing)
    trace = batch_forward(Q, Z, params, net_config, train_mode=False)
    predictions = trace.probs.argmax(axis=1)
    labels = np.asarray(labels, dtype=int)
    accuracy = float((predictions == labels).mean())
    confusion = np.zeros((net_config.n_classes, net_config.n_classes), dtype=int)
    for truth, pred in zip(labels, predictions):
        confusion[truth, pred] += 1
    return accuracy, confusion


@dataclass
class FoldMetrics:
    fold: int
    accuracy: float
    loss_final: float
    epochs: int


@dataclass
class TrainResult:
    fold_metrics: list[FoldMetrics]
    mean_accuracy: float
    stderr_accuracy: float
    models: list[NetworkParams] = field(default_factory=list)
    confusions: list[np.ndarray] = field(default_factory=list)


def train(
    dataset: Dataset,
    config: TrainConfig,
    prepared: PreparedInputs | None = None,
) -> TrainResult:
    """Stratified k-fold cross-validation of the full pipeline.

    With transductive prototypes (default) the alignment products are
    computed once over all graphs and shared by every fold; the
    inductive variant re-discovers prototypes per fold from that fold's
    training graphs only.  Pass ``prepared`` to reuse cached transductive
    alignment products.
    """
    splits = kfold_split(dataset, config.folds, config.seed)
    c0 = feature_dimension(dataset)
    n_classes = dataset.n_classes
    net_config = config.network_config(c0, n_classes)
    if config.transductive_prototypes and prepared is None:
        prepared = prepare_inputs(dataset, config)

    fold_seeds = np.random.SeedSequence(config.seed).spawn(config.folds)
    fold_metrics = []
    models = []
    confusions = []
    accuracies = []
    for f, (train_idx, test_idx) in enumerate(splits):
        if config.transductive_prototypes:
            inputs = prepared
        else:
            inputs = prepare_inputs(dataset, config, prototype_graphs=list(train_idx))
        rng = np.random.default_rng(fold_seeds[f])
        features = np.stack([inputs.grids[p].features for p in train_idx])
        mixing = np.stack([inputs.mixing[p] for p in train_idx])
        labels = dataset.class_labels[train_idx]
        params, loss_final = fit(
            features, mixing, labels, net_config,
            config.learning_rate, config.epochs, config.batch_size, rng,
        )
        accuracy, confusion = evaluate(
            params,
            net_config,
            [inputs.grids[p] for p in test_idx],
            [inputs.mixing[p] for p in test_idx],
            dataset.class_labels[test_idx],
        )
        fold_metrics.append(
            FoldMetrics(fold=f, accuracy=accuracy, loss_final=loss_final,
                        epochs=config.epochs)
        )
        models.append(params)
        confusions.append(confusion)
        accuracies.append(accuracy)

    accuracies = np.array(accuracies)
    mean = float(accuracies.mean())
    stderr = (
        float(accuracies.std(ddof=1) / np.sqrt(len(accuracies)))
        if len(accuracies) > 1
        else 0.0
    )
    return TrainResult(
        fold_metrics=fold_metrics,
        mean_accuracy=mean,
        stderr_accuracy=stderr,
        models=models,
        confusions=confusions,
    )


# --------------------------------------------------------------------------
# metrics file


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_metrics(path: str, result: TrainResult) -> None:
    """One `fold,accuracy,loss_final,epochs` line per fold, then `mean,stderr`."""
    lines = [
        f"{fm.fold},{_fmt(fm.accuracy)},{_fmt(fm.loss_final)},{fm.epochs}"
        for fm in result.fold_metrics
    ]
    lines.append(f"{_fmt(result.mean_accuracy)},{_fmt(result.stderr_accuracy)}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def read_metrics(path: str) -> tuple[list[FoldMetrics], float, float]:
    with open(path, "r", encoding="ascii") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty metrics file")
    folds = []
    for line in lines[:-1]:
        fields = line.split(",")
        if len(fields) != 4:
            raise ValueError(f"{path}: malformed fold line {line!r}")
        folds.append(
            FoldMetrics(
                fold=int(fields[0]),
                accuracy=float(fields[1]),
                loss_final=float(fields[2]),
                epochs=int(fields[3]),
            )
        )
    summary = lines[-1].split(",")
    if len(summary) != 2:
        raise ValueError(f"{path}: malformed summary line {lines[-1]!r}")
    return folds, float(summary[0]), float(summary[1])
