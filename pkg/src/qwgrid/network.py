"""Grid convolution network over quantum-walk visiting probabilities.

The architecture, for a grid of M rows with c₀ input channels:

* a stack of T graph convolutions Z_{t+1} = ReLU(Q·Z_t·W_t), where Q is
  the average mixing matrix of the grid adjacency — features propagate
  with the walk's long-run visiting probabilities instead of raw edges;
* per scale t = 0..T, the running concatenation Z_{0:t} = [Z_0 … Z_t]
  feeds its own 1-D convolutional head (width-5 valid convolutions,
  width-2 max pooling, then a dense layer) with unshared weights;
* the T+1 head outputs are concatenated, passed through inverted
  dropout (training only), and a final dense layer with softmax yields
  class probabilities.

Everything is plain float64 numpy.  The internal core is batched over
graphs (leading axis B); the public single-graph operations wrap it.
Gradients are hand-derived reverse-mode and validated against a central
finite-difference oracle (``finite_difference_check``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .quantum import average_mixing_matrix

FILTER_WIDTH = 5
POOL_WIDTH = 2


# --------------------------------------------------------------------------
# configuration and parameters


@dataclass
class NetworkConfig:
    """Shapes and hyperparameters of the whole network.

    The head layout is given per convolution: ``head_conv_channels[i]``
    output channels for head conv i, followed by a max pool iff
    ``head_pool_after[i]``.  The default (64, 64, 64) with pooling after
    the first two convs is the C64-P2-C64-P2-C64-F64 layout, which needs
    grid_size ≥ 32; smaller grids need a shorter head.
    """

    input_channels: int
    n_classes: int
    grid_size: int = 64
    conv_layers: int = 5
    conv_channels: int = 32
    head_conv_channels: tuple[int, ...] = (64, 64, 64)
    head_pool_after: tuple[bool, ...] = (True, True, False)
    head_dense_units: int = 64
    dropout_rate: float = 0.5

    def __post_init__(self) -> None:
        counts = {
            "input_channels": self.input_channels,
            "n_classes": self.n_classes,
            "grid_size": self.grid_size,
            "conv_channels": self.conv_channels,
            "head_dense_units": self.head_dense_units,
        }
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.conv_layers < 0:
            raise ValueError("conv_layers must be >= 0")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if len(self.head_conv_channels) != len(self.head_pool_after):
            raise ValueError("head_conv_channels and head_pool_after disagree")
        if not self.head_conv_channels:
            raise ValueError("the head needs at least one convolution")
        self.head_lengths()  # raises if the grid is too small for the chain

    def stack_widths(self) -> list[int]:
        """Channel widths c_0..c_T of the graph convolution stack."""
        return [self.input_channels] + [self.conv_channels] * self.conv_layers

    def branch_channels(self, t: int) -> int:
        """Columns of the concatenation Z_{0:t}."""
        return sum(self.stack_widths()[: t + 1])

    def head_lengths(self) -> list[int]:
        """Spatial length after each head stage, starting at grid_size."""
        lengths = [self.grid_size]
        m = self.grid_size
        for i in range(len(self.head_conv_channels)):
            if m < FILTER_WIDTH:
                raise ValueError(
                    f"grid_size {self.grid_size} too small for the head: "
                    f"conv {i} would see length {m} < {FILTER_WIDTH}"
                )
            m -= FILTER_WIDTH - 1
            lengths.append(m)
            if self.head_pool_after[i]:
                if m < POOL_WIDTH:
                    raise ValueError(
                        f"grid_size {self.grid_size} too small for the head: "
                        f"pool {i} would see length {m} < {POOL_WIDTH}"
                    )
                m //= POOL_WIDTH
                lengths.append(m)
        return lengths

    def flatten_size(self) -> int:
        return self.head_lengths()[-1] * self.head_conv_channels[-1]

    def classifier_inputs(self) -> int:
        return (self.conv_layers + 1) * self.head_dense_units


@dataclass
class ConvStackParams:
    """Weight matrices W_t of the graph convolution stack (no biases)."""

    weights: list[np.ndarray]  # W_t: (c_t, c_{t+1})


@dataclass
class BranchHeadParams:
    """One branch's 1-D conv filters, biases, pooling layout, and dense layer."""

    filters: list[np.ndarray]  # (FILTER_WIDTH, c_in, c_out) per conv
    biases: list[np.ndarray]  # (c_out,) per conv
    pool_after: tuple[bool, ...]
    dense_W: np.ndarray  # (flatten, dense_units)
    dense_b: np.ndarray  # (dense_units,)


@dataclass
class NetworkParams:
    conv: ConvStackParams
    heads: list[BranchHeadParams]  # one per branch t = 0..T
    final_W: np.ndarray  # (classifier_inputs, n_classes)
    final_b: np.ndarray  # (n_classes,)


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(config: NetworkConfig, seed) -> NetworkParams:
    """Seeded uniform ±√(6/(fan_in+fan_out)) weights, zero biases.

    ``seed`` may be an int or a Generator; draws happen in a fixed order
    so identical seeds give identical parameters.
    """
    rng = np.random.default_rng(seed)
    widths = config.stack_widths()
    conv_weights = [
        _glorot(rng, (widths[t], widths[t + 1]), widths[t], widths[t + 1])
        for t in range(config.conv_layers)
    ]
    heads = []
    for t in range(config.conv_layers + 1):
        c_in = config.branch_channels(t)
        filters = []
        biases = []
        for c_out in config.head_conv_channels:
            filters.append(
                _glorot(
                    rng,
                    (FILTER_WIDTH, c_in, c_out),
                    FILTER_WIDTH * c_in,
                    FILTER_WIDTH * c_out,
                )
            )
            biases.append(np.zeros(c_out))
            c_in = c_out
        flat = config.flatten_size()
        dense_W = _glorot(rng, (flat, config.head_dense_units), flat, config.head_dense_units)
        heads.append(
            BranchHeadParams(
                filters=filters,
                biases=biases,
                pool_after=tuple(config.head_pool_after),
                dense_W=dense_W,
                dense_b=np.zeros(config.head_dense_units),
            )
        )
    d = config.classifier_inputs()
    final_W = _glorot(rng, (d, config.n_classes), d, config.n_classes)
    return NetworkParams(
        conv=ConvStackParams(weights=conv_weights),
        heads=heads,
        final_W=final_W,
        final_b=np.zeros(config.n_classes),
    )


def param_arrays(params: NetworkParams) -> list[np.ndarray]:
    """All parameter tensors in canonical (checkpoint) order."""
    arrays = list(params.conv.weights)
    for head in params.heads:
        arrays.extend(head.filters)
        arrays.extend(head.biases)
        arrays.append(head.dense_W)
        arrays.append(head.dense_b)
    arrays.append(params.final_W)
    arrays.append(params.final_b)
    return arrays


def params_from_arrays(config: NetworkConfig, arrays: list[np.ndarray]) -> NetworkParams:
    """Rebuild a NetworkParams from the canonical tensor list."""
    it = iter(arrays)
    conv = ConvStackParams(weights=[next(it) for _ in range(config.conv_layers)])
    heads = []
    n_convs = len(config.head_conv_channels)
    for _ in range(config.conv_layers + 1):
        filters = [next(it) for _ in range(n_convs)]
        biases = [next(it) for _ in range(n_convs)]
        heads.append(
            BranchHeadParams(
                filters=filters,
                biases=biases,
                pool_after=tuple(config.head_pool_after),
                dense_W=next(it),
                dense_b=next(it),
            )
        )
    final_W = next(it)
    final_b = next(it)
    rest = list(it)
    if rest:
        raise ValueError(f"{len(rest)} unexpected extra tensors")
    return NetworkParams(conv=conv, heads=heads, final_W=final_W, final_b=final_b)


def zeros_like_params(params: NetworkParams) -> NetworkParams:
    return NetworkParams(
        conv=ConvStackParams(weights=[np.zeros_like(w) for w in params.conv.weights]),
        heads=[
            BranchHeadParams(
                filters=[np.zeros_like(f) for f in h.filters],
                biases=[np.zeros_like(b) for b in h.biases],
                pool_after=h.pool_after,
                dense_W=np.zeros_like(h.dense_W),
                dense_b=np.zeros_like(h.dense_b),
            )
            for h in params.heads
        ],
        final_W=np.zeros_like(params.final_W),
        final_b=np.zeros_like(params.final_b),
    )


# --------------------------------------------------------------------------
# elementary layers (public single-graph operations)


def _relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def quantum_conv_forward(Q: np.ndarray, Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """One graph convolution: ReLU(Q·Z·W).  Rows (grid vertices) keep order."""
    Q, Z, W = (np.asarray(a, dtype=float) for a in (Q, Z, W))
    if Q.shape[0] != Q.shape[1] or Q.shape[1] != Z.shape[0] or Z.shape[1] != W.shape[0]:
        raise ValueError(
            f"shape mismatch: Q {Q.shape}, Z {Z.shape}, W {W.shape}"
        )
    for name, a in (("Q", Q), ("Z", Z), ("W", W)):
        if not np.all(np.isfinite(a)):
            raise ValueError(f"{name} contains non-finite entries")
    return _relu(Q @ Z @ W)


def conv_stack_forward(
    Q: np.ndarray, Z0: np.ndarray, params: ConvStackParams
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Run the stack; returns ([Z_0..Z_T], [Z_{0:0}..Z_{0:T}])."""
    Zs = [np.asarray(Z0, dtype=float)]
    for W in params.weights:
        Zs.append(quantum_conv_forward(Q, Zs[-1], W))
    concats = [np.concatenate(Zs[: t + 1], axis=1) for t in range(len(Zs))]
    return Zs, concats


def conv1d_forward(x: np.ndarray, filters: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Valid width-5 stride-1 cross-correlation plus bias.

    ``x`` is (m, c_in), ``filters`` is (5, c_in, c_out); returns
    (m−4, c_out).
    """
    out, _ = _conv1d_batch(np.asarray(x, dtype=float)[None], filters, bias)
    return out[0]


def maxpool1d(x: np.ndarray) -> np.ndarray:
    """Channelwise max over disjoint width-2 windows; odd tail dropped."""
    pooled, _ = _maxpool_batch(np.asarray(x, dtype=float)[None])
    return pooled[0]


def head_forward(Z_cat: np.ndarray, head: BranchHeadParams) -> np.ndarray:
    """One branch head: convs (ReLU, optional pool), flatten, dense, ReLU."""
    a = np.asarray(Z_cat, dtype=float)[None]
    for filt, bias, do_pool in zip(head.filters, head.biases, head.pool_after):
        conv, _ = _conv1d_batch(a, filt, bias)
        a = _relu(conv)
        if do_pool:
            a, _ = _maxpool_batch(a)
    flat = a.reshape(1, -1)
    return _relu(flat @ head.dense_W + head.dense_b)[0]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def classifier_forward(
    branch_outputs: np.ndarray,
    final_W: np.ndarray,
    final_b: np.ndarray,
    dropout_rate: float,
    train_mode: bool,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Concatenate branch outputs, (inverted) dropout, dense, softmax.

    Dropout only acts in train mode: surviving units are scaled by
    1/(1−rate) so evaluation needs no rescaling.
    """
    x = np.asarray(branch_outputs, dtype=float).reshape(-1)
    if train_mode and dropout_rate > 0.0:
        if rng is None:
            raise ValueError("train-mode dropout needs a random generator")
        mask = (rng.random(x.shape) >= dropout_rate) / (1.0 - dropout_rate)
        x = x * mask
    logits = x @ final_W + final_b
    return softmax(logits)


# --------------------------------------------------------------------------
# batched core


def _conv1d_batch(
    x: np.ndarray, filters: np.ndarray, bias: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """x (B,m,c_in) → (output (B,m−4,c_out), im2col windows (B,m−4,5·c_in)).

    The window tensor is materialized contiguously so the convolution
    runs as one large 2-D GEMM (matmul on the overlapping strided view
    falls off the BLAS fast path); the backward pass reuses it.
    """
    B, m, c_in = x.shape
    w, f_in, c_out = filters.shape
    if f_in != c_in:
        raise ValueError(f"filter expects {f_in} channels, input has {c_in}")
    if m < w:
        raise ValueError(f"input length {m} shorter than filter width {w}")
    m_out = m - w + 1
    view = sliding_window_view(x, w, axis=1).transpose(0, 1, 3, 2)  # (B, m_out, w, c_in)
    windows = np.ascontiguousarray(view).reshape(B, m_out, w * c_in)
    out = windows.reshape(B * m_out, w * c_in) @ filters.reshape(w * c_in, c_out)
    return out.reshape(B, m_out, c_out) + bias, windows


def _maxpool_batch(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """x (B,m,c) → (pooled (B,⌊m/2⌋,c), argmax (B,⌊m/2⌋,c) in {0,1})."""
    B, m, c = x.shape
    if m < POOL_WIDTH:
        raise ValueError(f"input length {m} shorter than pool width {POOL_WIDTH}")
    mm = m // POOL_WIDTH
    windows = x[:, : POOL_WIDTH * mm, :].reshape(B, mm, POOL_WIDTH, c)
    idx = windows.argmax(axis=2)
    pooled = np.take_along_axis(windows, idx[:, :, None, :], axis=2)[:, :, 0, :]
    return pooled, idx


@dataclass
class _HeadTrace:
    conv_inputs: list[np.ndarray]  # input to each conv
    conv_windows: list[np.ndarray]  # im2col windows per conv
    conv_posts: list[np.ndarray]  # post-activation conv outputs
    pool_idx: list[np.ndarray | None]  # argmax per pooled layer
    flat: np.ndarray  # (B, flatten)
    dense_post: np.ndarray  # (B, dense_units), post-activation


@dataclass
class ForwardTrace:
    """Everything the backward pass needs, for a batch of B grids."""

    config: NetworkConfig
    params: NetworkParams
    Q: np.ndarray  # (B, M, M)
    Zs: list[np.ndarray]  # (B, M, c_t), post-activation
    QZs: list[np.ndarray]  # Q @ Z_t for t = 0..T−1
    concats: list[np.ndarray]  # (B, M, C_t)
    head_traces: list[_HeadTrace]
    concat_features: np.ndarray  # (B, D): branch outputs side by side
    dropout_mask: np.ndarray | None  # scale included; None in eval mode
    dropped: np.ndarray  # classifier input after dropout
    logits: np.ndarray  # (B, n_classes)
    probs: np.ndarray  # (B, n_classes)
    activation: str


def _act(x: np.ndarray, activation: str) -> np.ndarray:
    return _relu(x) if activation == "relu" else x


def _act_mask(post: np.ndarray, activation: str) -> np.ndarray:
    # gradient factor; for ReLU the subgradient at 0 is 0
    if activation == "relu":
        return (post > 0).astype(float)
    return np.ones_like(post)


def batch_forward(
    Q: np.ndarray,
    Z0: np.ndarray,
    params: NetworkParams,
    config: NetworkConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    activation: str = "relu",
) -> ForwardTrace:
    """Forward pass for a batch: Q (B,M,M), Z0 (B,M,c₀)."""
    Q = np.asarray(Q, dtype=float)
    Z0 = np.asarray(Z0, dtype=float)
    if Q.ndim != 3 or Z0.ndim != 3 or Q.shape[:2] != (Z0.shape[0], Z0.shape[1]):
        raise ValueError(f"batch shapes disagree: Q {Q.shape}, Z0 {Z0.shape}")
    if Z0.shape[1] != config.grid_size or Z0.shape[2] != config.input_channels:
        raise ValueError(
            f"Z0 {Z0.shape[1:]} does not match config "
            f"({config.grid_size}, {config.input_channels})"
        )
    B = Z0.shape[0]

    Zs = [Z0]
    QZs = []
    for W in params.conv.weights:
        QZ = Q @ Zs[-1]
        QZs.append(QZ)
        Zs.append(_act(QZ @ W, activation))
    concats = [np.concatenate(Zs[: t + 1], axis=2) for t in range(len(Zs))]

    head_traces = []
    outputs = []
    for t, head in enumerate(params.heads):
        a = concats[t]
        conv_inputs: list[np.ndarray] = []
        conv_windows: list[np.ndarray] = []
        conv_posts: list[np.ndarray] = []
        pool_idx: list[np.ndarray | None] = []
        for filt, bias, do_pool in zip(head.filters, head.biases, head.pool_after):
            conv_inputs.append(a)
            pre, wins = _conv1d_batch(a, filt, bias)
            conv_windows.append(wins)
            post = _act(pre, activation)
            conv_posts.append(post)
            if do_pool:
                a, idx = _maxpool_batch(post)
                pool_idx.append(idx)
            else:
                a = post
                pool_idx.append(None)
        flat = a.reshape(B, -1)
        dense_post = _act(flat @ head.dense_W + head.dense_b, activation)
        head_traces.append(
            _HeadTrace(
                conv_inputs=conv_inputs,
                conv_windows=conv_windows,
                conv_posts=conv_posts,
                pool_idx=pool_idx,
                flat=flat,
                dense_post=dense_post,
            )
        )
        outputs.append(dense_post)

    concat_features = np.concatenate(outputs, axis=1)  # (B, D)
    if train_mode and config.dropout_rate > 0.0:
        if rng is None:
            raise ValueError("train-mode dropout needs a random generator")
        keep = rng.random(concat_features.shape) >= config.dropout_rate
        dropout_mask = keep / (1.0 - config.dropout_rate)
        dropped = concat_features * dropout_mask
    else:
        dropout_mask = None
        dropped = concat_features
    logits = dropped @ params.final_W + params.final_b
    probs = softmax(logits)
    return ForwardTrace(
        config=config,
        params=params,
        Q=Q,
        Zs=Zs,
        QZs=QZs,
        concats=concats,
        head_traces=head_traces,
        concat_features=concat_features,
        dropout_mask=dropout_mask,
        dropped=dropped,
        logits=logits,
        probs=probs,
        activation=activation,
    )


def forward(
    Q: np.ndarray,
    Z0: np.ndarray,
    params: NetworkParams,
    config: NetworkConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> ForwardTrace:
    """Single-graph forward pass (batch of one)."""
    return batch_forward(
        np.asarray(Q)[None], np.asarray(Z0)[None], params, config, train_mode, rng
    )


def batch_backward(trace: ForwardTrace, labels: np.ndarray) -> NetworkParams:
    """Gradients of the mean cross-entropy over the batch.

    Q and the grids are constants; only network parameters get
    gradients.  Returns a NetworkParams-shaped container.
    """
    config = trace.config
    params = trace.params
    act = trace.activation
    B = trace.probs.shape[0]
    labels = np.asarray(labels, dtype=int).reshape(B)

    grads = zeros_like_params(params)

    dlogits = trace.probs.copy()
    dlogits[np.arange(B), labels] -= 1.0
    dlogits /= B

    grads.final_W[...] = trace.dropped.reshape(B, -1).T @ dlogits
    grads.final_b[...] = dlogits.sum(axis=0)
    dconcat = dlogits @ params.final_W.T
    if trace.dropout_mask is not None:
        dconcat = dconcat * trace.dropout_mask

    T = config.conv_layers
    D0 = config.head_dense_units
    dZ = [np.zeros_like(Z) for Z in trace.Zs]
    widths = config.stack_widths()

    for t in reversed(range(T + 1)):
        head = params.heads[t]
        ht = trace.head_traces[t]
        gh = grads.heads[t]
        chunk = dconcat[:, t * D0 : (t + 1) * D0]

        dpost = chunk * _act_mask(ht.dense_post, act)
        gh.dense_W[...] = ht.flat.T @ dpost
        gh.dense_b[...] = dpost.sum(axis=0)
        dflat = dpost @ head.dense_W.T

        # walk the conv/pool chain backwards
        last = ht.conv_posts[-1]
        if head.pool_after[-1]:
            pooled_len = last.shape[1] // POOL_WIDTH
            da = dflat.reshape(B, pooled_len, last.shape[2])
        else:
            da = dflat.reshape(B, last.shape[1], last.shape[2])
        for j in reversed(range(len(head.filters))):
            post = ht.conv_posts[j]
            if head.pool_after[j]:
                idx = ht.pool_idx[j]
                B_, mm, c = da.shape
                unpooled = np.zeros((B_, mm, POOL_WIDTH, c))
                np.put_along_axis(unpooled, idx[:, :, None, :], da[:, :, None, :], axis=2)
                dpost_conv = np.zeros_like(post)
                dpost_conv[:, : POOL_WIDTH * mm, :] = unpooled.reshape(
                    B_, POOL_WIDTH * mm, c
                )
            else:
                dpost_conv = da
            dpre = dpost_conv * _act_mask(post, act)

            x_in = ht.conv_inputs[j]
            c_in = x_in.shape[2]
            m_out = dpre.shape[1]
            windows2 = ht.conv_windows[j].reshape(B * m_out, FILTER_WIDTH * c_in)
            dpre2 = dpre.reshape(B * m_out, -1)
            gh.filters[j][...] = (windows2.T @ dpre2).reshape(FILTER_WIDTH, c_in, -1)
            gh.biases[j][...] = dpre.sum(axis=(0, 1))

            filt_flat = head.filters[j].reshape(FILTER_WIDTH * c_in, -1)
            dwindows = (dpre2 @ filt_flat.T).reshape(B, m_out, FILTER_WIDTH, c_in)
            dx = np.zeros_like(x_in)
            for w in range(FILTER_WIDTH):
                dx[:, w : w + m_out, :] += dwindows[:, :, w, :]
            da = dx

        # da is the gradient into Z_{0:t}; split across Z_0..Z_t columns
        offset = 0
        for z in range(t + 1):
            dZ[z] += da[:, :, offset : offset + widths[z]]
            offset += widths[z]

    # graph convolution stack
    for t in reversed(range(1, T + 1)):
        dpre = dZ[t] * _act_mask(trace.Zs[t], act)
        QZ = trace.QZs[t - 1]
        ci = QZ.shape[2]
        grads.conv.weights[t - 1][...] = QZ.reshape(-1, ci).T @ dpre.reshape(
            -1, dpre.shape[2]
        )
        dQZ = dpre @ params.conv.weights[t - 1].T
        dZ[t - 1] += trace.Q.swapaxes(1, 2) @ dQZ

    return grads


def backward(trace: ForwardTrace, label) -> NetworkParams:
    """Gradients for a single-graph trace (or a batch with labels array)."""
    labels = np.atleast_1d(np.asarray(label, dtype=int))
    return batch_backward(trace, labels)


def batch_nll(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean −ln p[label] over the batch (no clamping; for the FD oracle)."""
    B = probs.shape[0]
    return float(-np.log(probs[np.arange(B), labels]).mean())


# --------------------------------------------------------------------------
# finite-difference oracle


def finite_difference_check(
    config: NetworkConfig,
    seed: int,
    epsilon: float = 1e-4,
    activation: str = "relu",
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Builds a random-but-seeded single-graph problem (grid features,
    mixing matrix of a random graph, random label), runs the hand-coded
    backward pass, then perturbs every parameter entry by ±ε and
    compares.  Dropout is off (the loss must be a deterministic function
    of the parameters).  Relative error for one entry is
    |a − n| / max(|a| + |n|, 1e−6); the max over all entries is
    returned.
    """
    rng = np.random.default_rng(seed)
    params = init_params(config, rng)

    M = config.grid_size
    upper = rng.random((M, M)) < 0.4
    A = np.triu(upper, k=1).astype(float)
    A = A + A.T
    Q = average_mixing_matrix(A)
    Z0 = rng.normal(size=(M, config.input_channels))
    label = int(rng.integers(config.n_classes))

    eval_config = NetworkConfig(
        input_channels=config.input_channels,
        n_classes=config.n_classes,
        grid_size=config.grid_size,
        conv_layers=config.conv_layers,
        conv_channels=config.conv_channels,
        head_conv_channels=config.head_conv_channels,
        head_pool_after=config.head_pool_after,
        head_dense_units=config.head_dense_units,
        dropout_rate=0.0,
    )

    trace = batch_forward(
        Q[None], Z0[None], params, eval_config, train_mode=False, activation=activation
    )
    analytic = batch_backward(trace, np.array([label]))

    def loss_at() -> float:
        t = batch_forward(
            Q[None], Z0[None], params, eval_config, train_mode=False, activation=activation
        )
        return batch_nll(t.probs, np.array([label]))

    worst = 0.0
    for p_arr, g_arr in zip(param_arrays(params), param_arrays(analytic)):
        flat_p = p_arr.reshape(-1)
        flat_g = g_arr.reshape(-1)
        for i in range(flat_p.size):
            original = flat_p[i]
            flat_p[i] = original + epsilon
            plus = loss_at()
            flat_p[i] = original - epsilon
            minus = loss_at()
            flat_p[i] = original
            numeric = (plus - minus) / (2.0 * epsilon)
            a = flat_g[i]
            rel = abs(a - numeric) / max(abs(a) + abs(numeric), 1e-6)
            if rel > worst:
                worst = rel
    return worst
