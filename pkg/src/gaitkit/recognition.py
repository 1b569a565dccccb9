"""Identification and authentication networks over gait samples.

Identification scores a 6 x 128 sample against the enrolled subjects.
The convolutional branch condenses the sample to 128 features over 16
time columns; recurrent variants run peephole LSTM stacks over the raw
channels; the hybrid concatenates both feature vectors before the
softmax. Two transfer variants reuse a pretrained branch and keep it
frozen while the other branch trains.

Authentication decides whether the two halves of an aligned sample pair
come from the same person. The convolutional branch is a frozen copy of
an identification model's; its feature columns are regrouped into 16
blocks of 256 and scored by a two-layer LSTM with a binary softmax.
The regrouping depends on the pair alignment: horizontally aligned
pairs run through the convolution as one matrix and adjacent feature
columns form a block, vertically aligned pairs run per constituent and
the columns of equal phase are joined.
"""

import time
import numpy as np

from .autodiff import (
    ConvSpec,
    GradTape,
    Tensor,
    affine,
    backward,
    concat,
    conv2d,
    maxpool2d,
    relu,
    reshape,
    softmax,
)
from .nn import (
    Adam,
    clip_global_norm,
    cross_entropy,
    glorot_uniform,
    init_lstm_layer,
    lstm_forward,
    zeros,
)

CNN_SPECS = {
    "conv1_1": ConvSpec(1, 32, (1, 9), (1, 2)),
    "conv2_1": ConvSpec(32, 64, (1, 3)),
    "conv2_2": ConvSpec(64, 128, (1, 3)),
    "conv3_1": ConvSpec(128, 128, (6, 1)),
}

IDENT_VARIANTS = (
    "cnn",
    "lstm_sl",
    "lstm_bi",
    "lstm_dl",
    "hybrid",
    "cnn_fix_lstm",
    "cnn_lstm_fix",
)

_HYBRID_HIDDEN = 1024
_SMALL_HIDDEN = 64


def init_cnn(seed=0):
    rng = np.random.default_rng(seed)
    weights = {}
    for name, spec in CNN_SPECS.items():
        kh, kw = spec.kernel
        w = glorot_uniform(
            rng,
            (spec.out_channels, spec.in_channels, kh, kw),
            spec.in_channels * kh * kw,
            spec.out_channels * kh * kw,
        )
        weights[name] = (w, zeros((spec.out_channels,)))
    return weights


def cnn_forward(weights, x, trace=None):
    """Convolutional feature map [B, 128, 1, W/8] of samples [B, 6, W].

    The final convolution spans the full sensor axis and has no
    activation; everything before it is ReLU. When `trace` is a list,
    (name, shape) tuples are appended per stage.
    """
    b, h, w = x.shape
    net = reshape(x, (b, 1, h, w))

    def tap(name, t):
        if trace is not None:
            trace.append((name, t.shape))
        return t

    tap("input", net)
    net = tap("conv1_1", relu(conv2d(net, CNN_SPECS["conv1_1"], *weights["conv1_1"])))
    net = tap("pool1", maxpool2d(net, (1, 2)))
    net = tap("conv2_1", relu(conv2d(net, CNN_SPECS["conv2_1"], *weights["conv2_1"])))
    net = tap("conv2_2", relu(conv2d(net, CNN_SPECS["conv2_2"], *weights["conv2_2"])))
    net = tap("pool2", maxpool2d(net, (1, 2)))
    return tap("conv3_1", conv2d(net, CNN_SPECS["conv3_1"], *weights["conv3_1"]))


def cnn_flat(weights, x):
    """[B, 128 * W/8] flattened convolutional features."""
    fmap = cnn_forward(weights, x)
    b, c, _, t = fmap.shape
    return reshape(fmap, (b, c * t))


def _cnn_params(weights):
    out = []
    for name in CNN_SPECS:
        out.extend(weights[name])
    return out


def _copy_cnn(weights):
    return {k: (Tensor(w.data.copy()), Tensor(b.data.copy())) for k, (w, b) in weights.items()}


def _copy_lstm(layers):
    out = []
    for layer in layers:
        fields = {
            name: Tensor(getattr(layer, name).data.copy())
            for name in layer.__dataclass_fields__
        }
        out.append(type(layer)(**fields))
    return out


class IdentModel:
    """One identification network; `variant` picks the branches.

    frozen branches contribute features but no trainable parameters.
    """

    def __init__(self, variant, n_classes, cnn=None, lstm=None,
                 bidirectional=False, head_w=None, head_b=None, frozen=()):
        if variant not in IDENT_VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        self.n_classes = n_classes
        self.cnn = cnn
        self.lstm = lstm
        self.bidirectional = bidirectional
        self.head_w = head_w
        self.head_b = head_b
        self.frozen = tuple(frozen)

    def params(self, trainable_only=True):
        out = []
        if self.cnn is not None and not (trainable_only and "cnn" in self.frozen):
            out.extend(_cnn_params(self.cnn))
        if self.lstm is not None and not (trainable_only and "lstm" in self.frozen):
            for layer in self.lstm:
                out.extend(layer.params())
        out.extend([self.head_w, self.head_b])
        return out


def _head(rng, in_dim, n_classes):
    w = glorot_uniform(rng, (in_dim, n_classes), in_dim, n_classes)
    return w, zeros((n_classes,))


def init_ident_model(variant, n_classes, seed=0, lstm_hidden=None):
    """Fresh weights for one identification variant.

    lstm_hidden overrides the recurrent width (64 for the plain LSTM
    variants, 1024 for the hybrid's branch).
    """
    rng = np.random.default_rng(seed)
    cnn = None
    lstm = None
    bidirectional = False
    if variant == "cnn":
        cnn = init_cnn(seed)
        feat = 2048
    elif variant in ("lstm_sl", "lstm_bi", "lstm_dl"):
        n = lstm_hidden or _SMALL_HIDDEN
        if variant == "lstm_sl":
            lstm = [init_lstm_layer(rng, 6, n)]
            feat = n
        elif variant == "lstm_bi":
            lstm = [init_lstm_layer(rng, 6, n), init_lstm_layer(rng, 6, n)]
            bidirectional = True
            feat = 2 * n
        else:
            lstm = [init_lstm_layer(rng, 6, n), init_lstm_layer(rng, n, n)]
            feat = n
    elif variant == "hybrid":
        n = lstm_hidden or _HYBRID_HIDDEN
        cnn = init_cnn(seed)
        lstm = [init_lstm_layer(rng, 6, n), init_lstm_layer(rng, n, n)]
        feat = n + 2048
    else:
        raise ValueError(
            f"{variant} needs pretrained branches; use make_transfer_model"
        )
    head_w, head_b = _head(rng, feat, n_classes)
    return IdentModel(variant, n_classes, cnn, lstm, bidirectional, head_w, head_b)


def make_transfer_model(variant, n_classes, seed=0, cnn_source=None,
                        lstm_source=None, lstm_hidden=None):
    """Hybrid with one branch copied from a pretrained model and frozen.

    cnn_fix_lstm: copies cnn_source's convolutional weights, trains a
    fresh recurrent branch. cnn_lstm_fix: copies lstm_source's stack,
    trains fresh convolutions. The softmax head is always fresh.
    """
    rng = np.random.default_rng(seed)
    n = lstm_hidden or _HYBRID_HIDDEN
    if variant == "cnn_fix_lstm":
        if cnn_source is None or cnn_source.cnn is None:
            raise ValueError("cnn_fix_lstm wants a cnn_source with conv weights")
        cnn = _copy_cnn(cnn_source.cnn)
        lstm = [init_lstm_layer(rng, 6, n), init_lstm_layer(rng, n, n)]
        frozen = ("cnn",)
    elif variant == "cnn_lstm_fix":
        if lstm_source is None or lstm_source.lstm is None:
            raise ValueError("cnn_lstm_fix wants an lstm_source with a stack")
        lstm = _copy_lstm(lstm_source.lstm)
        n = lstm[-1].hidden
        cnn = init_cnn(seed)
        frozen = ("lstm",)
    else:
        raise ValueError(f"not a transfer variant: {variant!r}")
    head_w, head_b = _head(rng, n + 2048, n_classes)
    return IdentModel(variant, n_classes, cnn, lstm, False, head_w, head_b, frozen)


def _lstm_input(values):
    """[B, 6, T] channel rows -> standardized [B, T, 6] timestep vectors.

    Gate pre-activations sit in the sigmoid/tanh linear range only for
    inputs of order one; the raw accelerometer rows carry the gravity
    offset, so each channel is centered and scaled per sample before it
    reaches the recurrence.
    """
    v = np.transpose(values, (0, 2, 1))
    mu = v.mean(axis=1, keepdims=True)
    sd = np.maximum(v.std(axis=1, keepdims=True), 1e-6)
    return np.ascontiguousarray((v - mu) / sd)


def ident_features(model, values, frozen_feats=None):
    """Feature tensor for a batch of raw samples [B, 6, 128].

    frozen_feats substitutes a precomputed array for the frozen branch
    (training-time shortcut); layout is [lstm features, cnn features]
    when both branches exist.
    """
    parts = []
    if model.lstm is not None:
        if frozen_feats is not None and "lstm" in model.frozen:
            parts.append(Tensor(frozen_feats))
        else:
            parts.append(
                lstm_forward(Tensor(_lstm_input(values)), model.lstm,
                             model.bidirectional)
            )
    if model.cnn is not None:
        if frozen_feats is not None and "cnn" in model.frozen:
            parts.append(Tensor(frozen_feats))
        else:
            parts.append(cnn_flat(model.cnn, Tensor(values)))
    if len(parts) == 1:
        return parts[0]
    return concat(parts, axis=1)


def ident_forward(model, values, frozen_feats=None):
    """Class probabilities [B, n_classes]."""
    feats = ident_features(model, values, frozen_feats)
    return softmax(affine(feats, model.head_w, model.head_b))


def _frozen_branch_features(model, values, batch=256):
    """Tape-free features of the frozen branch over a whole dataset."""
    chunks = []
    for lo in range(0, len(values), batch):
        sel = values[lo : lo + batch]
        if "cnn" in model.frozen:
            chunks.append(cnn_flat(model.cnn, Tensor(sel)).data)
        else:
            chunks.append(
                lstm_forward(Tensor(_lstm_input(sel)), model.lstm,
                             model.bidirectional).data
            )
    return np.concatenate(chunks, axis=0)


def _one_hot(labels, n_classes):
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def train_ident(model, values, labels, epochs=200, lr=0.0025, batch=128,
                seed=0, clip=5.0, time_budget_s=None, log=None):
    """Adam on softmax cross-entropy; returns per-epoch mean losses.

    A frozen branch is evaluated once up front and its features fed to
    the live graph as constants, so a transfer model pays only for the
    branch that actually trains.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    targets = _one_hot(labels, model.n_classes)
    frozen_all = _frozen_branch_features(model, values) if model.frozen else None
    params = model.params(trainable_only=True)
    opt = Adam(lr=lr)
    rng = np.random.default_rng(seed)
    t_start = time.monotonic()
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(values))
        losses = []
        for lo in range(0, len(order), batch):
            sel = order[lo : lo + batch]
            ff = frozen_all[sel] if frozen_all is not None else None
            with GradTape() as tape:
                probs = ident_forward(model, values[sel], frozen_feats=ff)
                loss = cross_entropy(probs, targets[sel])
            grads = backward(loss, tape)
            clip_global_norm(params, grads, clip)
            opt.step(params, grads)
            losses.append(float(loss.data))
            if time_budget_s is not None and time.monotonic() - t_start > time_budget_s:
                break
        history.append(float(np.mean(losses)))
        if log is not None:
            log(epoch, history[-1])
        if time_budget_s is not None and time.monotonic() - t_start > time_budget_s:
            break
    return history


def predict_identity(model, values, batch=256):
    """Most probable class per sample; ties resolve to the lowest index."""
    out = []
    for lo in range(0, len(values), batch):
        probs = ident_forward(model, np.asarray(values[lo : lo + batch]))
        out.append(np.argmax(probs.data, axis=1))
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# authentication


class AuthModel:
    """Pair verdict network: frozen convolutions, trainable LSTM head.

    The softmax orders its classes (different, same).
    """

    def __init__(self, alignment, cnn, lstm, head_w, head_b):
        if alignment not in ("horizontal", "vertical"):
            raise ValueError(f"unknown alignment {alignment!r}")
        self.alignment = alignment
        self.cnn = cnn
        self.lstm = lstm
        self.head_w = head_w
        self.head_b = head_b

    def params(self, trainable_only=True):
        out = []
        for layer in self.lstm:
            out.extend(layer.params())
        out.extend([self.head_w, self.head_b])
        if not trainable_only:
            out.extend(_cnn_params(self.cnn))
        return out


def init_auth_model(alignment, cnn_source, seed=0, hidden=64):
    """Binary pair scorer on top of a pretrained conv branch."""
    if cnn_source.cnn is None:
        raise ValueError("authentication wants a source with conv weights")
    rng = np.random.default_rng(seed)
    lstm = [init_lstm_layer(rng, 256, hidden), init_lstm_layer(rng, hidden, hidden)]
    head_w, head_b = _head(rng, hidden, 2)
    return AuthModel(alignment, _copy_cnn(cnn_source.cnn), lstm, head_w, head_b)


def auth_sequences(model, pair_values, batch=256):
    """Frozen-branch feature blocks [B, 16, 256] for aligned pairs.

    horizontal [B, 6, 256]: one conv pass, blocks join adjacent feature
    columns (2t, 2t+1). vertical [B, 12, 128]: a conv pass per 6-row
    constituent, blocks join the columns of equal phase.
    """
    pair_values = np.asarray(pair_values, dtype=np.float64)
    out = []
    for lo in range(0, len(pair_values), batch):
        sel = pair_values[lo : lo + batch]
        b = len(sel)
        if model.alignment == "horizontal":
            fmap = cnn_forward(model.cnn, Tensor(sel)).data.reshape(b, 128, -1)
            t = fmap.shape[2] // 2
            seq = fmap.reshape(b, 128, t, 2).transpose(0, 2, 3, 1).reshape(b, t, 256)
        else:
            fa = cnn_forward(model.cnn, Tensor(sel[:, :6])).data.reshape(b, 128, -1)
            fb = cnn_forward(model.cnn, Tensor(sel[:, 6:])).data.reshape(b, 128, -1)
            seq = np.concatenate([fa, fb], axis=1).transpose(0, 2, 1)
        out.append(np.ascontiguousarray(seq))
    return np.concatenate(out, axis=0)


def auth_forward(model, pair_values=None, sequences=None):
    """Same-person probabilities [B, 2] for aligned pairs.

    Accepts either raw pair matrices or sequences precomputed by
    auth_sequences (the training loop path).
    """
    if sequences is None:
        sequences = auth_sequences(model, pair_values)
    h = lstm_forward(Tensor(sequences), model.lstm)
    return softmax(affine(h, model.head_w, model.head_b))


def train_auth(model, pair_values, labels, epochs=300, lr=0.0025, batch=1500,
               seed=0, clip=5.0, time_budget_s=None, log=None):
    """Adam on the binary softmax; labels are 1 for same, 0 for different.

    The conv features never change, so they are computed once for the
    whole dataset and only the recurrent scorer trains.
    """
    labels = np.asarray(labels).astype(int)
    targets = _one_hot(labels, 2)
    seqs = auth_sequences(model, pair_values)
    params = model.params(trainable_only=True)
    opt = Adam(lr=lr)
    rng = np.random.default_rng(seed)
    t_start = time.monotonic()
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(seqs))
        losses = []
        for lo in range(0, len(order), batch):
            sel = order[lo : lo + batch]
            with GradTape() as tape:
                probs = auth_forward(model, sequences=seqs[sel])
                loss = cross_entropy(probs, targets[sel])
            grads = backward(loss, tape)
            clip_global_norm(params, grads, clip)
            opt.step(params, grads)
            losses.append(float(loss.data))
            if time_budget_s is not None and time.monotonic() - t_start > time_budget_s:
                break
        history.append(float(np.mean(losses)))
        if log is not None:
            log(epoch, history[-1])
        if time_budget_s is not None and time.monotonic() - t_start > time_budget_s:
            break
    return history


def predict_same_prob(model, pair_values, batch=512):
    """Probability the two halves share a subject, per pair."""
    out = []
    for lo in range(0, len(pair_values), batch):
        seqs = auth_sequences(model, pair_values[lo : lo + batch])
        probs = auth_forward(model, sequences=seqs)
        out.append(probs.data[:, 1])
    return np.concatenate(out)
