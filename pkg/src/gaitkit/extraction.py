"""Walking-data extraction with an encoder-decoder network.

A 6 x 1024 recording window enters as a one-channel image (sensor rows
by time). Two pooled conv blocks encode it, two transposed convolutions
decode it back to full time resolution, and each decoder stage first
concatenates the feature map of the matching encoder depth. The sensor
axis survives until the penultimate convolution collapses it with a
full-height kernel; a 1x1 convolution and a sigmoid then yield one
walking probability per timestep.
"""

import time
import numpy as np

from .autodiff import (
    ConvSpec,
    GradTape,
    Tensor,
    as_tensor,
    backward,
    concat,
    conv2d,
    maxpool2d,
    relu,
    reshape,
    sigmoid,
    transposed_conv_time,
)
from .nn import Adam, binary_ce_per_step, clip_global_norm, glorot_uniform, zeros

# name, kind, in_channels, out_channels, kernel
EXTRACTOR_LAYERS = (
    ("conv1_1", "conv", 1, 64, (1, 16)),
    ("conv1_2", "conv", 64, 64, (1, 16)),
    ("conv2_1", "conv", 64, 128, (1, 16)),
    ("conv2_2", "conv", 128, 128, (1, 16)),
    ("conv3_1", "conv", 128, 256, (1, 16)),
    ("conv3_2", "conv", 256, 256, (1, 16)),
    ("conv3_3", "conv", 256, 256, (1, 16)),
    ("upconv1", "up", 256, 128, (1, 2)),
    ("conv4_1", "conv", 256, 128, (1, 16)),
    ("conv4_2", "conv", 128, 128, (1, 16)),
    ("upconv2", "up", 128, 64, (1, 2)),
    ("conv5_1", "conv", 128, 64, (1, 16)),
    ("conv5_2", "conv", 64, 64, (6, 16)),
    ("conv5_3", "conv", 64, 1, (1, 1)),
)

_SPECS = {
    name: ConvSpec(in_c, out_c, kernel)
    for name, kind, in_c, out_c, kernel in EXTRACTOR_LAYERS
    if kind == "conv"
}


def init_extractor(seed=0):
    """Glorot-uniform weights and zero biases for every layer."""
    rng = np.random.default_rng(seed)
    weights = {}
    for name, kind, in_c, out_c, kernel in EXTRACTOR_LAYERS:
        kh, kw = kernel
        if kind == "conv":
            w = glorot_uniform(
                rng, (out_c, in_c, kh, kw), in_c * kh * kw, out_c * kh * kw
            )
        else:
            # transposed conv scatters each input column over `kw` outputs
            w = glorot_uniform(rng, (in_c, out_c, kw), in_c, out_c * kw)
        weights[name] = (w, zeros((out_c,)))
    return weights


def extractor_params(weights):
    out = []
    for name, *_ in EXTRACTOR_LAYERS:
        out.extend(weights[name])
    return out


def extractor_forward(weights, x, trace=None):
    """Walking probability per timestep.

    x: [B, 6, W] (or [6, W]) with W divisible by 4. Returns [B, W]
    (or [W]) sigmoid outputs. When `trace` is a list, (name, shape)
    tuples for every stage are appended to it.
    """
    x = as_tensor(x)
    batched = x.ndim == 3
    if not batched:
        x = reshape(x, (1, *x.shape))
    b, h, w = x.shape
    net = reshape(x, (b, 1, h, w))

    def tap(name, t):
        if trace is not None:
            trace.append((name, t.shape))
        return t

    def block(name, t):
        return tap(name, relu(conv2d(t, _SPECS[name], *weights[name])))

    tap("input", net)
    c11 = block("conv1_1", net)
    c12 = block("conv1_2", c11)
    p1 = tap("pool1", maxpool2d(c12, (1, 2)))
    c21 = block("conv2_1", p1)
    c22 = block("conv2_2", c21)
    p2 = tap("pool2", maxpool2d(c22, (1, 2)))
    net = block("conv3_1", p2)
    net = block("conv3_2", net)
    net = block("conv3_3", net)
    net = tap("upconv1", relu(transposed_conv_time(net, *weights["upconv1"], stride=2)))
    net = tap("concat1", concat([net, c22], axis=1))
    net = block("conv4_1", net)
    net = block("conv4_2", net)
    net = tap("upconv2", relu(transposed_conv_time(net, *weights["upconv2"], stride=2)))
    net = tap("concat2", concat([net, c12], axis=1))
    net = block("conv5_1", net)
    net = block("conv5_2", net)
    net = tap("conv5_3", sigmoid(conv2d(net, _SPECS["conv5_3"], *weights["conv5_3"])))
    probs = reshape(net, (b, w))
    if not batched:
        probs = reshape(probs, (w,))
    return tap("output", probs)


def train_extractor(weights, windows, masks, epochs=150, lr=1e-4, batch=4,
                    seed=0, clip=5.0, time_budget_s=None, log=None):
    """Adam on per-timestep binary cross-entropy.

    windows: [N, 6, W]; masks: [N, W] of 0/1. Stops early when the
    optional wall-clock budget runs out. Returns per-epoch mean losses.
    """
    windows = np.asarray(windows, dtype=np.float64)
    masks = np.asarray(masks, dtype=np.float64)
    params = extractor_params(weights)
    opt = Adam(lr=lr)
    rng = np.random.default_rng(seed)
    t_start = time.monotonic()
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(windows))
        losses = []
        for lo in range(0, len(order), batch):
            sel = order[lo : lo + batch]
            with GradTape() as tape:
                probs = extractor_forward(weights, Tensor(windows[sel]))
                loss = binary_ce_per_step(probs, masks[sel])
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


def predict_walking_mask(weights, series, window=1024, batch=4):
    """Per-sample walking probability over a whole recording.

    The series is tiled into consecutive `window`-wide pieces. The last
    piece is taken flush against the end (overlapping its predecessor);
    a recording shorter than one window is zero-padded instead and the
    padding discarded.
    """
    n = len(series)
    starts = list(range(0, max(n - window, 0) + 1, window))
    if not starts or starts[-1] + window < n:
        starts.append(max(n - window, 0) if n >= window else 0)
    pieces = []
    for s in starts:
        chunk = series.values[:, s : s + window]
        if chunk.shape[1] < window:
            chunk = np.pad(chunk, ((0, 0), (0, window - chunk.shape[1])))
        pieces.append(chunk)
    probs = np.empty(len(starts) * window)
    for lo in range(0, len(pieces), batch):
        block = np.stack(pieces[lo : lo + batch])
        out = extractor_forward(weights, Tensor(block))
        probs[lo * window : lo * window + out.shape[0] * window] = out.data.ravel()
    full = np.zeros(n)
    for k, s in enumerate(starts):
        take = min(window, n - s)
        full[s : s + take] = probs[k * window : k * window + take]
    return full


def mask_to_bouts(mask, rate, min_run_s=2.0):
    """(start, stop) index pairs of mask runs at least min_run_s long."""
    mask = np.asarray(mask).astype(bool)
    if not mask.any():
        return []
    edges = np.flatnonzero(np.diff(mask.astype(np.int8)))
    starts = ([0] if mask[0] else []) + (edges[mask[edges] == 0] + 1).tolist()
    stops = (edges[mask[edges] == 1] + 1).tolist() + ([len(mask)] if mask[-1] else [])
    min_len = int(round(min_run_s * rate))
    return [(a, b) for a, b in zip(starts, stops) if b - a >= min_len]


def extract_walking(weights, series, threshold=0.5, min_run_s=2.0, window=1024):
    """Walking bouts of a recording, as sub-series.

    Thresholds the per-timestep probability at `threshold` and keeps
    runs of at least `min_run_s`. Returns (bouts, mask) where bouts are
    InertialSeries slices and mask is the thresholded boolean vector.
    """
    probs = predict_walking_mask(weights, series, window)
    mask = probs > threshold
    bouts = [
        series.slice(a, b) for a, b in mask_to_bouts(mask, series.rate, min_run_s)
    ]
    return bouts, mask
