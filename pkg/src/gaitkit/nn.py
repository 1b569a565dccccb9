"""LSTM cell and training machinery shared by every network in the package.

The LSTM is the peephole variant: each of the input, forget and output
gates reads the previous cell state through a full N x N matrix (not the
conventional diagonal form). Gates i, f, o are

    sigma(W_x . x_t + W_h . h_{t-1} + W_c . c_{t-1} + b)

and the cell update is the standard

    c_t = f_t * c_{t-1} + i_t * tanh(W_xc . x_t + W_hc . h_{t-1} + b_c)
    h_t = o_t * tanh(c_t).

Stacked layers feed h_t of layer l-1 as the input x_t of layer l, which
realizes the depth term of the stacked-gate equations without a separate
matrix.
"""

import numpy as np
from dataclasses import dataclass, fields

from .autodiff import (
    Tensor,
    as_tensor,
    _make,
    _sigmoid,
    clamp,
    concat,
    log,
    mul,
    reshape,
    slice_axis,
    sub,
    tmean,
    tsum,
)


# ---------------------------------------------------------------------------
# initialization


def glorot_uniform(rng, shape, fan_in, fan_out):
    """Uniform init on +-sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-limit, limit, size=shape))


def zeros(shape):
    return Tensor(np.zeros(shape))


# ---------------------------------------------------------------------------
# LSTM weights and state


@dataclass
class LstmLayerWeights:
    """One layer's parameters; w_x* map the input, w_h* the previous
    hidden state, w_c* the previous cell state (peephole), b* the biases."""

    w_xi: Tensor
    w_xf: Tensor
    w_xc: Tensor
    w_xo: Tensor
    w_hi: Tensor
    w_hf: Tensor
    w_hc: Tensor
    w_ho: Tensor
    w_ci: Tensor
    w_cf: Tensor
    w_co: Tensor
    b_i: Tensor
    b_f: Tensor
    b_c: Tensor
    b_o: Tensor

    def params(self):
        return [getattr(self, f.name) for f in fields(self)]

    @property
    def hidden(self):
        return self.w_hi.shape[0]

    @property
    def in_dim(self):
        return self.w_xi.shape[0]


def init_lstm_layer(rng, in_dim, hidden):
    def mat(rows, cols):
        return glorot_uniform(rng, (rows, cols), rows, cols)

    return LstmLayerWeights(
        w_xi=mat(in_dim, hidden),
        w_xf=mat(in_dim, hidden),
        w_xc=mat(in_dim, hidden),
        w_xo=mat(in_dim, hidden),
        w_hi=mat(hidden, hidden),
        w_hf=mat(hidden, hidden),
        w_hc=mat(hidden, hidden),
        w_ho=mat(hidden, hidden),
        w_ci=mat(hidden, hidden),
        w_cf=mat(hidden, hidden),
        w_co=mat(hidden, hidden),
        b_i=zeros(hidden),
        b_f=zeros(hidden),
        b_c=zeros(hidden),
        b_o=zeros(hidden),
    )


@dataclass
class LstmState:
    h: Tensor
    c: Tensor


def zero_state(hidden, batch=None):
    shape = (hidden,) if batch is None else (batch, hidden)
    return LstmState(h=zeros(shape), c=zeros(shape))


# ---------------------------------------------------------------------------
# fused cell
#
# One tape node per step instead of ~15 keeps both the Python overhead and
# the saved-activation footprint manageable at hidden width 1024. The node
# outputs [h | c] stacked on the last axis; callers slice it apart.


def _stack_gate_weights(w):
    """Concatenated views of the per-gate matrices: wx/wh order [i|f|c|o],
    peephole order [i|f|o]."""
    wx = concat([w.w_xi, w.w_xf, w.w_xc, w.w_xo], axis=1)
    wh = concat([w.w_hi, w.w_hf, w.w_hc, w.w_ho], axis=1)
    wc = concat([w.w_ci, w.w_cf, w.w_co], axis=1)
    b = concat([w.b_i, w.b_f, w.b_c, w.b_o], axis=0)
    return wx, wh, wc, b


def _peephole_cell(x, h_prev, c_prev, wx, wh, wc, b):
    """Fused LSTM step on stacked weights; returns [h | c] of width 2N."""
    n = wh.shape[0]
    xd, hd, cd = x.data, h_prev.data, c_prev.data
    single = xd.ndim == 1
    if single:
        xd, hd, cd = xd[None], hd[None], cd[None]
    pre = xd @ wx.data + hd @ wh.data + b.data
    peep = cd @ wc.data
    gi = _sigmoid(pre[:, :n] + peep[:, :n])
    gf = _sigmoid(pre[:, n : 2 * n] + peep[:, n : 2 * n])
    gg = np.tanh(pre[:, 2 * n : 3 * n])
    go = _sigmoid(pre[:, 3 * n :] + peep[:, 2 * n :])
    c = gf * cd + gi * gg
    tc = np.tanh(c)
    h = go * tc
    out = np.concatenate([h, c], axis=1)

    def pull(grad):
        if single:
            grad = grad[None]
        gh_out, gc_out = grad[:, :n], grad[:, n:]
        d_o = gh_out * tc
        gc = gc_out + gh_out * go * (1.0 - tc * tc)
        d_f = gc * cd
        d_i = gc * gg
        d_g = gc * gi
        dz = np.concatenate(
            [
                d_i * gi * (1.0 - gi),
                d_f * gf * (1.0 - gf),
                d_g * (1.0 - gg * gg),
                d_o * go * (1.0 - go),
            ],
            axis=1,
        )
        dpeep = np.concatenate(
            [dz[:, :n], dz[:, n : 2 * n], dz[:, 3 * n :]], axis=1
        )
        gx = dz @ wx.data.T
        ghp = dz @ wh.data.T
        gcp = gc * gf + dpeep @ wc.data.T
        gwx = xd.T @ dz
        gwh = hd.T @ dz
        gwc = cd.T @ dpeep
        gb = dz.sum(axis=0)
        if single:
            gx, ghp, gcp = gx[0], ghp[0], gcp[0]
        return (gx, ghp, gcp, gwx, gwh, gwc, gb)

    return _make(out[0] if single else out, (x, h_prev, c_prev, wx, wh, wc, b), pull)


def _split_hc(hc, n):
    axis = hc.ndim - 1
    return LstmState(
        h=slice_axis(hc, axis, 0, n), c=slice_axis(hc, axis, n, 2 * n)
    )


def lstm_step(x_t, state, w):
    """Advance one layer by one timestep; returns the new LstmState."""
    stacked = _stack_gate_weights(w)
    hc = _peephole_cell(x_t, state.h, state.c, *stacked)
    return _split_hc(hc, w.hidden)


def _run_layer(steps, w, stacked):
    """Run one layer over a list of per-step inputs; returns h_t list."""
    batch = None if steps[0].ndim == 1 else steps[0].shape[0]
    state = zero_state(w.hidden, batch)
    hs = []
    for x_t in steps:
        hc = _peephole_cell(x_t, state.h, state.c, *stacked)
        state = _split_hc(hc, w.hidden)
        hs.append(state.h)
    return hs


def _unstack_time(seq):
    # seq: [T, D] or [B, T, D] -> list of T tensors [D] or [B, D]
    t_axis = seq.ndim - 2
    T = seq.shape[t_axis]
    steps = []
    for t in range(T):
        s = slice_axis(seq, t_axis, t, t + 1)
        shape = s.shape[:t_axis] + s.shape[t_axis + 1 :]
        steps.append(reshape(s, shape))
    return steps


def lstm_forward(seq, layers, bidirectional=False):
    """Feature vector of a stacked (or single bidirectional) LSTM.

    seq: Tensor [T, D] or [B, T, D]. Unidirectional: layers run stacked,
    the feature is the top layer's final hidden state h_T. Bidirectional:
    layers must be exactly [forward, backward]; the feature concatenates
    the forward pass's h_T with the backward pass's state after it has
    consumed the sequence down to t=1, giving 2N values.
    """
    seq = as_tensor(seq)
    steps = _unstack_time(seq)
    if bidirectional:
        if len(layers) != 2:
            raise ValueError("bidirectional runs want [forward, backward] layers")
        fw, bw = layers
        h_f = _run_layer(steps, fw, _stack_gate_weights(fw))[-1]
        h_b = _run_layer(steps[::-1], bw, _stack_gate_weights(bw))[-1]
        return concat([h_f, h_b], axis=h_f.ndim - 1)
    hs = steps
    for w in layers:
        hs = _run_layer(hs, w, _stack_gate_weights(w))
    return hs[-1]


# ---------------------------------------------------------------------------
# losses


_P_FLOOR = 1e-12


def cross_entropy(o, o_prime):
    """Sum over classes of -(y ln p + (1-y) ln(1-p)).

    o: probabilities [K] or [B, K]; o_prime: matching 0/1 targets. The
    batched form returns the mean of the per-sample losses. Probabilities
    are clamped to [1e-12, 1 - 1e-12] before the logs.
    """
    o, o_prime = as_tensor(o), as_tensor(o_prime)
    p = clamp(o, _P_FLOOR, 1.0 - _P_FLOOR)
    per_class = sub(
        0.0,
        mul(o_prime, log(p)) + mul(sub(1.0, o_prime), log(sub(1.0, p))),
    )
    per_sample = tsum(per_class, axis=per_class.ndim - 1)
    if per_sample.ndim == 0:
        return per_sample
    return tmean(per_sample)


def binary_ce_per_step(probs, mask):
    """Mean over timesteps of the binary cross-entropy against mask.

    probs: [T] or [B, T] sigmoid outputs; mask: matching 0/1 targets.
    """
    probs, mask = as_tensor(probs), as_tensor(mask)
    p = clamp(probs, _P_FLOOR, 1.0 - _P_FLOOR)
    term = sub(
        0.0,
        mul(mask, log(p)) + mul(sub(1.0, mask), log(sub(1.0, p))),
    )
    return tmean(term)


# ---------------------------------------------------------------------------
# optimization


class Adam:
    """Adam with bias correction; moments keyed per parameter tensor."""

    def __init__(self, lr=0.0025, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = {}
        self._v = {}

    def step(self, params, grads):
        """Update each parameter in place from the gradient map."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p in params:
            g = grads[p]
            key = id(p)
            m = self._m.get(key)
            if m is None:
                m = np.zeros_like(p.data)
                v = np.zeros_like(p.data)
            else:
                v = self._v[key]
            m = b1 * m + (1.0 - b1) * g
            v = b2 * v + (1.0 - b2) * (g * g)
            self._m[key], self._v[key] = m, v
            m_hat = m / (1.0 - b1**self.t)
            v_hat = v / (1.0 - b2**self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(state, params, grads):
    """Functional alias: one Adam update through a held state object."""
    state.step(params, grads)
    return state


def clip_global_norm(params, grads, max_norm=5.0):
    """Scale the whole gradient set so its global L2 norm is <= max_norm.

    Mutates the arrays inside the gradient map; returns the pre-clip norm.
    """
    total = 0.0
    for p in params:
        g = grads[p]
        total += float((g * g).sum())
    norm = np.sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for p in params:
            g = grads[p]
            g *= scale
    return norm
