"""Reverse-mode automatic differentiation over numpy arrays.

Everything downstream (the extraction network, the identification and
authentication networks) trains through this module. A Tensor wraps a
float64 ndarray; while a GradTape is active, every primitive appends one
node to the tape. backward() replays the tape once in reverse insertion
order and accumulates gradients.

Inputs may carry a leading batch axis; the unbatched shapes documented on
each primitive are what the single-sample API contracts promise.
"""

import numpy as np
from dataclasses import dataclass
from numpy.lib.stride_tricks import sliding_window_view


class NumericFault(ArithmeticError):
    """A primitive produced NaN or Inf. Training state is unusable."""


class ShapeFault(ValueError):
    """Operand shapes cannot be reconciled (for example kernel wider than input)."""


_ACTIVE_TAPE = None


class Tensor:
    """A float64 array plus the tape bookkeeping needed for backward().

    grad is populated by backward() for tensors that influenced the loss;
    it is a plain cache of the returned gradient map, not extra state.
    """

    __slots__ = ("data", "grad", "node")

    def __init__(self, data):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.node = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"

    # Convenience arithmetic; all routing goes through the primitives so
    # that taping stays in one place.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


class GradTape:
    """Ordered record of executed primitives.

    Insertion order is the topological order: a node's parents were
    recorded (or are leaves) before the node itself, so one reverse sweep
    visits every node exactly once.
    """

    def __init__(self):
        self.nodes = []

    def __enter__(self):
        global _ACTIVE_TAPE
        if _ACTIVE_TAPE is not None:
            raise RuntimeError("a GradTape is already active; tapes do not nest")
        _ACTIVE_TAPE = self
        return self

    def __exit__(self, exc_type, exc, tb):
        global _ACTIVE_TAPE
        _ACTIVE_TAPE = None
        return False


class Gradients:
    """Gradient map returned by backward(). Missing entries read as zeros."""

    def __init__(self):
        self._by_id = {}

    def _accumulate(self, tensor, grad):
        key = id(tensor)
        slot = self._by_id.get(key)
        if slot is None:
            self._by_id[key] = [tensor, np.array(grad, dtype=np.float64)]
        else:
            slot[1] += grad

    def __contains__(self, tensor):
        return id(tensor) in self._by_id

    def __getitem__(self, tensor):
        slot = self._by_id.get(id(tensor))
        if slot is None:
            return np.zeros_like(tensor.data)
        return slot[1]

    def tensors(self):
        return [slot[0] for slot in self._by_id.values()]


def _check_finite(arr):
    if not np.all(np.isfinite(arr)):
        raise NumericFault("non-finite value produced; aborting")


def _make(out_data, parents, pull):
    """Wrap a primitive's result and register it on the active tape.

    pull(grad_out) must return one gradient array (or None) per parent.
    """
    _check_finite(out_data)
    out = Tensor(out_data)
    tape = _ACTIVE_TAPE
    if tape is not None:
        out.node = len(tape.nodes)
        tape.nodes.append((out, parents, pull))
    return out


def _unbroadcast(grad, shape):
    # Sum grad down to `shape` after numpy broadcasting in the forward pass.
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# elementwise and linear primitives


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def pull(g):
        return (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape))

    return _make(out, (a, b), pull)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def pull(g):
        return (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape))

    return _make(out, (a, b), pull)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def pull(g):
        return (
            _unbroadcast(g * b.data, a.shape),
            _unbroadcast(g * a.data, b.shape),
        )

    return _make(out, (a, b), pull)


def matmul(a, b):
    """a @ b for a of shape [N] or [B, N] and b of shape [N, M]."""
    a, b = as_tensor(a), as_tensor(b)
    out = a.data @ b.data

    def pull(g):
        if a.ndim == 1:
            return (g @ b.data.T, np.outer(a.data, g))
        return (g @ b.data.T, a.data.T @ g)

    return _make(out, (a, b), pull)


def affine(x, w, b):
    """x @ w + b. x: [N] or [B, N]; w: [N, M]; b: [M]."""
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    out = x.data @ w.data + b.data

    def pull(g):
        if x.ndim == 1:
            return (g @ w.data.T, np.outer(x.data, g), g)
        return (g @ w.data.T, x.data.T @ g, g.sum(axis=0))

    return _make(out, (x, w, b), pull)


def _sigmoid(x):
    # Evaluated on the half-line to avoid overflow in exp.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def activation(kind, x):
    """Elementwise nonlinearity: kind is 'relu', 'sigmoid' or 'tanh'."""
    x = as_tensor(x)
    if kind == "relu":
        out = np.maximum(x.data, 0.0)

        def pull(g):
            # subgradient 0 at exactly 0
            return (g * (x.data > 0),)

    elif kind == "sigmoid":
        out = _sigmoid(x.data)

        def pull(g):
            return (g * out * (1.0 - out),)

    elif kind == "tanh":
        out = np.tanh(x.data)

        def pull(g):
            return (g * (1.0 - out * out),)

    else:
        raise ValueError(f"unknown activation kind: {kind!r}")

    return _make(out, (x,), pull)


def relu(x):
    return activation("relu", x)


def sigmoid(x):
    return activation("sigmoid", x)


def tanh(x):
    return activation("tanh", x)


def log(x):
    x = as_tensor(x)
    out = np.log(x.data)

    def pull(g):
        return (g / x.data,)

    return _make(out, (x,), pull)


def clamp(x, lo, hi):
    x = as_tensor(x)
    out = np.clip(x.data, lo, hi)

    def pull(g):
        return (g * ((x.data >= lo) & (x.data <= hi)),)

    return _make(out, (x,), pull)


def tsum(x, axis=None):
    x = as_tensor(x)
    out = x.data.sum(axis=axis)

    def pull(g):
        if axis is None:
            return (np.broadcast_to(g, x.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return _make(out, (x,), pull)


def tmean(x, axis=None):
    x = as_tensor(x)
    n = x.data.size if axis is None else x.shape[axis]
    out = x.data.mean(axis=axis)

    def pull(g):
        if axis is None:
            return (np.broadcast_to(g / n, x.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis) / n, x.shape).copy(),)

    return _make(out, (x,), pull)


def reshape(x, shape):
    x = as_tensor(x)
    out = x.data.reshape(shape)

    def pull(g):
        return (g.reshape(x.shape),)

    return _make(out, (x,), pull)


def concat(parts, axis=0):
    """Concatenate tensors along axis; gradient splits at the seams."""
    parts = [as_tensor(p) for p in parts]
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def pull(g):
        sl = [slice(None)] * g.ndim
        grads = []
        for i in range(len(parts)):
            sl[axis] = slice(offsets[i], offsets[i + 1])
            grads.append(g[tuple(sl)])
        return tuple(grads)

    return _make(out, tuple(parts), pull)


def slice_axis(x, axis, start, stop):
    """x[..., start:stop, ...] along axis; gradient scatters back."""
    x = as_tensor(x)
    sl = [slice(None)] * x.ndim
    sl[axis] = slice(start, stop)
    sl = tuple(sl)
    out = x.data[sl]

    def pull(g):
        gx = np.zeros(x.shape)
        gx[sl] = g
        return (gx,)

    return _make(out, (x,), pull)


def softmax(x):
    """Stable softmax along the last axis; rows sum to one."""
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    out = ex / ex.sum(axis=-1, keepdims=True)

    def pull(g):
        dot = (g * out).sum(axis=-1, keepdims=True)
        return (out * (g - dot),)

    return _make(out, (x,), pull)


# ---------------------------------------------------------------------------
# convolution family


@dataclass(frozen=True)
class ConvSpec:
    """Geometry of one conv layer.

    kernel, stride are (sensor_axis, time_axis) pairs. padding 'same_time'
    pads only the time axis, floor((k-1)/2) left and ceil((k-1)/2) right,
    so the time extent maps to ceil(W / stride); the sensor axis always
    runs valid. padding 'valid' pads nothing.
    """

    in_channels: int
    out_channels: int
    kernel: tuple
    stride: tuple = (1, 1)
    padding: str = "same_time"

    def pad_w(self):
        if self.padding == "valid":
            return 0, 0
        k = self.kernel[1]
        return (k - 1) // 2, k - (k - 1) // 2 - 1

    def out_shape(self, h, w):
        kh, kw = self.kernel
        sh, sw = self.stride
        pl, pr = self.pad_w()
        wp = w + pl + pr
        if kh > h or kw > wp:
            raise ShapeFault(
                f"kernel {self.kernel} exceeds input extent ({h}, {w}) after padding"
            )
        return (h - kh) // sh + 1, (wp - kw) // sw + 1


_einsum_cache = {}


def _einsum(subscripts, *ops):
    # einsum path search is not free; memoize per (subscripts, shapes).
    key = (subscripts, tuple(op.shape for op in ops))
    path = _einsum_cache.get(key)
    if path is None:
        path = np.einsum_path(subscripts, *ops, optimize="optimal")[0]
        _einsum_cache[key] = path
    return np.einsum(subscripts, *ops, optimize=path)


def conv2d(x, spec, w, b):
    """Correlate x with w and add bias.

    x: [C_in, H, W] or [B, C_in, H, W]; w: [C_out, C_in, kh, kw]; b: [C_out].
    Returns [C_out, H', W'] (or batched) with H', W' from spec.out_shape.

    Internally the padded input is gathered into a (windows x taps)
    matrix and fed to one GEMM; the gather is redone in the backward
    pass instead of being kept alive, which bounds the tape's memory by
    the activations rather than by the much larger col matrices.
    """
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    batched = x.ndim == 4
    xd = x.data if batched else x.data[None]
    B, C, H, W = xd.shape
    if C != spec.in_channels or w.shape != (
        spec.out_channels,
        spec.in_channels,
        *spec.kernel,
    ):
        raise ShapeFault("conv operands disagree with the ConvSpec")
    kh, kw = spec.kernel
    sh, sw = spec.stride
    pl, pr = spec.pad_w()
    Ho, Wo = spec.out_shape(H, W)  # raises when the kernel does not fit
    O = spec.out_channels
    xp = np.pad(xd, ((0, 0), (0, 0), (0, 0), (pl, pr))) if (pl or pr) else xd

    def gather():
        win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
        # [B, C, Ho, Wo, kh, kw] -> [B*Ho*Wo, C*kh*kw], one big copy
        return np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(
            B * Ho * Wo, C * kh * kw
        )

    wm = w.data.reshape(O, C * kh * kw)
    out = (gather() @ wm.T).reshape(B, Ho, Wo, O).transpose(0, 3, 1, 2)
    out = out + b.data[:, None, None]

    def pull(g):
        if not batched:
            g = g[None]
        gb = g.sum(axis=(0, 2, 3))
        gm = np.ascontiguousarray(g.transpose(0, 2, 3, 1)).reshape(B * Ho * Wo, O)
        gw = (gm.T @ gather()).reshape(O, C, kh, kw)
        # dX: scatter-add each kernel tap of g @ w back onto the input
        gcol = (gm @ wm).reshape(B, Ho, Wo, C, kh, kw)
        gxp = np.zeros_like(xp)
        for p in range(kh):
            for q in range(kw):
                gxp[:, :, p : p + Ho * sh : sh, q : q + Wo * sw : sw] += gcol[
                    :, :, :, :, p, q
                ].transpose(0, 3, 1, 2)
        gx = gxp[:, :, :, pl : pl + W] if (pl or pr) else gxp
        if not batched:
            gx = gx[0]
        return (gx, gw, gb)

    return _make(out if batched else out[0], (x, w, b), pull)


def maxpool2d(x, pool=(1, 2)):
    """Non-overlapping max pool; stride equals the pool extent.

    Ties route the gradient to the first maximal element of the window.
    """
    x = as_tensor(x)
    batched = x.ndim == 4
    xd = x.data if batched else x.data[None]
    B, C, H, W = xd.shape
    ph, pw = pool
    if H % ph or W % pw:
        raise ShapeFault(f"pool {pool} does not tile input ({H}, {W})")
    win = xd.reshape(B, C, H // ph, ph, W // pw, pw)
    flat = win.transpose(0, 1, 2, 4, 3, 5).reshape(B, C, H // ph, W // pw, ph * pw)
    am = flat.argmax(axis=-1)  # first maximum on ties
    out = np.take_along_axis(flat, am[..., None], axis=-1)[..., 0]

    def pull(g):
        if not batched:
            g = g[None]
        gf = np.zeros_like(flat)
        np.put_along_axis(gf, am[..., None], g[..., None], axis=-1)
        gx = (
            gf.reshape(B, C, H // ph, W // pw, ph, pw)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(B, C, H, W)
        )
        return (gx if batched else gx[0],)

    return _make(out if batched else out[0], (x,), pull)


def transposed_conv_time(x, w, b, stride=2):
    """Adjoint of a stride-`stride` time conv; doubles the time extent.

    x: [C_in, H, W] or batched; w: [C_in, C_out, k] with k == stride, so
    output windows do not overlap and out width is exactly W * stride.
    """
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    if w.shape[2] != stride:
        raise ShapeFault("kernel width must equal the stride (no overlap-add)")
    batched = x.ndim == 4
    xd = x.data if batched else x.data[None]
    B, C, H, W = xd.shape
    prod = _einsum("bchw,coq->bohwq", xd, w.data)
    out = prod.reshape(B, w.shape[1], H, W * stride) + b.data[None, :, None, None]

    def pull(g):
        if not batched:
            g = g[None]
        gq = g.reshape(B, w.shape[1], H, W, stride)
        gx = _einsum("bohwq,coq->bchw", gq, w.data)
        gw = _einsum("bchw,bohwq->coq", xd, gq)
        gb = g.sum(axis=(0, 2, 3))
        return (gx if batched else gx[0], gw, gb)

    return _make(out if batched else out[0], (x, w, b), pull)


# ---------------------------------------------------------------------------
# backward


def backward(loss, tape):
    """Accumulate d(loss)/d(tensor) for every tensor on the tape.

    loss must be a scalar recorded on `tape`. Returns a Gradients map;
    tensors that did not influence the loss read as zeros. Each tape node
    is visited exactly once, in reverse insertion order.
    """
    if loss.node is None:
        raise ValueError("loss was not recorded on a tape")
    if loss.data.size != 1:
        raise ValueError("loss must be scalar")
    grads = Gradients()
    grads._accumulate(loss, np.ones_like(loss.data))
    for out, parents, pull in reversed(tape.nodes[: loss.node + 1]):
        if out not in grads:
            continue
        g = grads[out]
        for parent, pg in zip(parents, pull(g)):
            if pg is None:
                continue
            _check_finite(pg)
            grads._accumulate(parent, pg)
    for t in grads.tensors():
        t.grad = grads[t]
    return grads
