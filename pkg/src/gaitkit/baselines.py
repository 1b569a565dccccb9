"""Classical feature pipelines the networks are compared against.

Three feature families: autocorrelation spectra (a hand-rolled radix-2
FFT over the biased autocorrelation, magnitudes of the leading bins),
Mexican-hat wavelet energies per scale, and projections onto the
principal components of the flattened training samples. A one-vs-all
margin classifier with L2 regularization scores them.

fft has a deliberately naive quadratic companion, dft_oracle, used to
cross-check it; the two share no code.
"""

import numpy as np
from dataclasses import dataclass


def autocorrelation(x):
    """Biased autocorrelation of a 1-D signal, zero-mean, lags 0..L-1.

    r[k] = (1/L) * sum_t (x_t - mu)(x_{t+k} - mu)
    """
    x = np.asarray(x, dtype=np.float64)
    xc = x - x.mean()
    return np.correlate(xc, xc, mode="full")[len(x) - 1 :] / len(x)


def fft(x):
    """Radix-2 decimation-in-time transform; length must be 2**m."""
    x = np.asarray(x, dtype=np.complex128).copy()
    n = len(x)
    if n == 0 or n & (n - 1):
        raise ValueError("fft length must be a power of two")
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            x[i], x[j] = x[j], x[i]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        for lo in range(0, n, size):
            a = x[lo : lo + half].copy()
            b = x[lo + half : lo + size] * twiddle
            x[lo : lo + half] = a + b
            x[lo + half : lo + size] = a - b
        size *= 2
    return x


def dft_oracle(x):
    """Direct O(n^2) transform kept as an independent cross-check."""
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def fourier_features(sample, bins=40):
    """Magnitudes of the leading autocorrelation-spectrum bins.

    sample: [channels, L] with L a power of two. Per channel the biased
    autocorrelation is normalized to unit lag-zero value (constant
    channels stay zero) and transformed; the first `bins` magnitudes
    are kept and channels concatenate to one vector. The normalization
    discards per-channel energy, so only the spectral shape within each
    channel counts, and resampling the gait cycle away beforehand
    (two-step windows) removes cadence; both choices make the features
    mostly blind to who is walking, which is the point of the
    comparison.
    """
    sample = np.asarray(sample, dtype=np.float64)
    out = []
    for row in sample:
        r = autocorrelation(row)
        if r[0] > 0.0:
            r = r / r[0]
        spectrum = fft(r)
        out.append(np.abs(spectrum[:bins]))
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# wavelets


def _mexican_hat_kernel(scale):
    # support +-5 scales covers the hat to well under 1e-5 of its peak
    t = np.arange(-5 * scale, 5 * scale + 1, dtype=np.float64)
    u = t / scale
    amp = 2.0 / (np.sqrt(3.0) * np.pi**0.25)
    return amp * (1.0 - u * u) * np.exp(-0.5 * u * u) / np.sqrt(scale)


def cwt_mexican_hat(x, scales=tuple(range(1, 21))):
    """Wavelet response [len(scales), L]; zero-padded 'same' convolution.

    The center slice is taken from the full convolution by hand because
    numpy's own 'same' mode returns the longer side, and large-scale
    kernels outgrow short signals.
    """
    x = np.asarray(x, dtype=np.float64)
    rows = []
    for s in scales:
        kernel = _mexican_hat_kernel(s)
        full = np.convolve(x, kernel)
        lo = (len(kernel) - 1) // 2
        rows.append(full[lo : lo + len(x)])
    return np.stack(rows)


def wavelet_energy_features(sample, scales=tuple(range(1, 21))):
    """Relative wavelet energy per scale and channel.

    Each channel yields E_i / sum(E) over the scales; a silent channel
    yields zeros rather than NaNs. 6 channels x 20 scales = 120 values.
    """
    sample = np.asarray(sample, dtype=np.float64)
    out = []
    for row in sample:
        coeffs = cwt_mexican_hat(row, scales)
        energy = (coeffs * coeffs).sum(axis=1)
        total = energy.sum()
        out.append(energy / total if total > 0 else np.zeros_like(energy))
    return np.concatenate(out)


# ---------------------------------------------------------------------------
# principal components


@dataclass
class EigenBasis:
    mean: np.ndarray
    components: np.ndarray  # [k, D], orthonormal rows


def eigengait_fit(samples, k=40):
    """Principal directions of flattened samples [N, ...] via SVD.

    Component signs are canonicalized (largest entry positive) so a
    refit on the same data is bit-identical.
    """
    X = np.asarray(samples, dtype=np.float64).reshape(len(samples), -1)
    if k > min(X.shape):
        raise ValueError(f"k={k} exceeds the data rank bound {min(X.shape)}")
    mean = X.mean(axis=0)
    _, _, vh = np.linalg.svd(X - mean, full_matrices=False)
    comps = vh[:k]
    flips = np.sign(comps[np.arange(k), np.abs(comps).argmax(axis=1)])
    return EigenBasis(mean=mean, components=comps * flips[:, None])


def eigengait_features(basis, samples):
    """Coordinates of samples in the fitted basis, [N, k]."""
    X = np.asarray(samples, dtype=np.float64).reshape(len(samples), -1)
    return (X - basis.mean) @ basis.components.T


# ---------------------------------------------------------------------------
# margin classifier


@dataclass
class MarginModel:
    mean: np.ndarray
    scale: np.ndarray
    weights: np.ndarray  # [C, D]
    biases: np.ndarray  # [C]


def margin_train(features, labels, epochs=100, lr=0.05, lam=1e-4, batch=32,
                 seed=0):
    """One-vs-all hinge loss with L2 penalty, seeded mini-batch SGD.

    Features are standardized internally (constant columns left alone),
    so callers can feed raw magnitudes of any scale.
    """
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    n, d = X.shape
    n_classes = int(labels.max()) + 1
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale < 1e-12, 1.0, scale)
    Z = (X - mean) / scale
    Y = np.where(labels[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)
    W = np.zeros((n_classes, d))
    b = np.zeros(n_classes)
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, batch):
            sel = order[lo : lo + batch]
            Zb, Yb = Z[sel], Y[sel]
            scores = Zb @ W.T + b
            viol = ((1.0 - Yb * scores) > 0).astype(np.float64)
            coeff = viol * Yb  # [B, C]
            W -= lr * (2.0 * lam * W - coeff.T @ Zb / len(sel))
            b -= lr * (-coeff.mean(axis=0))
    return MarginModel(mean=mean, scale=scale, weights=W, biases=b)


def margin_scores(model, features):
    """Raw per-class scores [N, C]; larger means more that class."""
    X = np.asarray(features, dtype=np.float64)
    Z = (X - model.mean) / model.scale
    return Z @ model.weights.T + model.biases


def margin_predict(model, features):
    """Class with the best score; ties resolve to the lowest index."""
    return np.argmax(margin_scores(model, features), axis=1)
