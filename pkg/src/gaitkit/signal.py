"""Inertial time series, step detection and sample construction.

A recording is six channels (accelerometer x/y/z, gyroscope x/y/z) against
a monotone timestamp vector. Step detection works on the acceleration
magnitude curve and applies three rules: a step candidate must be the
maximum of a centered 0.8 s window, must exceed 10 m/s^2, and consecutive
steps must be 0.8 s to 1.6 s apart. Samples for the networks are either
two-step segments resampled to a fixed width or fixed-duration windows.
"""

import numpy as np
from dataclasses import dataclass, field
from numpy.lib.stride_tricks import sliding_window_view

MIN_STEP_GAP_S = 0.8
MAX_STEP_GAP_S = 1.6
STEP_PEAK_MIN = 10.0  # m/s^2 on the acceleration magnitude
LOCAL_MAX_HALF_WINDOW_S = 0.4
SAMPLE_WIDTH = 128


@dataclass
class InertialSeries:
    """timestamps in seconds, values as a 6 x L array, rate in Hz."""

    timestamps: np.ndarray
    values: np.ndarray
    rate: float

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != 6:
            raise ValueError(f"expected 6 channel rows, got {self.values.shape}")
        if self.timestamps.shape != (self.values.shape[1],):
            raise ValueError("timestamp count disagrees with the value columns")
        if len(self.timestamps) > 1 and np.any(np.diff(self.timestamps) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.timestamps))):
            raise ValueError("non-finite entries in the series")

    def __len__(self):
        return self.values.shape[1]

    def slice(self, start, stop):
        return InertialSeries(
            timestamps=self.timestamps[start:stop],
            values=self.values[:, start:stop],
            rate=self.rate,
        )


@dataclass
class StepBoundaries:
    """Sample indices of detected step peaks plus their timestamps."""

    indices: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.times = np.asarray(self.times, dtype=np.float64)

    def __len__(self):
        return len(self.indices)


@dataclass
class GaitSample:
    """One network input: 6 x 128 values plus provenance."""

    values: np.ndarray
    subject: str
    start_time: float = 0.0


@dataclass
class SamplePair:
    """Two samples aligned into one matrix for authentication.

    horizontal: 6 x 256, the partners side by side in time.
    vertical: 12 x 128, the partners stacked channel-wise.
    """

    values: np.ndarray
    alignment: str
    same_subject: bool
    subjects: tuple = ("", "")

    def constituents(self):
        """Recover the two 6 x 128 halves exactly."""
        if self.alignment == "horizontal":
            w = self.values.shape[1] // 2
            return self.values[:, :w], self.values[:, w:]
        return self.values[:6], self.values[6:]


def magnitude(series):
    """Euclidean norm of the three accelerometer rows, per sample."""
    acc = series.values[:3]
    return np.sqrt((acc * acc).sum(axis=0))


def detect_steps(series):
    """Step peaks satisfying all three detection rules.

    Local maxima are taken over a window of +-0.4 s around each sample
    (truncated at the boundaries of the recording). Candidates below
    10 m/s^2 are discarded. The surviving candidates are then chained
    greedily left to right: a candidate closer than 0.8 s to the last
    kept step is dropped (the earlier one wins), and one farther than
    1.6 s cannot extend the chain and is dropped as well. Fewer than two
    chained steps yield empty boundaries.

    The chaining assumes one continuous walking bout; recordings with
    pauses should be split into bouts first, otherwise everything after
    the first pause longer than 1.6 s is lost.
    """
    mag = magnitude(series)
    n = len(mag)
    half = int(round(LOCAL_MAX_HALF_WINDOW_S * series.rate))
    if n == 0:
        return StepBoundaries(np.empty(0, dtype=np.int64), np.empty(0))
    padded = np.pad(mag, half, constant_values=-np.inf)
    win_max = sliding_window_view(padded, 2 * half + 1).max(axis=1)
    candidates = np.flatnonzero((mag >= win_max) & (mag > STEP_PEAK_MIN))

    kept = []
    for idx in candidates:
        if not kept:
            kept.append(idx)
            continue
        gap = series.timestamps[idx] - series.timestamps[kept[-1]]
        if MIN_STEP_GAP_S <= gap <= MAX_STEP_GAP_S:
            kept.append(idx)
        # otherwise drop: too close keeps the earlier peak, too far
        # cannot extend the chain without breaking the gap invariant
    if len(kept) < 2:
        return StepBoundaries(np.empty(0, dtype=np.int64), np.empty(0))
    kept = np.asarray(kept, dtype=np.int64)
    return StepBoundaries(kept, series.timestamps[kept])


def extract_two_step_samples(series, boundaries, overlap_steps=1):
    """Cut segments spanning two consecutive steps.

    Each segment covers boundary[i] .. boundary[i+2] inclusive. With
    overlap_steps=1 consecutive segments share one step (i advances by 1);
    with overlap_steps=0 they are disjoint (i advances by 2). Returns a
    list of (values 6 x L, start_time) tuples.
    """
    if overlap_steps not in (0, 1):
        raise ValueError("overlap_steps must be 0 or 1")
    step = 2 - overlap_steps
    out = []
    idx = boundaries.indices
    for i in range(0, len(idx) - 2, step):
        lo, hi = idx[i], idx[i + 2]
        out.append((series.values[:, lo : hi + 1], series.timestamps[lo]))
    return out


def interpolate_to_length(segment, length=SAMPLE_WIDTH):
    """Linearly resample each channel row to `length` columns.

    The first and last columns are preserved exactly.
    """
    segment = np.asarray(segment, dtype=np.float64)
    src = segment.shape[1]
    if src < 2:
        raise ValueError("cannot interpolate a segment shorter than 2 samples")
    xp = np.linspace(0.0, 1.0, src)
    xq = np.linspace(0.0, 1.0, length)
    out = np.empty((segment.shape[0], length))
    for row in range(segment.shape[0]):
        out[row] = np.interp(xq, xp, segment[row])
    return out


def window_fixed(series, width=SAMPLE_WIDTH, stride=None):
    """Fixed-width windows over the series values.

    stride defaults to the width (no overlap); stride=width//2 gives the
    half-overlapping variant. Returns (values 6 x width, start_time) tuples.
    """
    if stride is None:
        stride = width
    n = len(series)
    out = []
    for start in range(0, n - width + 1, stride):
        out.append(
            (series.values[:, start : start + width], series.timestamps[start])
        )
    return out


def align_pair(a, b, mode):
    """Join two GaitSamples into one authentication input matrix."""
    if a.values.shape != b.values.shape:
        raise ValueError("pair constituents must share a shape")
    if mode == "horizontal":
        values = np.concatenate([a.values, b.values], axis=1)
    elif mode == "vertical":
        values = np.concatenate([a.values, b.values], axis=0)
    else:
        raise ValueError(f"unknown alignment {mode!r}")
    return SamplePair(
        values=values,
        alignment=mode,
        same_subject=a.subject == b.subject,
        subjects=(a.subject, b.subject),
    )
