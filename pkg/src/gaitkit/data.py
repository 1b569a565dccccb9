"""Recording parsing, synthetic gait generation and dataset assembly.

Text recordings are seven columns (timestamp, acc x/y/z, gyr x/y/z) with a
configurable delimiter, column order and timestamp unit. The synthetic
generator produces labelled walking/idle recordings whose step peaks
satisfy the three detection rules by construction, which gives every
benchmark in the test suite known ground truth.

Datasets are serialized as a flat binary sample container plus a
human-readable key/value manifest; re-running a build with the same seed
reproduces both byte for byte.
"""

import hashlib
import struct
import numpy as np
from dataclasses import dataclass, field, replace

from .signal import (
    GaitSample,
    InertialSeries,
    align_pair,
    detect_steps,
    extract_two_step_samples,
    interpolate_to_length,
    window_fixed,
)

GRAVITY = 9.81


# ---------------------------------------------------------------------------
# text recording format


@dataclass(frozen=True)
class RecordingFormat:
    """Adapter for whatever a capture app wrote.

    delimiter None splits on whitespace; columns name the seven fields in
    file order; time_unit converts the timestamp column to seconds;
    decimate keeps every n-th row (2 turns 100 Hz logs into 50 Hz);
    strip_static drops low-variance lead-in and tail (phone on the table).
    """

    delimiter: str = None
    columns: tuple = ("time", "ax", "ay", "az", "gx", "gy", "gz")
    time_unit: str = "ms"
    decimate: int = 1
    strip_static: bool = False


_TIME_SCALE = {"s": 1.0, "ms": 1e-3, "us": 1e-6}


def parse_recording(path, fmt=RecordingFormat()):
    """Read a seven-column text recording into an InertialSeries.

    Malformed rows raise ValueError naming the 1-based line number:
    wrong column count, non-numeric or non-finite values, and timestamps
    that fail to increase are all rejected.
    """
    if set(fmt.columns) != {"time", "ax", "ay", "az", "gx", "gy", "gz"}:
        raise ValueError("columns must name all seven fields exactly once")
    if fmt.time_unit not in _TIME_SCALE:
        raise ValueError(f"unknown time unit {fmt.time_unit!r}")
    scale = _TIME_SCALE[fmt.time_unit]
    order = {name: i for i, name in enumerate(fmt.columns)}
    rows = []
    linenos = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(fmt.delimiter)
            if len(parts) != 7:
                raise ValueError(
                    f"{path}: line {lineno}: expected 7 columns, got {len(parts)}"
                )
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric value") from None
            if not all(np.isfinite(v) for v in vals):
                raise ValueError(f"{path}: line {lineno}: non-finite value")
            rows.append(vals)
            linenos.append(lineno)
    if len(rows) < 2:
        raise ValueError(f"{path}: fewer than 2 samples")
    raw = np.asarray(rows)
    ts = raw[:, order["time"]] * scale
    bad = np.flatnonzero(np.diff(ts) <= 0)
    if bad.size:
        raise ValueError(
            f"{path}: line {linenos[bad[0] + 1]}: timestamp does not increase"
        )
    values = np.stack([raw[:, order[c]] for c in ("ax", "ay", "az", "gx", "gy", "gz")])
    if fmt.decimate > 1:
        ts = ts[:: fmt.decimate]
        values = values[:, :: fmt.decimate]
    rate = 1.0 / float(np.median(np.diff(ts)))
    series = InertialSeries(timestamps=ts, values=values, rate=rate)
    if fmt.strip_static:
        series = strip_static_edges(series)
    return series


def write_recording(path, series, fmt=RecordingFormat()):
    """Inverse of parse_recording for the default column order."""
    scale = _TIME_SCALE[fmt.time_unit]
    delim = fmt.delimiter or " "
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(len(series)):
            fields = [series.timestamps[i] / scale] + [
                series.values[c, i] for c in range(6)
            ]
            fh.write(delim.join(f"{v:.6f}" for v in fields) + "\n")


def strip_static_edges(series, window_s=3.0, threshold=0.05):
    """Drop leading and trailing stretches where the acceleration
    magnitude variance over a `window_s` window stays under threshold."""
    from .signal import magnitude

    mag = magnitude(series)
    w = max(2, int(round(window_s * series.rate)))
    lo, hi = 0, len(mag)
    while lo + w <= hi and float(np.var(mag[lo : lo + w])) < threshold:
        lo += w
    while hi - w >= lo and float(np.var(mag[hi - w : hi])) < threshold:
        hi -= w
    if hi - lo < 2:
        return series
    return series.slice(lo, hi)


# ---------------------------------------------------------------------------
# synthetic gait


@dataclass
class SubjectProfile:
    """Generative parameters for one synthetic walker.

    The step pulse rides along the (slowly drifting) gravity axis and
    keeps every acceleration-magnitude peak above the detection
    threshold; the harmonic fields live strictly in the transverse plane
    so idle and mid-stride magnitudes stay below it. Identity is carried
    by the waveform shape: harmonic amplitude ratios and, above all,
    inter-channel phase offsets.
    """

    subject: str
    step_period: float
    pulse_amp: float
    pulse_width: float  # half-width relative to the step period
    axis_tilt: tuple
    drift_rate: float
    acc_harm_amp: np.ndarray  # 2 transverse directions x 3 harmonics
    acc_harm_phase: np.ndarray
    gyr_harm_amp: np.ndarray  # 3 channels x 3 harmonics
    gyr_harm_phase: np.ndarray
    period_jitter: float = 0.02
    amp_jitter: float = 0.05
    acc_noise: float = 0.05
    gyr_noise: float = 0.05


# Shared templates keep the per-channel magnitude spectra overlapping
# across subjects; identity then lives mostly in phase and shape, which
# autocorrelation-based features cannot see.
_ACC_TEMPLATE = np.array([[0.45, 0.22, 0.10], [0.38, 0.18, 0.08]])
_GYR_TEMPLATE = np.array([[0.85, 0.40, 0.15], [0.70, 0.30, 0.12], [0.55, 0.25, 0.10]])


def random_profile(rng, subject):
    """Draw a subject profile; spectra similar, phases individual.

    Amplitude draws are deliberately narrow: the slow within-recording
    amplitude drift in synth_recording is wider than the gaps between
    subjects, so per-channel energy alone separates subjects only
    partially. Phases get the full circle and stay fixed per subject.
    """
    acc_amp = _ACC_TEMPLATE * rng.uniform(0.95, 1.05, size=(2, 3))
    total = np.abs(acc_amp).sum()
    if total > 0.85:
        acc_amp *= 0.85 / total
    return SubjectProfile(
        subject=subject,
        # period * (1 + jitter) must stay under 0.8 + 2 * width * period,
        # otherwise a mid-gap window can escape the pulse shoulders and a
        # noise spike could pass the local-max rule
        step_period=float(rng.uniform(0.95, 1.35)),
        pulse_amp=float(rng.uniform(4.5, 5.0)),
        pulse_width=float(rng.uniform(0.26, 0.29)),
        axis_tilt=(float(rng.uniform(-0.05, 0.05)), float(rng.uniform(-0.05, 0.05))),
        drift_rate=float(rng.uniform(0.003, 0.008)),
        acc_harm_amp=acc_amp,
        acc_harm_phase=rng.uniform(0.0, 2 * np.pi, size=(2, 3)),
        gyr_harm_amp=_GYR_TEMPLATE * rng.uniform(0.95, 1.05, size=(3, 3)),
        gyr_harm_phase=rng.uniform(0.0, 2 * np.pi, size=(3, 3)),
    )


@dataclass
class SynthRecording:
    """A generated series plus its ground truth."""

    series: InertialSeries
    walking_mask: np.ndarray  # bool per sample
    step_indices: np.ndarray  # sample index of each true step peak
    subject: str


def _orthonormal_frame(tilt):
    axis = np.array([tilt[0], tilt[1], 1.0])
    axis /= np.linalg.norm(axis)
    e1 = np.cross(axis, np.array([1.0, 0.0, 0.0]))
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return axis, e1, e2


def _drift_envelopes(rng, shape, n, rate, depth, knot_s=4.0):
    """Smooth multiplicative gains, one independent track per entry.

    Gaussian knots every knot_s seconds, clipped to +-2 and linearly
    interpolated, so each track stays inside 1 +- 2 * depth.
    """
    k = max(2, int(n / (knot_s * rate)) + 2)
    knots = np.clip(rng.normal(size=shape + (k,)), -2.0, 2.0)
    pos = np.linspace(0.0, max(n - 1, 1), k)
    idx = np.arange(n, dtype=float)
    flat = knots.reshape(-1, k)
    env = np.stack([np.interp(idx, pos, row) for row in flat])
    return 1.0 + depth * env.reshape(shape + (n,))


def synth_recording(profile, schedule, seed, rate=50.0, t0=0.0):
    """Generate one recording from a (kind, duration_s) schedule.

    kind is 'walk' or 'idle'. t0 offsets the timestamps so successive
    recordings of one subject can be ordered chronologically. Returns a
    SynthRecording whose step peaks satisfy all three detection rules
    by construction.
    """
    rng = np.random.default_rng(seed)
    total_s = sum(d for _, d in schedule)
    n = int(round(total_s * rate))
    # all generation happens in recording-relative time; t0 only shifts
    # the emitted timestamps, so the signal is bitwise independent of it
    t = np.arange(n) / rate
    # the device sits a little differently every session: wobble the
    # frame and nudge the harmonic cell gains per recording
    tilt = (
        profile.axis_tilt[0] + float(rng.uniform(-0.05, 0.05)),
        profile.axis_tilt[1] + float(rng.uniform(-0.05, 0.05)),
    )
    acc_cells = profile.acc_harm_amp * (
        1.0 + 0.03 * np.clip(rng.normal(size=(2, 3)), -2.0, 2.0)
    )
    gyr_cells = profile.gyr_harm_amp * (
        1.0 + 0.03 * np.clip(rng.normal(size=(3, 3)), -2.0, 2.0)
    )
    # amplitudes also wander slowly *within* a recording: windows cut a
    # few seconds apart disagree about per-channel energies, which keeps
    # magnitude spectra from pinning down the walker while the phase
    # structure stays intact
    acc_env = _drift_envelopes(rng, (2, 3), n, rate, 0.15)
    # the magnitude rule only reads acceleration, so the gyroscope can
    # drift harder without touching the detection margins
    gyr_env = _drift_envelopes(rng, (3, 3), n, rate, 0.25)
    gain_env = _drift_envelopes(rng, (), n, rate, 0.05)
    axis0, e1, e2 = _orthonormal_frame(tilt)

    # slow rotation of the whole frame in the axis/e1 plane
    theta = profile.drift_rate * t
    ct, st = np.cos(theta), np.sin(theta)
    axis_t = ct[:, None] * axis0 + st[:, None] * e1
    e1_t = -st[:, None] * axis0 + ct[:, None] * e1

    acc = GRAVITY * axis_t.copy()
    gyr = np.zeros((n, 3))
    mask = np.zeros(n, dtype=bool)
    step_times = []

    cursor = 0.0
    rec_scale = 1.0 + profile.amp_jitter * float(rng.normal())
    for kind, dur in schedule:
        seg_lo, seg_hi = cursor, cursor + dur
        cursor = seg_hi
        if kind != "walk":
            continue
        lo_i = int(np.ceil(seg_lo * rate))
        hi_i = min(n, int(np.floor(seg_hi * rate)) + 1)
        mask[lo_i:hi_i] = True

        # step centers: jittered period, kept clear of the segment edges
        p = profile.step_period
        centers = []
        tm = seg_lo + 0.6 * p
        while tm < seg_hi - 0.45 * p:
            centers.append(tm)
            eps = float(np.clip(rng.normal(), -2.0, 2.0))
            tm += p * (1.0 + profile.period_jitter * eps)
        if len(centers) < 2:
            mask[lo_i:hi_i] = False
            continue
        centers = np.asarray(centers)
        step_times.extend(centers.tolist())

        seg = (t >= seg_lo) & (t < seg_hi)
        ts = t[seg]

        # raised-cosine pulse at each step, along the gravity axis;
        # mild per-step amplitude jitter, floored well above threshold
        left = np.clip(np.searchsorted(centers, ts) - 1, 0, len(centers) - 1)
        right = np.clip(left + 1, 0, len(centers) - 1)
        d_left = np.abs(ts - centers[left])
        d_right = np.abs(ts - centers[right])
        nearest = np.where(d_left <= d_right, left, right)
        dist = np.minimum(d_left, d_right)
        # width jitter only widens the pulse: max 0.29 * 1.16 = 0.34 of
        # the period, so adjacent shoulders never meet and the mid-gap
        # magnitude stays at gravity
        half = profile.pulse_width * p * (1.0 + 0.16 * rng.random(len(centers)))
        center_idx = np.clip(np.round(centers * rate).astype(int), 0, n - 1)
        step_amp = profile.pulse_amp * rec_scale * gain_env[center_idx] * (
            1.0 + 0.08 * np.clip(rng.normal(size=len(centers)), -2.0, 2.0)
        )
        u = np.clip(dist / half[nearest], 0.0, 1.0)
        pulse = step_amp[nearest] * np.cos(0.5 * np.pi * u) ** 2 * (u < 1.0)
        # every footfall tips the device a little: per-step transverse
        # kicks on the pulse direction, norm preserved so the peak
        # magnitude keeps its full rule margin
        kick = 0.14 * np.clip(rng.normal(size=(len(centers), 2)), -2.0, 2.0)
        k1 = kick[nearest, 0]
        k2 = kick[nearest, 1]
        knorm = np.sqrt(1.0 + k1 ** 2 + k2 ** 2)

        # gait phase advances by 1 per step; the harmonic grid is not
        # rigidly locked to the impacts, so windows cut at detected
        # peaks see a slightly different phase origin every time
        anchor = 0.04 * np.clip(rng.normal(size=len(centers)), -2.0, 2.0)
        phase = np.interp(
            ts, centers, np.arange(len(centers), dtype=float) + anchor
        )

        genv = gain_env[seg]
        h1 = np.zeros(len(ts))
        h2 = np.zeros(len(ts))
        for j in range(3):
            w = 2.0 * np.pi * (j + 1)
            h1 += (
                rec_scale
                * acc_cells[0, j]
                * acc_env[0, j, seg]
                * np.cos(w * phase + profile.acc_harm_phase[0, j])
            )
            h2 += (
                rec_scale
                * acc_cells[1, j]
                * acc_env[1, j, seg]
                * np.cos(w * phase + profile.acc_harm_phase[1, j])
            )
        acc[seg] += (
            (pulse / knorm)[:, None] * axis_t[seg]
            + (h1 * genv + pulse * k1 / knorm)[:, None] * e1_t[seg]
            + (h2 * genv + pulse * k2 / knorm)[:, None] * e2
        )
        for c in range(3):
            g = np.zeros(len(ts))
            for j in range(3):
                w = 2.0 * np.pi * (j + 1)
                g += (
                    rec_scale
                    * gyr_cells[c, j]
                    * gyr_env[c, j, seg]
                    * np.cos(w * phase + profile.gyr_harm_phase[c, j])
                )
            gyr[seg, c] += g * genv

    acc += rng.normal(scale=profile.acc_noise, size=(n, 3))
    gyr += rng.normal(scale=profile.gyr_noise, size=(n, 3))

    series = InertialSeries(
        timestamps=t0 + t, values=np.vstack([acc.T, gyr.T]), rate=rate
    )
    step_idx = np.asarray(np.round(np.asarray(step_times) * rate), dtype=np.int64)
    return SynthRecording(
        series=series,
        walking_mask=mask,
        step_indices=step_idx,
        subject=profile.subject,
    )


# ---------------------------------------------------------------------------
# manifest


@dataclass
class DatasetManifest:
    """Key/value description of a built dataset; serializes to text with
    a fixed key order so equal builds are byte-identical."""

    kind: str
    recipe: str
    overlap: str
    alignment: str
    seed: int
    subjects: tuple
    train_count: int
    test_count: int
    extra: tuple = ()  # ((key, value), ...) pairs, already strings

    def to_text(self):
        lines = [
            f"kind = {self.kind}",
            f"recipe = {self.recipe}",
            f"overlap = {self.overlap}",
            f"alignment = {self.alignment}",
            f"seed = {self.seed}",
            f"subjects = {','.join(self.subjects)}",
            f"train_count = {self.train_count}",
            f"test_count = {self.test_count}",
        ]
        for k, v in self.extra:
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        kv = {}
        order = []
        for line in text.splitlines():
            if not line.strip():
                continue
            k, _, v = line.partition(" = ")
            kv[k] = v
            order.append(k)
        base = {"kind", "recipe", "overlap", "alignment", "seed", "subjects",
                "train_count", "test_count"}
        extra = tuple((k, kv[k]) for k in order if k not in base)
        return cls(
            kind=kv["kind"],
            recipe=kv["recipe"],
            overlap=kv["overlap"],
            alignment=kv["alignment"],
            seed=int(kv["seed"]),
            subjects=tuple(s for s in kv["subjects"].split(",") if s),
            train_count=int(kv["train_count"]),
            test_count=int(kv["test_count"]),
            extra=extra,
        )

    def sha256(self):
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# binary sample container
#
# layout, all little-endian:
#   magic 'GKDS', version u32,
#   kind str, recipe str, alignment str      (u16 length + utf-8 each)
#   rows u32, cols u32, count u64
#   subject table: u16 n, then n strings     (index = label value)
#   labels: count * i32
#   mask flag u8; if 1: count * cols u8
#   payload: count * rows * cols f32

_MAGIC = b"GKDS"
_VERSION = 1


def _pack_str(s):
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def _unpack_str(buf, off):
    (n,) = struct.unpack_from("<H", buf, off)
    off += 2
    return buf[off : off + n].decode("utf-8"), off + n


def write_sample_container(path, kind, recipe, alignment, subjects, values,
                           labels, masks=None):
    """values: (count, rows, cols) float array; labels: (count,) ints."""
    values = np.ascontiguousarray(values, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype="<i4")
    count, rows, cols = values.shape
    if labels.shape != (count,):
        raise ValueError("one label per sample required")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(_pack_str(kind))
        fh.write(_pack_str(recipe))
        fh.write(_pack_str(alignment))
        fh.write(struct.pack("<IIQ", rows, cols, count))
        fh.write(struct.pack("<H", len(subjects)))
        for s in subjects:
            fh.write(_pack_str(s))
        fh.write(labels.tobytes())
        if masks is None:
            fh.write(struct.pack("<B", 0))
        else:
            masks = np.ascontiguousarray(masks, dtype=np.uint8)
            if masks.shape != (count, cols):
                raise ValueError("masks must be (count, cols)")
            fh.write(struct.pack("<B", 1))
            fh.write(masks.tobytes())
        fh.write(values.tobytes())


def read_sample_container(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != _MAGIC:
        raise ValueError(f"{path}: not a sample container")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    off = 8
    kind, off = _unpack_str(buf, off)
    recipe, off = _unpack_str(buf, off)
    alignment, off = _unpack_str(buf, off)
    rows, cols, count = struct.unpack_from("<IIQ", buf, off)
    off += 16
    (n_subj,) = struct.unpack_from("<H", buf, off)
    off += 2
    subjects = []
    for _ in range(n_subj):
        s, off = _unpack_str(buf, off)
        subjects.append(s)
    labels = np.frombuffer(buf, dtype="<i4", count=count, offset=off).copy()
    off += 4 * count
    (has_mask,) = struct.unpack_from("<B", buf, off)
    off += 1
    masks = None
    if has_mask:
        masks = (
            np.frombuffer(buf, dtype=np.uint8, count=count * cols, offset=off)
            .reshape(count, cols)
            .copy()
        )
        off += count * cols
    values = (
        np.frombuffer(buf, dtype="<f4", count=count * rows * cols, offset=off)
        .reshape(count, rows, cols)
        .astype(np.float64)
    )
    return {
        "kind": kind,
        "recipe": recipe,
        "alignment": alignment,
        "subjects": tuple(subjects),
        "values": values,
        "labels": labels,
        "masks": masks,
    }


# ---------------------------------------------------------------------------
# dataset builders


@dataclass
class IdentDataset:
    train: list
    test: list
    class_map: dict
    manifest: DatasetManifest


@dataclass
class AuthDataset:
    train_pairs: list
    test_pairs: list
    train_subjects: tuple
    test_subjects: tuple
    manifest: DatasetManifest


@dataclass
class ExtractionDataset:
    windows: list  # (values 6 x width, mask width, subject)
    manifest: DatasetManifest


def _samples_from_recording(subject, series, recipe, overlap, width):
    if recipe == "interp":
        if overlap not in ("0", "1step"):
            raise ValueError("interp overlap must be '0' or '1step'")
        bounds = detect_steps(series)
        segs = extract_two_step_samples(
            series, bounds, overlap_steps=1 if overlap == "1step" else 0
        )
        return [
            GaitSample(interpolate_to_length(seg, width), subject, t0)
            for seg, t0 in segs
        ]
    if recipe == "fixed":
        if overlap not in ("0", "1.28s"):
            raise ValueError("fixed overlap must be '0' or '1.28s'")
        stride = width if overlap == "0" else width // 2
        return [
            GaitSample(vals.copy(), subject, t0)
            for vals, t0 in window_fixed(series, width, stride)
        ]
    raise ValueError(f"unknown recipe {recipe!r}")


def build_ident_dataset(recordings, recipe="interp", overlap="1step",
                        train_fraction=0.9, width=128, seed=0):
    """Identification samples with a per-subject chronological split.

    recordings: iterable of (subject, InertialSeries). Each subject's
    samples are ordered by start time; the first 90% (by default) train
    and the most recent 10% test.
    """
    per_subject = {}
    for subject, series in recordings:
        per_subject.setdefault(subject, []).extend(
            _samples_from_recording(subject, series, recipe, overlap, width)
        )
    subjects = tuple(sorted(per_subject))
    class_map = {s: i for i, s in enumerate(subjects)}
    train, test = [], []
    for s in subjects:
        samples = sorted(per_subject[s], key=lambda g: g.start_time)
        cut = int(len(samples) * train_fraction)
        train.extend(samples[:cut])
        test.extend(samples[cut:])
    manifest = DatasetManifest(
        kind="ident",
        recipe=recipe,
        overlap=overlap,
        alignment="",
        seed=seed,
        subjects=subjects,
        train_count=len(train),
        test_count=len(test),
    )
    return IdentDataset(train, test, class_map, manifest)


def _draw_pairs(rng, samples_by_subject, n_pairs, alignment):
    """50/50 same/different pairs, without replacement where possible."""
    subjects = sorted(samples_by_subject)
    pairs = []
    seen = set()
    n_same = n_pairs // 2
    attempts = 0
    while len(pairs) < n_same and attempts < 50 * n_pairs:
        attempts += 1
        s = subjects[rng.integers(len(subjects))]
        pool = samples_by_subject[s]
        if len(pool) < 2:
            continue
        i, j = rng.choice(len(pool), size=2, replace=False)
        key = (s, int(i), s, int(j))
        if key in seen and attempts < 25 * n_pairs:
            continue
        seen.add(key)
        pairs.append(align_pair(pool[i], pool[j], alignment))
    attempts = 0
    while len(pairs) < n_pairs and attempts < 50 * n_pairs:
        attempts += 1
        ia, ib = rng.choice(len(subjects), size=2, replace=False)
        pa, pb = samples_by_subject[subjects[ia]], samples_by_subject[subjects[ib]]
        i, j = int(rng.integers(len(pa))), int(rng.integers(len(pb)))
        key = (subjects[ia], i, subjects[ib], j)
        if key in seen and attempts < 25 * n_pairs:
            continue
        seen.add(key)
        pairs.append(align_pair(pa[i], pb[j], alignment))
    order = rng.permutation(len(pairs))
    return [pairs[k] for k in order]


def build_auth_dataset(recordings, alignment, n_train_pairs, n_test_pairs,
                       n_train_subjects=None, recipe="interp", overlap="1step",
                       width=128, seed=0):
    """Authentication pairs over a subject-disjoint split.

    Subjects are shuffled by the seed; the first n_train_subjects (two
    thirds when unset) contribute training pairs, the rest test pairs.
    Labels: same subject = 1, different = 0.
    """
    if alignment not in ("horizontal", "vertical"):
        raise ValueError(f"unknown alignment {alignment!r}")
    per_subject = {}
    for subject, series in recordings:
        per_subject.setdefault(subject, []).extend(
            _samples_from_recording(subject, series, recipe, overlap, width)
        )
    subjects = sorted(per_subject)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(subjects))
    if n_train_subjects is None:
        n_train_subjects = max(2, (2 * len(subjects)) // 3)
    train_subjects = tuple(sorted(subjects[i] for i in order[:n_train_subjects]))
    test_subjects = tuple(sorted(subjects[i] for i in order[n_train_subjects:]))
    if len(test_subjects) < 2:
        raise ValueError("need at least 2 held-out subjects for test pairs")
    train_pairs = _draw_pairs(
        rng, {s: per_subject[s] for s in train_subjects}, n_train_pairs, alignment
    )
    test_pairs = _draw_pairs(
        rng, {s: per_subject[s] for s in test_subjects}, n_test_pairs, alignment
    )
    manifest = DatasetManifest(
        kind="auth",
        recipe=recipe,
        overlap=overlap,
        alignment=alignment,
        seed=seed,
        subjects=tuple(subjects),
        train_count=len(train_pairs),
        test_count=len(test_pairs),
        extra=(
            ("train_subjects", ",".join(train_subjects)),
            ("test_subjects", ",".join(test_subjects)),
        ),
    )
    return AuthDataset(train_pairs, test_pairs, train_subjects, test_subjects, manifest)


def build_extraction_dataset(synth_recordings, width=1024, seed=0):
    """Non-overlapping windows plus per-timestep walking masks."""
    windows = []
    subjects = sorted({r.subject for r in synth_recordings})
    for rec in synth_recordings:
        n = len(rec.series)
        for start in range(0, n - width + 1, width):
            windows.append(
                (
                    rec.series.values[:, start : start + width],
                    rec.walking_mask[start : start + width].astype(np.float64),
                    rec.subject,
                )
            )
    manifest = DatasetManifest(
        kind="extract",
        recipe="extract",
        overlap="0",
        alignment="",
        seed=seed,
        subjects=tuple(subjects),
        train_count=len(windows),
        test_count=0,
    )
    return ExtractionDataset(windows, manifest)
