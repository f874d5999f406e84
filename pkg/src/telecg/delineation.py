"""Automated measurement pipeline.

R detection on a reference lead, per-lead refinement, beat segmentation and
classification, dominant-beat selection, QRS typing, P/QRS/T boundary
detection, multi-lead aggregation and interval computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import signal as _signal

from . import kernels
from .dsp import FilterConfig, QrsRegionMask, apply_chain, emg_dynamic_filter
from .errors import InvalidRecordError, UnmeasurableRecordError
from .model import (
    BeatFiducials,
    BeatLabel,
    EcgRecord,
    GlobalMeasurements,
    LeadId,
    LEAD_ORDER,
    LIMB_LEADS,
    QrsType,
)

# Pan-Tompkins internals: canonical constants.
PT_BAND_HZ = (5.0, 15.0)
PT_INTEGRATION_MS = 150.0
PT_REFRACTORY_MS = 200.0
PT_TWAVE_WINDOW_MS = 360.0
PT_SLOPE_WINDOW_MS = 75.0
PT_SIGNAL_COEF = 0.125
PT_THRESHOLD_COEF = 0.25
PT_SEARCHBACK_COEF = 0.25
PT_SEARCHBACK_RR_FACTOR = 1.66
PT_SLOPE_FLOOR_FRACTION = 0.3

# QRS boundary search spans around the R peak.
QRS_ONSET_SEARCH_MS = 80.0
QRS_OFFSET_SEARCH_MS = 120.0
QRS_SLOPE_GAP_BRIDGE_MS = 20.0

# Amplitude floors: below these a lead reports wave absence, not fiducials.
P_MIN_AMPLITUDE_UV = 25.0
T_MIN_AMPLITUDE_UV = 50.0
QRS_MIN_AMPLITUDE_UV = 50.0
DEFLECTION_SIGNIFICANCE_FRACTION = 0.10

P_GAP_BEFORE_QRS_MS = 40.0
T_GAP_AFTER_QRS_MS = 40.0
# Light smoothing for QRS boundaries (steep slopes tolerate none of the
# widening); one full mains period for the low-slope P/T boundaries, which
# also nulls residual notch-filter ringing around each QRS.
SMOOTH_WINDOW_QRS_MS = 10.0
SMOOTH_WINDOW_PT_MS = 22.0

# When lead II carries weak QRS energy relative to the best limb lead,
# R detection falls back to that lead (the record is still measurable).
DETECTION_LEAD_MIN_RATIO = 0.5

QRS_MASK_HALF_WIDTH_MS = 60.0


@dataclass(frozen=True)
class DelineationConfig:
    """Tunable windows and thresholds of the delineation pipeline."""

    r_refine_window_ms: float = 100.0
    p_search_window_ms: float = 240.0
    t_window_fraction_of_rr: float = 0.6
    slope_threshold_fraction: float = 0.1
    outlier_mad_k: float = 3.0

    def __post_init__(self) -> None:
        for name in (
            "r_refine_window_ms",
            "p_search_window_ms",
            "t_window_fraction_of_rr",
            "slope_threshold_fraction",
            "outlier_mad_k",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.t_window_fraction_of_rr > 1:
            raise ValueError("t_window_fraction_of_rr must lie in (0, 1]")


@dataclass(frozen=True)
class BeatFeatures:
    """QRS duration, RR interval and peak-to-peak amplitude of one beat."""

    qrs_duration_ms: float | None
    rr_interval_ms: float | None
    r_amplitude_uv: float


@dataclass(frozen=True)
class QrsBounds:
    onset: int
    offset: int
    low_confidence: bool = False


@dataclass(frozen=True)
class WaveBounds:
    onset: int
    offset: int


@dataclass(frozen=True)
class GlobalWaveBounds:
    """Earliest-onset/latest-offset wave windows after outlier rejection."""

    p: WaveBounds | None = None
    qrs: WaveBounds | None = None
    t: WaveBounds | None = None


@dataclass(frozen=True)
class Deflection:
    """One signed QRS sub-wave candidate (amplitude relative to baseline)."""

    index: int
    amplitude_uv: float


@dataclass(frozen=True)
class MeasurementResult:
    measurements: GlobalMeasurements
    fiducials: dict[LeadId, tuple[BeatFiducials, ...]]
    global_waves: GlobalWaveBounds
    dominant_beat: int
    beat_labels: tuple[BeatLabel, ...]
    r_peaks: tuple[int, ...]
    detection_lead: LeadId
    config: DelineationConfig
    filter_config: FilterConfig


def _ms_to_samples(ms: float, fs: float) -> int:
    return int(round(ms * fs / 1000.0))


def _samples_to_ms(n: int, fs: float) -> float:
    return n * 1000.0 / fs


def _smooth(x: np.ndarray, fs: float, window_ms: float = SMOOTH_WINDOW_QRS_MS) -> np.ndarray:
    half = max(1, _ms_to_samples(window_ms, fs) // 2)
    return kernels.variable_window_mean(x, np.full(len(x), half, dtype=np.int64))


def _bandpass_qrs(x: np.ndarray, fs: float) -> np.ndarray:
    b, a = _signal.butter(2, PT_BAND_HZ, btype="bandpass", fs=fs)
    padlen = int(min(len(x) - 1, max(3 * (max(len(a), len(b)) - 1), round(2 * fs / PT_BAND_HZ[0]))))
    return _signal.filtfilt(b, a, x, padlen=padlen)


def _max_slope_near(der: np.ndarray, idx: int, window: int) -> float:
    lo = max(0, idx - window)
    return float(np.max(np.abs(der[lo : idx + 1])))


def detect_r_peaks(lead_signal, fs: float) -> np.ndarray:
    """Pan-Tompkins R detection: band-pass, derivative, squaring, integration,
    adaptive dual thresholds with search-back. Returns strictly ascending
    sample indices separated by at least the 200 ms refractory period."""
    x = np.asarray(lead_signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if len(x) < 2 * fs:
        raise ValueError("signal too short for R detection (need >= 2 s)")
    if not np.any(x != x[0]):
        return np.empty(0, dtype=np.int64)

    bp = _bandpass_qrs(x, fs)
    der = np.gradient(bp) * fs
    sq = der * der
    mwi_width = max(1, _ms_to_samples(PT_INTEGRATION_MS, fs))
    mwi = kernels.moving_window_integral(sq, mwi_width)
    candidates = kernels.local_maxima(mwi)
    if len(candidates) == 0:
        return np.empty(0, dtype=np.int64)

    # Slope discrimination runs on the input signal's derivative: the narrow
    # QRS keeps its full slope there, while P/T slopes stay an order of
    # magnitude lower even when the band-pass has equalized their energies.
    slope_signal = np.gradient(x) * fs
    accepted = _adaptive_threshold_scan(mwi, slope_signal, candidates, fs)
    if not accepted:
        return np.empty(0, dtype=np.int64)

    # Map each accepted integration peak back to the R deflection: the
    # largest band-passed swing within one integration window behind it.
    peaks = []
    for p in accepted:
        lo = max(0, p - mwi_width)
        r = lo + int(np.argmax(np.abs(bp[lo : p + 1])))
        peaks.append(r)

    refractory = _ms_to_samples(PT_REFRACTORY_MS, fs)
    out: list[int] = []
    for r in sorted(set(peaks)):
        if out and r - out[-1] < refractory:
            if abs(bp[r]) > abs(bp[out[-1]]):
                out[-1] = r
            continue
        out.append(r)
    return np.asarray(out, dtype=np.int64)


def _adaptive_threshold_scan(
    mwi: np.ndarray, slope_signal: np.ndarray, candidates: np.ndarray, fs: float
) -> list[int]:
    refractory = _ms_to_samples(PT_REFRACTORY_MS, fs)
    twave_window = _ms_to_samples(PT_TWAVE_WINDOW_MS, fs)
    slope_window = _ms_to_samples(PT_SLOPE_WINDOW_MS, fs)

    learn = mwi[: int(2 * fs)]
    spk = 0.5 * float(np.max(learn))
    npk = 0.5 * float(np.mean(learn))

    accepted: list[int] = []
    accepted_slopes: list[float] = []
    skipped: list[int] = []

    def threshold1() -> float:
        return npk + PT_THRESHOLD_COEF * (spk - npk)

    def rr_average() -> float | None:
        if len(accepted) < 3:
            return None
        return float(np.mean(np.diff(accepted)[-8:]))

    for p in candidates:
        p = int(p)
        v = float(mwi[p])
        slope = _max_slope_near(slope_signal, p, slope_window)

        if accepted and p - accepted[-1] < refractory:
            # Keep the stronger of the two: a P/noise bump accepted during
            # the learning phase yields to the true QRS right behind it.
            if v > mwi[accepted[-1]] and slope >= 0.5 * accepted_slopes[-1]:
                accepted[-1] = p
                accepted_slopes[-1] = slope
                spk = PT_SIGNAL_COEF * v + (1 - PT_SIGNAL_COEF) * spk
            continue

        is_signal = v > threshold1()
        if is_signal and accepted_slopes:
            # Slope qualification (PT judges slope, amplitude and width):
            # P/T waves stay far below genuine QRS steepness.
            if slope < PT_SLOPE_FLOOR_FRACTION * float(np.mean(accepted_slopes[-8:])):
                is_signal = False
        if is_signal and accepted and p - accepted[-1] < twave_window:
            if slope < 0.5 * accepted_slopes[-1]:
                is_signal = False  # T wave riding after the previous QRS

        if is_signal:
            accepted.append(p)
            accepted_slopes.append(slope)
            spk = PT_SIGNAL_COEF * v + (1 - PT_SIGNAL_COEF) * spk
            skipped = []
            continue

        npk = PT_SIGNAL_COEF * v + (1 - PT_SIGNAL_COEF) * npk
        skipped.append(p)

        # Search-back: a long gap since the last accepted peak re-examines
        # skipped candidates against the lower threshold.
        rr_avg = rr_average()
        if rr_avg is not None and p - accepted[-1] > PT_SEARCHBACK_RR_FACTOR * rr_avg:
            thr2 = 0.5 * threshold1()
            viable = [
                s for s in skipped if s - accepted[-1] >= refractory and mwi[s] > thr2
            ]
            if viable:
                best = max(viable, key=lambda s: mwi[s])
                accepted.append(best)
                accepted_slopes.append(_max_slope_near(slope_signal, best, slope_window))
                spk = PT_SEARCHBACK_COEF * mwi[best] + (1 - PT_SEARCHBACK_COEF) * spk
                skipped = [s for s in skipped if s > best]
    return accepted


def refine_r_peaks(
    record: EcgRecord, approx_peaks: Sequence[int], window_ms: float = 100.0
) -> dict[LeadId, np.ndarray]:
    """Per-lead R anchors: the largest deviation from the local baseline
    within +/- window_ms of each approximate peak (ties resolved toward the
    window center)."""
    fs = record.sample_rate_hz
    window = _ms_to_samples(window_ms, fs)
    return {
        lead: _refine_on_signal(record.lead_uv(lead), approx_peaks, window)
        for lead in LEAD_ORDER
        if lead in record.leads
    }


def _refine_on_signal(x: np.ndarray, approx_peaks: Sequence[int], window: int) -> np.ndarray:
    n = len(x)
    out = np.empty(len(approx_peaks), dtype=np.int64)
    for k, p in enumerate(approx_peaks):
        p = int(min(max(p, 0), n - 1))
        lo = max(0, p - window)
        hi = min(n, p + window + 1)
        seg = x[lo:hi]
        deviation = np.abs(seg - np.median(seg))
        best = deviation.max()
        ties = np.flatnonzero(deviation == best)
        centered = ties[int(np.argmin(np.abs(ties + lo - p)))]
        out[k] = lo + centered
    return out


def segment_beats(peaks: Sequence[int], fs: float, record_len: int) -> list[tuple[int, int]]:
    """One half-open window per peak, split at midpoints between neighbors;
    the first and last windows are clamped to the record edges."""
    del fs  # boundaries are pure index arithmetic
    peaks = list(peaks)
    if not peaks:
        return []
    bounds = [0]
    for a, b in zip(peaks, peaks[1:]):
        bounds.append((a + b) // 2)
    bounds.append(record_len)
    return [(bounds[i], bounds[i + 1]) for i in range(len(peaks))]


def extract_beat_features(
    window: tuple[int, int],
    x_uv: np.ndarray,
    fs: float,
    r_index: int,
    prev_r: int | None,
    config: DelineationConfig | None = None,
) -> BeatFeatures:
    """Provisional QRS duration, RR interval and peak-to-peak amplitude."""
    config = config or DelineationConfig()
    bounds = delineate_qrs(window, x_uv, r_index, fs, config)
    seg = x_uv[bounds.onset : bounds.offset + 1]
    amplitude = float(seg.max() - seg.min()) if len(seg) else 0.0
    duration = None
    if not bounds.low_confidence:
        duration = _samples_to_ms(bounds.offset - bounds.onset, fs)
    rr = _samples_to_ms(r_index - prev_r, fs) if prev_r is not None else None
    return BeatFeatures(qrs_duration_ms=duration, rr_interval_ms=rr, r_amplitude_uv=amplitude)


def classify_beats(features: Sequence[BeatFeatures]) -> list[BeatLabel]:
    """Label beats 0/1/2.

    Abnormal (2): QRS duration deviating more than 20% from the running
    median of prior normal beats, or RR below 0.8x the running mean RR.
    NormalShortRR (1): a normal beat directly before an abnormal one whose
    own RR is below 0.9x the running mean. Fewer than 3 beats: all normal.
    """
    if not features:
        raise ValueError("classify_beats needs at least one beat")
    n = len(features)
    labels = [BeatLabel.NORMAL] * n
    if n < 3:
        return labels

    qrs_of_normals: list[float] = []
    rr_seen: list[float] = []
    rr_running_mean: list[float | None] = []
    for i, f in enumerate(features):
        mean_rr = None
        if f.rr_interval_ms is not None:
            rr_seen.append(f.rr_interval_ms)
            mean_rr = float(np.mean(rr_seen))
        rr_running_mean.append(mean_rr)

        abnormal = False
        if f.rr_interval_ms is not None and mean_rr is not None:
            abnormal = f.rr_interval_ms < 0.8 * mean_rr
        if not abnormal and f.qrs_duration_ms is not None and qrs_of_normals:
            med = float(np.median(qrs_of_normals))
            if med > 0 and abs(f.qrs_duration_ms - med) > 0.2 * med:
                abnormal = True

        if abnormal:
            labels[i] = BeatLabel.ABNORMAL
        elif f.qrs_duration_ms is not None:
            qrs_of_normals.append(f.qrs_duration_ms)

    for i in range(n - 1):
        if labels[i] is BeatLabel.NORMAL and labels[i + 1] is BeatLabel.ABNORMAL:
            rr = features[i].rr_interval_ms
            mean_rr = rr_running_mean[i]
            if rr is not None and mean_rr is not None and rr < 0.9 * mean_rr:
                labels[i] = BeatLabel.NORMAL_SHORT_RR
    return labels


def select_dominant_beat(labels: Sequence[BeatLabel], features: Sequence[BeatFeatures]) -> int:
    """The representative beat: nearest to its class median in normalized
    (QRS duration, R amplitude) space; lowest index breaks ties."""
    if not features or len(labels) != len(features):
        raise ValueError("labels and features must be non-empty and aligned")
    pool = [i for i, lbl in enumerate(labels) if lbl is BeatLabel.NORMAL]
    if not pool:
        counts: dict[BeatLabel, int] = {}
        for lbl in labels:
            counts[lbl] = counts.get(lbl, 0) + 1
        best_label = min(counts, key=lambda l: (-counts[l], int(l)))
        pool = [i for i, lbl in enumerate(labels) if lbl is best_label]

    qrs = np.array(
        [features[i].qrs_duration_ms if features[i].qrs_duration_ms is not None else np.nan for i in pool]
    )
    amp = np.array([features[i].r_amplitude_uv for i in pool], dtype=np.float64)
    dist = np.hypot(_normalized_deviation(qrs), _normalized_deviation(amp))
    return pool[int(np.argmin(dist))]


def _normalized_deviation(values: np.ndarray) -> np.ndarray:
    med = np.nanmedian(values) if np.any(~np.isnan(values)) else np.nan
    if not np.isfinite(med) or med == 0:
        return np.zeros(len(values))
    dev = (values - med) / med
    return np.where(np.isnan(dev), 0.0, dev)


def find_qrs_deflections(
    x_uv: np.ndarray, onset: int, offset: int, fs: float
) -> list[Deflection]:
    """Alternating signed extrema of the QRS complex relative to the
    pre-onset baseline; candidates for Q/R/S/R' typing."""
    baseline = _pre_window_baseline(x_uv, onset, fs)
    lo, hi = max(0, onset), min(len(x_uv), offset + 1)
    v = x_uv[lo:hi] - baseline
    if len(v) < 3:
        return []
    maxima = kernels.local_maxima(v)
    minima = kernels.local_maxima(-v)
    extrema = sorted(int(i) for i in np.concatenate([maxima, minima]))
    deflections = [Deflection(lo + i, float(v[i])) for i in extrema]
    # Collapse consecutive same-sign extrema, keeping the largest swing.
    collapsed: list[Deflection] = []
    for d in deflections:
        if collapsed and (collapsed[-1].amplitude_uv >= 0) == (d.amplitude_uv >= 0):
            if abs(d.amplitude_uv) > abs(collapsed[-1].amplitude_uv):
                collapsed[-1] = d
            continue
        collapsed.append(d)
    return collapsed


def type_qrs(deflections: Sequence[Deflection]) -> tuple[QrsType, dict[str, int | None]]:
    """Classify significant deflections into one of the six QRS types and
    name the Q/R/S/R' sub-peaks. Raises ValueError when nothing exceeds the
    significance floor."""
    if deflections:
        largest = max(abs(d.amplitude_uv) for d in deflections)
    else:
        largest = 0.0
    floor = max(DEFLECTION_SIGNIFICANCE_FRACTION * largest, QRS_MIN_AMPLITUDE_UV)
    significant = [d for d in deflections if abs(d.amplitude_uv) >= floor]
    if not significant:
        raise ValueError("no QRS activity")

    q = r = s = r_prime = None
    for d in significant:
        if d.amplitude_uv > 0:
            if r is None:
                r = d.index
            elif r_prime is None:
                r_prime = d.index
        else:
            if r is None:
                if q is None:
                    q = d.index
            elif s is None:
                s = d.index

    if r is None:
        qrs_type = QrsType.QS
        q = significant[0].index
    elif r_prime is not None:
        qrs_type = QrsType.RSR_PRIME
    elif q is not None and s is not None:
        qrs_type = QrsType.QRS
    elif q is not None:
        qrs_type = QrsType.QR
    elif s is not None:
        qrs_type = QrsType.RS
    else:
        qrs_type = QrsType.R
    return qrs_type, {"q": q, "r": r, "s": s, "r_prime": r_prime}


def _pre_window_baseline(x: np.ndarray, onset: int, fs: float) -> float:
    w = max(1, _ms_to_samples(20.0, fs))
    lo = max(0, onset - w)
    if lo == onset:
        return float(x[onset]) if len(x) else 0.0
    return float(np.mean(x[lo:onset]))


def _slope_groups(
    slope_abs: np.ndarray, threshold: float, bridge: int
) -> list[tuple[int, int]]:
    """Closed index runs where |slope| >= threshold, merging gaps <= bridge."""
    above = np.flatnonzero(slope_abs >= threshold)
    if len(above) == 0:
        return []
    groups: list[tuple[int, int]] = []
    start = prev = int(above[0])
    for i in above[1:]:
        i = int(i)
        if i - prev > bridge:
            groups.append((start, prev))
            start = i
        prev = i
    groups.append((start, prev))
    return groups


def _group_containing(groups: list[tuple[int, int]], idx: int) -> tuple[int, int] | None:
    for g in groups:
        if g[0] <= idx <= g[1]:
            return g
    if not groups:
        return None
    return min(groups, key=lambda g: min(abs(g[0] - idx), abs(g[1] - idx)))


def delineate_qrs(
    window: tuple[int, int],
    x_uv: np.ndarray,
    r_index: int,
    fs: float,
    config: DelineationConfig | None = None,
) -> QrsBounds:
    """QRS onset/offset: the last samples before/after the deflection group
    where |slope| falls below the threshold fraction of the complex's
    maximum slope. Search spans r-80 ms to r+120 ms."""
    config = config or DelineationConfig()
    lo = max(window[0], r_index - _ms_to_samples(QRS_ONSET_SEARCH_MS, fs))
    hi = min(window[1], r_index + _ms_to_samples(QRS_OFFSET_SEARCH_MS, fs) + 1)
    lo = max(0, lo)
    hi = min(len(x_uv), hi)
    if hi - lo < 3:
        return QrsBounds(max(lo, r_index - 1), min(hi - 1, r_index + 1), low_confidence=True)

    seg = _smooth(x_uv[lo:hi], fs)
    slope = np.abs(np.gradient(seg) * fs)
    max_slope = float(slope.max())
    if max_slope <= 0:
        return QrsBounds(lo, hi - 1, low_confidence=True)

    bridge = _ms_to_samples(QRS_SLOPE_GAP_BRIDGE_MS, fs)
    groups = _slope_groups(slope, config.slope_threshold_fraction * max_slope, bridge)
    group = _group_containing(groups, r_index - lo)
    if group is None:
        return QrsBounds(lo, hi - 1, low_confidence=True)

    low_confidence = False
    onset = lo + group[0] - 1
    if group[0] == 0:
        onset = lo
        low_confidence = True
    offset = lo + group[1] + 1
    if group[1] == hi - lo - 1:
        offset = hi - 1
        low_confidence = True

    onset = min(onset, r_index - 1)
    offset = max(offset, r_index + 1)
    onset = max(onset, window[0], 0)
    offset = min(offset, window[1] - 1, len(x_uv) - 1)
    return QrsBounds(onset, offset, low_confidence)


def delineate_p(
    x_uv: np.ndarray,
    qrs_onset: int,
    prev_qrs_offset: int | None,
    fs: float,
    config: DelineationConfig | None = None,
) -> tuple[int, int, int] | None:
    """P onset/peak/offset found by a window sliding back from 40 ms before
    the QRS onset toward the previous beat; absent below the 25 uV floor."""
    config = config or DelineationConfig()
    limit = max(0, prev_qrs_offset if prev_qrs_offset is not None else 0)
    end = qrs_onset - _ms_to_samples(P_GAP_BEFORE_QRS_MS, fs)
    width = _ms_to_samples(config.p_search_window_ms, fs)
    min_span = _ms_to_samples(40.0, fs)
    if end - limit < min_span:
        return None

    smooth = _smooth(x_uv, fs, SMOOTH_WINDOW_PT_MS)
    step = max(1, width // 2)
    peak = None
    while True:
        start = max(limit, end - width)
        if end - start < min_span:
            break
        seg = smooth[start:end]
        baseline = float(np.median(seg))
        candidate = _largest_biphasic_extremum(seg, baseline)
        if candidate is not None and abs(smooth[start + candidate] - baseline) >= P_MIN_AMPLITUDE_UV:
            peak = start + candidate
            break
        if start <= limit:
            break
        end -= step
    if peak is None:
        return None

    bounds = _wave_bounds_around_peak(
        smooth,
        peak,
        fs,
        config.slope_threshold_fraction,
        region=(max(limit, peak - width), min(qrs_onset, peak + width)),
    )
    if bounds is None:
        return None
    onset, offset = bounds
    offset = min(offset, qrs_onset)
    if not onset < peak < offset:
        return None
    return onset, peak, offset


def t_search_window(
    qrs_offset: int, rr_ms: float, fs: float, config: DelineationConfig | None = None
) -> tuple[int, int]:
    """RR-adaptive T search span: [offset+40 ms, offset + fraction * RR)."""
    config = config or DelineationConfig()
    start = qrs_offset + _ms_to_samples(T_GAP_AFTER_QRS_MS, fs)
    end = qrs_offset + _ms_to_samples(config.t_window_fraction_of_rr * rr_ms, fs)
    return start, end


def delineate_t(
    x_uv: np.ndarray,
    qrs_offset: int,
    rr_ms: float,
    fs: float,
    config: DelineationConfig | None = None,
) -> tuple[int, int, int] | None:
    """T onset/peak/offset inside the RR-adaptive window; the slope threshold
    adapts to the T wave's own maximum slope. Absent below the 50 uV floor."""
    config = config or DelineationConfig()
    start, end = t_search_window(qrs_offset, rr_ms, fs, config)
    start = max(0, start)
    end = min(len(x_uv), end)
    if end - start < _ms_to_samples(40.0, fs):
        return None

    smooth = _smooth(x_uv, fs, SMOOTH_WINDOW_PT_MS)
    seg = smooth[start:end]
    baseline = float(np.median(seg))
    candidate = _largest_biphasic_extremum(seg, baseline)
    if candidate is None:
        return None
    peak = start + candidate
    if abs(smooth[peak] - baseline) < T_MIN_AMPLITUDE_UV:
        return None

    region_lo = max(qrs_offset + 1, peak - _ms_to_samples(250.0, fs))
    region_hi = min(len(x_uv), max(end, peak + _ms_to_samples(100.0, fs)))
    bounds = _wave_bounds_around_peak(
        smooth, peak, fs, config.slope_threshold_fraction, region=(region_lo, region_hi)
    )
    if bounds is None:
        return None
    onset, offset = bounds
    onset = max(onset, qrs_offset)
    if not onset < peak < offset:
        return None
    return onset, peak, offset


def _largest_biphasic_extremum(seg: np.ndarray, baseline: float) -> int | None:
    """Index (within seg) of the largest deviation that is a true extremum,
    i.e. the slope changes sign there (biphasic pattern)."""
    if len(seg) < 3:
        return None
    v = seg - baseline
    extrema = np.concatenate([kernels.local_maxima(v), kernels.local_maxima(-v)])
    if len(extrema) == 0:
        return None
    deviations = np.abs(v[extrema])
    return int(extrema[int(np.argmax(deviations))])


def _wave_bounds_around_peak(
    smooth: np.ndarray,
    peak: int,
    fs: float,
    slope_fraction: float,
    region: tuple[int, int],
) -> tuple[int, int] | None:
    lo = max(0, region[0])
    hi = min(len(smooth), region[1])
    if hi - lo < 3 or not lo <= peak < hi:
        return None
    slope = np.abs(np.gradient(smooth[lo:hi]) * fs)
    max_slope = float(slope.max())
    if max_slope <= 0:
        return None
    bridge = _ms_to_samples(QRS_SLOPE_GAP_BRIDGE_MS, fs)
    groups = _slope_groups(slope, slope_fraction * max_slope, bridge)
    group = _group_containing(groups, peak - lo)
    if group is None:
        return None
    onset = lo + max(group[0] - 1, 0)
    offset = lo + min(group[1] + 1, hi - lo - 1)
    return onset, offset


def aggregate_multilead(
    per_lead: dict[LeadId, BeatFiducials], config: DelineationConfig | None = None
) -> GlobalWaveBounds:
    """Global per-wave windows: reject per-lead onsets/offsets farther than
    k*MAD from the median, then take min onset and max offset of survivors."""
    config = config or DelineationConfig()
    k = config.outlier_mad_k

    def bounds_for(onset_attr: str, offset_attr: str) -> WaveBounds | None:
        onsets = [getattr(f, onset_attr) for f in per_lead.values() if getattr(f, onset_attr) is not None]
        offsets = [getattr(f, offset_attr) for f in per_lead.values() if getattr(f, offset_attr) is not None]
        if not onsets or not offsets:
            return None
        return WaveBounds(
            onset=min(mad_filter(onsets, k)), offset=max(mad_filter(offsets, k))
        )

    return GlobalWaveBounds(
        p=bounds_for("p_onset", "p_offset"),
        qrs=bounds_for("qrs_onset", "qrs_offset"),
        t=bounds_for("t_onset", "t_offset"),
    )


def mad_filter(values: Sequence[int | float], k: float) -> list[int | float]:
    """Values within k median-absolute-deviations of the median."""
    med = float(np.median(values))
    mad = float(np.median(np.abs(np.asarray(values, dtype=np.float64) - med)))
    kept = [v for v in values if abs(v - med) <= k * mad]
    return kept if kept else list(values)


def qrs_mask_from_peaks(peaks: Sequence[int], fs: float, n_samples: int) -> QrsRegionMask:
    """QRS-neighborhood intervals (+/- 60 ms around each R) for the EMG filter."""
    half = _ms_to_samples(QRS_MASK_HALF_WIDTH_MS, fs)
    intervals: list[tuple[int, int]] = []
    for r in sorted(int(p) for p in peaks):
        start, end = max(0, r - half), min(n_samples, r + half)
        if start >= end:
            continue
        if intervals and start <= intervals[-1][1]:
            intervals[-1] = (intervals[-1][0], max(end, intervals[-1][1]))
        else:
            intervals.append((start, end))
    return QrsRegionMask(tuple(intervals))


def _choose_detection_lead(signals: dict[LeadId, np.ndarray], fs: float) -> LeadId:
    swing = {}
    for lead in LIMB_LEADS:
        bp = _bandpass_qrs(signals[lead], fs)
        swing[lead] = float(bp.max() - bp.min())
    best = max(LIMB_LEADS, key=lambda lead: swing[lead])
    if swing[LeadId.II] >= DETECTION_LEAD_MIN_RATIO * swing[best]:
        return LeadId.II
    return best


def detect_with_filters(
    record: EcgRecord, filter_config: FilterConfig
) -> tuple[np.ndarray, dict[LeadId, np.ndarray], LeadId]:
    """Filter every lead and detect R peaks on the detection lead.

    When the EMG filter is enabled, a first-pass detection builds the QRS
    mask, the dynamic filter runs, and detection repeats on the result.
    Returns (peaks, filtered microvolt signals, detection lead).
    """
    fs = record.sample_rate_hz
    base = filter_config.without_emg()
    signals = {}
    for lead in LEAD_ORDER:
        x = record.lead_uv(lead)
        signals[lead] = apply_chain(x, fs, base) if base.any_enabled else x

    detection_lead = _choose_detection_lead(signals, fs)
    peaks = detect_r_peaks(signals[detection_lead], fs)

    if filter_config.emg_enabled and len(peaks):
        mask = qrs_mask_from_peaks(peaks, fs, record.duration_samples)
        signals = {lead: emg_dynamic_filter(sig, fs, mask) for lead, sig in signals.items()}
        peaks = detect_r_peaks(signals[detection_lead], fs)
    return peaks, signals, detection_lead


def measure(
    record: EcgRecord,
    config: DelineationConfig | None = None,
    filter_config: FilterConfig | None = None,
) -> MeasurementResult:
    """Full pipeline: preprocess, detect, refine, segment, classify, select
    the dominant beat, type and delineate it per lead, aggregate across
    leads and derive the global measurements."""
    config = config or DelineationConfig()
    filter_config = filter_config or FilterConfig()

    missing = [lead.value for lead in LEAD_ORDER if lead not in record.leads]
    if missing:
        raise InvalidRecordError(f"record is missing leads: {', '.join(missing)}")
    for lead in LEAD_ORDER:
        if len(record.leads[lead]) != record.duration_samples:
            raise InvalidRecordError(f"lead {lead.value} length mismatch")

    fs = record.sample_rate_hz
    n = record.duration_samples
    peaks, signals, detection_lead = detect_with_filters(record, filter_config)
    if len(peaks) == 0:
        raise UnmeasurableRecordError("unmeasurable record: no R peaks found")

    refine_window = _ms_to_samples(config.r_refine_window_ms, fs)
    refined = {
        lead: _refine_on_signal(signals[lead], peaks, refine_window) for lead in LEAD_ORDER
    }
    windows = segment_beats(peaks, fs, n)

    det_signal = signals[detection_lead]
    det_r = refined[detection_lead]
    features = []
    for k, window in enumerate(windows):
        prev_r = int(det_r[k - 1]) if k > 0 else None
        features.append(
            extract_beat_features(window, det_signal, fs, int(det_r[k]), prev_r, config)
        )
    labels = classify_beats(features)
    dominant = select_dominant_beat(labels, features)

    if len(peaks) >= 2:
        median_rr_ms = float(np.median(np.diff(peaks))) * 1000.0 / fs
    else:
        median_rr_ms = 1000.0

    dominant_window = windows[dominant]
    per_lead_dominant: dict[LeadId, BeatFiducials] = {}
    for lead in LEAD_ORDER:
        sig = signals[lead]
        r = int(refined[lead][dominant])
        per_lead_dominant[lead] = _delineate_dominant(
            sig, dominant_window, r, fs, config, labels[dominant], median_rr_ms
        )

    global_waves = aggregate_multilead(per_lead_dominant, config)
    measurements = _derive_measurements(global_waves, peaks, fs)

    fiducials: dict[LeadId, tuple[BeatFiducials, ...]] = {}
    for lead in LEAD_ORDER:
        beats = []
        for k in range(len(windows)):
            if k == dominant:
                beats.append(per_lead_dominant[lead])
            else:
                beats.append(
                    BeatFiducials(r_peak=int(refined[lead][k]), beat_label=labels[k])
                )
        fiducials[lead] = tuple(beats)

    return MeasurementResult(
        measurements=measurements,
        fiducials=fiducials,
        global_waves=global_waves,
        dominant_beat=dominant,
        beat_labels=tuple(labels),
        r_peaks=tuple(int(p) for p in peaks),
        detection_lead=detection_lead,
        config=config,
        filter_config=filter_config,
    )


def _delineate_dominant(
    sig: np.ndarray,
    window: tuple[int, int],
    r: int,
    fs: float,
    config: DelineationConfig,
    label: BeatLabel,
    rr_ms: float,
) -> BeatFiducials:
    bounds = delineate_qrs(window, sig, r, fs, config)
    seg = sig[bounds.onset : bounds.offset + 1]
    swing = float(seg.max() - seg.min()) if len(seg) else 0.0
    if bounds.low_confidence or swing < QRS_MIN_AMPLITUDE_UV:
        return BeatFiducials(r_peak=r, beat_label=label)

    deflections = find_qrs_deflections(sig, bounds.onset, bounds.offset, fs)
    try:
        qrs_type, subpeaks = type_qrs(deflections)
    except ValueError:
        return BeatFiducials(r_peak=r, beat_label=label)

    p = delineate_p(sig, bounds.onset, window[0], fs, config)
    t = delineate_t(sig, bounds.offset, rr_ms, fs, config)
    return BeatFiducials(
        p_onset=p[0] if p else None,
        p_peak=p[1] if p else None,
        p_offset=p[2] if p else None,
        qrs_onset=bounds.onset,
        q_peak=subpeaks["q"],
        r_peak=subpeaks["r"] if subpeaks["r"] is not None else r,
        s_peak=subpeaks["s"],
        r_prime_peak=subpeaks["r_prime"],
        qrs_offset=bounds.offset,
        t_onset=t[0] if t else None,
        t_peak=t[1] if t else None,
        t_offset=t[2] if t else None,
        beat_label=label,
        qrs_type=qrs_type,
    )


def _derive_measurements(
    waves: GlobalWaveBounds, peaks: np.ndarray, fs: float
) -> GlobalMeasurements:
    p_duration = pq = qt = qrs_duration = None
    if waves.p is not None:
        p_duration = _samples_to_ms(waves.p.offset - waves.p.onset, fs)
    if waves.qrs is not None:
        qrs_duration = _samples_to_ms(waves.qrs.offset - waves.qrs.onset, fs)
        if waves.p is not None:
            pq = _samples_to_ms(waves.qrs.onset - waves.p.onset, fs)
        if waves.t is not None:
            qt = _samples_to_ms(waves.t.offset - waves.qrs.onset, fs)
    heart_rate = None
    if len(peaks) >= 2:
        median_rr_ms = float(np.median(np.diff(peaks))) * 1000.0 / fs
        if median_rr_ms > 0:
            heart_rate = 60000.0 / median_rr_ms
    return GlobalMeasurements(
        p_duration_ms=p_duration,
        qrs_duration_ms=qrs_duration,
        pq_interval_ms=pq,
        qt_interval_ms=qt,
        heart_rate_bpm=heart_rate,
    )
