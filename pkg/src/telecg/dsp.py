"""The viewer's filter bank.

High-pass, low-pass and notch are cascaded-biquad Butterworth/IIR designs
applied forward-backward (zero phase) with reflected padding, so fiducial
timing is not skewed. Baseline wander is removed by a two-stage median
baseline estimate, distinct from the high-pass. The EMG filter is a moving
average whose window width varies with distance from the QRS regions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage, signal

from . import kernels
from .model import EcgRecord, LeadId

MAINS_CHOICES = (50, 60)

# EMG dynamic filter geometry (ms): light smoothing inside QRS, heavy outside,
# linear half-width ramp over the transition band.
EMG_WINDOW_INSIDE_MS = 5.0
EMG_WINDOW_OUTSIDE_MS = 30.0
EMG_GUARD_MS = 20.0
EMG_TRANSITION_MS = 20.0

BASELINE_MEDIAN_STAGE1_MS = 200.0
BASELINE_MEDIAN_STAGE2_MS = 600.0

NOTCH_QUALITY = 30.0


@dataclass(frozen=True)
class FilterConfig:
    """Which filters run, and with what corner frequencies."""

    highpass_cutoff_hz: float = 0.8
    lowpass_cutoff_hz: float = 150.0
    mains_hz: int = 50
    emg_enabled: bool = False
    baseline_enabled: bool = True
    notch_enabled: bool = True
    highpass_enabled: bool = True
    lowpass_enabled: bool = True

    def __post_init__(self) -> None:
        if self.highpass_cutoff_hz <= 0 or self.lowpass_cutoff_hz <= 0:
            raise ValueError("cutoff frequencies must be positive")
        if self.highpass_cutoff_hz >= self.lowpass_cutoff_hz:
            raise ValueError("high-pass cutoff must lie below low-pass cutoff")
        if self.mains_hz not in MAINS_CHOICES:
            raise ValueError(f"mains_hz must be one of {MAINS_CHOICES}")

    @property
    def any_enabled(self) -> bool:
        return (
            self.baseline_enabled
            or self.highpass_enabled
            or self.notch_enabled
            or self.lowpass_enabled
            or self.emg_enabled
        )

    def without_emg(self) -> "FilterConfig":
        return replace(self, emg_enabled=False)


ALL_OFF = FilterConfig(
    emg_enabled=False,
    baseline_enabled=False,
    notch_enabled=False,
    highpass_enabled=False,
    lowpass_enabled=False,
)


def config_from_flags(
    hp: str = "on",
    lp: str = "on",
    notch: str = "50",
    baseline: str = "on",
    emg: str = "off",
) -> FilterConfig:
    """Build a FilterConfig from the flag vocabulary shared by the CLI and
    the service query parameters: hp/lp/baseline/emg take on|off, notch
    takes 50|60|off."""

    def on_off(name: str, value: str) -> bool:
        if value not in ("on", "off"):
            raise ValueError(f"{name} must be 'on' or 'off', got {value!r}")
        return value == "on"

    if notch not in ("50", "60", "off"):
        raise ValueError(f"notch must be '50', '60' or 'off', got {notch!r}")
    return FilterConfig(
        mains_hz=int(notch) if notch != "off" else 50,
        notch_enabled=notch != "off",
        highpass_enabled=on_off("hp", hp),
        lowpass_enabled=on_off("lp", lp),
        baseline_enabled=on_off("baseline", baseline),
        emg_enabled=on_off("emg", emg),
    )


@dataclass(frozen=True)
class QrsRegionMask:
    """Half-open sample intervals marking QRS neighborhoods."""

    intervals: tuple[tuple[int, int], ...]

    def validate(self, n_samples: int) -> None:
        prev_end = 0
        for start, end in self.intervals:
            if not 0 <= start < end <= n_samples:
                raise ValueError(f"mask interval [{start}, {end}) out of bounds 0..{n_samples}")
            if start < prev_end:
                raise ValueError("mask intervals must be sorted and non-overlapping")
            prev_end = end


def _as_signal(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValueError("signal must be a non-empty 1-D sequence")
    return arr


def _zero_phase(b: np.ndarray, a: np.ndarray, x: np.ndarray, settle_samples: int) -> np.ndarray:
    padlen = int(min(len(x) - 1, max(3 * (max(len(a), len(b)) - 1), settle_samples)))
    return signal.filtfilt(b, a, x, padlen=padlen)


def highpass(x, fs: float, cutoff: float = 0.8) -> np.ndarray:
    """Remove DC/baseline content below ``cutoff`` (2nd-order, zero phase)."""
    x = _as_signal(x)
    if cutoff <= 0 or fs <= 2 * cutoff:
        raise ValueError(f"high-pass cutoff {cutoff} Hz invalid for fs {fs} Hz")
    b, a = signal.butter(2, cutoff, btype="highpass", fs=fs)
    return _zero_phase(b, a, x, settle_samples=round(2 * fs / cutoff))


def lowpass(x, fs: float, cutoff: float = 150.0) -> np.ndarray:
    """Remove motion/high-frequency content above ``cutoff`` (4th-order, zero phase)."""
    x = _as_signal(x)
    if cutoff <= 0 or fs <= 2 * cutoff:
        raise ValueError(f"low-pass cutoff {cutoff} Hz invalid for fs {fs} Hz")
    b, a = signal.butter(4, cutoff, btype="lowpass", fs=fs)
    return _zero_phase(b, a, x, settle_samples=round(4 * fs / cutoff))


def notch(x, fs: float, mains: int) -> np.ndarray:
    """Suppress the power-line component at ``mains`` Hz (Q=30, zero phase)."""
    x = _as_signal(x)
    if mains not in MAINS_CHOICES:
        raise ValueError(f"mains must be one of {MAINS_CHOICES}, got {mains}")
    if fs <= 2 * mains:
        raise ValueError(f"mains {mains} Hz invalid for fs {fs} Hz")
    b, a = signal.iirnotch(mains, NOTCH_QUALITY, fs=fs)
    bandwidth = mains / NOTCH_QUALITY
    return _zero_phase(b, a, x, settle_samples=round(2 * fs / bandwidth))


def remove_baseline_wander(x, fs: float) -> np.ndarray:
    """Subtract a two-stage median baseline estimate (200 ms then 600 ms)."""
    x = _as_signal(x)
    if len(x) < fs:
        raise ValueError("baseline removal needs at least 1 s of signal")
    w1 = _odd(round(BASELINE_MEDIAN_STAGE1_MS * fs / 1000.0))
    w2 = _odd(round(BASELINE_MEDIAN_STAGE2_MS * fs / 1000.0))
    baseline = ndimage.median_filter(x, size=w1, mode="reflect")
    baseline = ndimage.median_filter(baseline, size=w2, mode="reflect")
    return x - baseline


def _odd(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def emg_half_widths(n_samples: int, fs: float, mask: QrsRegionMask) -> np.ndarray:
    """Per-sample smoothing half widths for the dynamic EMG filter."""
    h_in = max(1, round(EMG_WINDOW_INSIDE_MS * fs / 1000.0 / 2))
    h_out = max(h_in, round(EMG_WINDOW_OUTSIDE_MS * fs / 1000.0 / 2))
    guard = round(EMG_GUARD_MS * fs / 1000.0)
    transition = max(1, round(EMG_TRANSITION_MS * fs / 1000.0))

    protected = np.zeros(n_samples, dtype=bool)
    for start, end in mask.intervals:
        protected[max(0, start - guard) : min(n_samples, end + guard)] = True
    if not protected.any():
        return np.full(n_samples, h_out, dtype=np.int64)
    dist = ndimage.distance_transform_cdt(~protected)
    ramp = np.minimum(dist / transition, 1.0)
    return np.rint(h_in + (h_out - h_in) * ramp).astype(np.int64)


def emg_dynamic_filter(x, fs: float, qrs_mask: QrsRegionMask) -> np.ndarray:
    """Variable-strength smoothing: gentle inside QRS regions, strong outside."""
    x = _as_signal(x)
    qrs_mask.validate(len(x))
    half = emg_half_widths(len(x), fs, qrs_mask)
    return kernels.variable_window_mean(x, half)


def apply_chain(x, fs: float, config: FilterConfig, qrs_mask: QrsRegionMask | None = None) -> np.ndarray:
    """Run the enabled filters in fixed order: baseline, HP, notch, LP, EMG."""
    x = _as_signal(x)
    if config.baseline_enabled:
        x = remove_baseline_wander(x, fs)
    if config.highpass_enabled:
        x = highpass(x, fs, config.highpass_cutoff_hz)
    if config.notch_enabled:
        x = notch(x, fs, config.mains_hz)
    if config.lowpass_enabled:
        x = lowpass(x, fs, config.lowpass_cutoff_hz)
    if config.emg_enabled and qrs_mask is not None:
        x = emg_dynamic_filter(x, fs, qrs_mask)
    return x


def preprocess(
    record: EcgRecord, config: FilterConfig, qrs_mask: QrsRegionMask | None = None
) -> EcgRecord:
    """Filter every lead of a record; metadata is unchanged.

    The EMG stage is skipped when no mask is supplied. With nothing enabled
    the record is returned untouched (sample-identical).
    """
    if config.lowpass_enabled and record.sample_rate_hz <= 2 * config.lowpass_cutoff_hz:
        raise ValueError("low-pass cutoff must lie below the Nyquist frequency")
    effective_emg = config.emg_enabled and qrs_mask is not None
    if not (
        config.baseline_enabled
        or config.highpass_enabled
        or config.notch_enabled
        or config.lowpass_enabled
        or effective_emg
    ):
        return record

    lo = -(1 << (record.resolution_bits - 1))
    hi = (1 << (record.resolution_bits - 1)) - 1
    filtered: dict[LeadId, np.ndarray] = {}
    for lead, counts in record.leads.items():
        y = apply_chain(counts.astype(np.float64), record.sample_rate_hz, config, qrs_mask)
        filtered[lead] = np.clip(np.rint(y), lo, hi).astype(np.int32)
    return EcgRecord(
        device_id=record.device_id,
        ambulance_id=record.ambulance_id,
        recorded_at=record.recorded_at,
        sample_rate_hz=record.sample_rate_hz,
        resolution_bits=record.resolution_bits,
        lsb_nanovolts=record.lsb_nanovolts,
        duration_samples=record.duration_samples,
        leads=filtered,
    )
