"""Frontal-plane electrical axis for P, QRS and T waves.

Automatic mode integrates the net wave area on two limb leads; manual mode
(the viewer's tool) uses clinician-picked baseline and peak values. Both
solve the same two-lead projection system.
"""

from __future__ import annotations

import math

import numpy as np

from .delineation import MeasurementResult, WaveBounds
from .model import AxisResult, EcgRecord, LeadId, LIMB_LEADS

LEAD_ANGLES_DEG: dict[LeadId, float] = {
    LeadId.I: 0.0,
    LeadId.II: 60.0,
    LeadId.III: 120.0,
    LeadId.aVR: -150.0,
    LeadId.aVL: -30.0,
    LeadId.aVF: 90.0,
}

DEFAULT_PAIR = (LeadId.I, LeadId.aVF)

BASELINE_WINDOW_MS = 20.0


def lead_angle_deg(lead: LeadId) -> float:
    """Frontal-plane direction of a limb lead."""
    try:
        return LEAD_ANGLES_DEG[lead]
    except KeyError:
        raise ValueError(f"lead {lead.value} has no frontal-plane vector") from None


def wrap_degrees(angle: float) -> float:
    """Wrap an angle into (-180, +180]."""
    wrapped = math.fmod(angle, 360.0)
    if wrapped > 180.0:
        wrapped -= 360.0
    elif wrapped <= -180.0:
        wrapped += 360.0
    return wrapped


def net_wave_amplitude(
    lead_signal_uv, window: tuple[int, int], baseline_uv: float, fs: float
) -> float:
    """Net signed area of a wave in uV*ms: sum of (sample - baseline) times
    the sample period over the half-open window."""
    x = np.asarray(lead_signal_uv, dtype=np.float64)
    lo, hi = window
    if not 0 <= lo < hi <= len(x):
        raise ValueError(f"empty or out-of-bounds wave window [{lo}, {hi})")
    period_ms = 1000.0 / fs
    return float(np.sum(x[lo:hi] - baseline_uv) * period_ms)


def frontal_axis(
    amp_a: float,
    amp_b: float,
    lead_a: LeadId = LeadId.I,
    lead_b: LeadId = LeadId.aVF,
) -> float:
    """Angle of the frontal vector whose projections onto the two limb leads
    equal the given amplitudes; degrees in (-180, +180]."""
    phi_a = math.radians(lead_angle_deg(lead_a))
    phi_b = math.radians(lead_angle_deg(lead_b))
    det = math.sin(phi_b - phi_a)
    if abs(det) < 1e-9:
        raise ValueError(f"leads {lead_a.value} and {lead_b.value} are parallel")
    if amp_a == 0 and amp_b == 0:
        raise ValueError("indeterminate axis: both amplitudes are zero")
    # Solve [cos(phi) sin(phi)] . (u, v) = amp for the frontal vector (u, v).
    u = (amp_a * math.sin(phi_b) - amp_b * math.sin(phi_a)) / det
    v = (amp_b * math.cos(phi_a) - amp_a * math.cos(phi_b)) / det
    return wrap_degrees(math.degrees(math.atan2(v, u)))


def manual_axis(
    baseline_a: float,
    peak_a: float,
    baseline_b: float,
    peak_b: float,
    lead_a: LeadId,
    lead_b: LeadId,
) -> float:
    """Axis from clinician-picked baseline and peak values on two limb leads."""
    return frontal_axis(peak_a - baseline_a, peak_b - baseline_b, lead_a, lead_b)


def compute_axes(
    record: EcgRecord,
    result: MeasurementResult,
    pair: tuple[LeadId, LeadId] = DEFAULT_PAIR,
) -> AxisResult:
    """P/QRS/T axes from net wave areas over the global wave windows of the
    dominant beat; waves absent from the delineation yield absent axes."""
    for lead in pair:
        if lead not in LIMB_LEADS:
            raise ValueError(f"axis pair must use limb leads, got {lead.value}")
    if pair[0] is pair[1]:
        raise ValueError("axis pair must use two distinct leads")

    fs = record.sample_rate_hz
    sig_a = record.lead_uv(pair[0])
    sig_b = record.lead_uv(pair[1])

    def axis_for(bounds: WaveBounds | None) -> float | None:
        if bounds is None:
            return None
        window = (bounds.onset, bounds.offset)
        if not 0 <= window[0] < window[1] <= len(sig_a):
            return None
        amp_a = net_wave_amplitude(sig_a, window, _baseline(sig_a, bounds.onset, fs), fs)
        amp_b = net_wave_amplitude(sig_b, window, _baseline(sig_b, bounds.onset, fs), fs)
        try:
            return frontal_axis(amp_a, amp_b, pair[0], pair[1])
        except ValueError:
            return None

    waves = result.global_waves
    return AxisResult(
        p_axis_deg=axis_for(waves.p),
        qrs_axis_deg=axis_for(waves.qrs),
        t_axis_deg=axis_for(waves.t),
    )


def _baseline(x: np.ndarray, onset: int, fs: float) -> float:
    w = max(1, int(round(BASELINE_WINDOW_MS * fs / 1000.0)))
    lo = max(0, onset - w)
    if lo == onset:
        return float(x[onset]) if len(x) else 0.0
    return float(np.mean(x[lo:onset]))
