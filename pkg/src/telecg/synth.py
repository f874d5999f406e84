"""Dipole-model synthetic 12-lead records with embedded ground truth.

A frontal-plane dipole time series (raised-cosine P, Q/R/S and T lobes with
specified timings and axes) is projected onto the six limb-lead directions;
precordial leads are fixed mixtures of leads I and II. The paired annotation
carries the exact generating values, which makes the corpus a desk-scale
stand-in for licensed reference databases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .evaluation import ReferenceAnnotation, save_annotation
from .model import (
    DEFAULT_LSB_NANOVOLTS,
    EcgRecord,
    LeadId,
    LEAD_ORDER,
    STANDARD_RESOLUTION_BITS,
    STANDARD_SAMPLE_RATE_HZ,
)
from .wire import encode_batch

NOISE_KINDS = ("none", "mains50", "baseline", "emg")

# Sub-wave geometry relative to the QRS complex: (start, width, amplitude)
# as fractions of QRS duration and R amplitude.
QRS_LOBES = (
    (0.00, 0.20, -0.15),  # Q
    (0.15, 0.50, +1.00),  # R
    (0.65, 0.35, -0.25),  # S
)
R_PEAK_FRACTION = 0.40  # R lobe center within the QRS

T_WIDTH_MS = 160.0
BASELINE_DRIFT_HZ = 0.3

FIRST_BEAT_LEAD_IN_S = 0.05

# Precordial leads as (coefficient on I, coefficient on II) mixtures.
PRECORDIAL_MIX: dict[LeadId, tuple[float, float]] = {
    LeadId.V1: (0.10, -0.50),
    LeadId.V2: (0.05, -0.25),
    LeadId.V3: (0.25, 0.05),
    LeadId.V4: (0.45, 0.35),
    LeadId.V5: (0.70, 0.50),
    LeadId.V6: (0.80, 0.35),
}

LIMB_ANGLES_DEG: dict[LeadId, float] = {
    LeadId.I: 0.0,
    LeadId.II: 60.0,
    LeadId.III: 120.0,
    LeadId.aVR: -150.0,
    LeadId.aVL: -30.0,
    LeadId.aVF: 90.0,
}

SYNTH_EPOCH = datetime(2026, 1, 1, 0, 0, 0, tzinfo=timezone.utc)


@dataclass(frozen=True)
class SynthSpec:
    """Generation parameters; durations in ms, axes in degrees."""

    bpm: float = 72.0
    p_duration_ms: float = 100.0
    pq_ms: float = 160.0
    qrs_ms: float = 90.0
    qt_ms: float = 380.0
    qrs_axis_deg: float = 60.0
    t_axis_deg: float = 45.0
    p_axis_deg: float = 60.0
    noise: str = "none"
    snr_db: float = 10.0
    p_amplitude_uv: float = 150.0
    qrs_amplitude_uv: float = 1200.0
    t_amplitude_uv: float = 400.0
    duration_s: float = 10.0
    device_id: str = "SYNTH-DEV-01"
    ambulance_id: str = "SYNTH-AMB-01"

    def __post_init__(self) -> None:
        if self.noise not in NOISE_KINDS:
            raise ValueError(f"noise must be one of {NOISE_KINDS}, got {self.noise!r}")
        if self.bpm <= 0 or self.duration_s <= 0:
            raise ValueError("bpm and duration must be positive")
        if self.pq_ms <= self.p_duration_ms:
            raise ValueError(
                f"unorderable spec: pq ({self.pq_ms} ms) must exceed P duration ({self.p_duration_ms} ms)"
            )
        if self.qt_ms <= self.qrs_ms:
            raise ValueError(
                f"unorderable spec: qt ({self.qt_ms} ms) must exceed QRS duration ({self.qrs_ms} ms)"
            )


def _raised_cosine(t: np.ndarray, start_s: float, width_s: float, amplitude: float) -> np.ndarray:
    """One smooth lobe: 0 outside [start, start+width), amplitude at center."""
    phase = (t - start_s) / width_s
    active = (phase >= 0.0) & (phase < 1.0)
    lobe = np.zeros_like(t)
    lobe[active] = 0.5 * amplitude * (1.0 - np.cos(2.0 * math.pi * phase[active]))
    return lobe


def beat_qrs_onsets(spec: SynthSpec) -> list[float]:
    """QRS-onset times (s) of every beat whose full P..T span fits."""
    rr_s = 60.0 / spec.bpm
    first = spec.pq_ms / 1000.0 + FIRST_BEAT_LEAD_IN_S
    onsets = []
    t = first
    while t + spec.qt_ms / 1000.0 <= spec.duration_s:
        onsets.append(t)
        t += rr_s
    return onsets


def true_r_peaks(spec: SynthSpec, fs: int = STANDARD_SAMPLE_RATE_HZ) -> list[int]:
    """Ground-truth R sample indices implied by the lobe geometry."""
    r_offset_s = R_PEAK_FRACTION * spec.qrs_ms / 1000.0
    return [int(round((onset + r_offset_s) * fs)) for onset in beat_qrs_onsets(spec)]


def _dipole(spec: SynthSpec, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = np.zeros_like(t)
    dy = np.zeros_like(t)

    def add(start_s: float, width_s: float, amplitude_uv: float, axis_deg: float) -> None:
        nonlocal dx, dy
        lobe = _raised_cosine(t, start_s, width_s, amplitude_uv)
        theta = math.radians(axis_deg)
        dx += lobe * math.cos(theta)
        dy += lobe * math.sin(theta)

    qrs_s = spec.qrs_ms / 1000.0
    t_width_s = min(T_WIDTH_MS, max(20.0, 0.8 * (spec.qt_ms - spec.qrs_ms - 40.0))) / 1000.0
    for onset in beat_qrs_onsets(spec):
        if spec.p_amplitude_uv > 0:
            add(
                onset - spec.pq_ms / 1000.0,
                spec.p_duration_ms / 1000.0,
                spec.p_amplitude_uv,
                spec.p_axis_deg,
            )
        for lobe_start, lobe_width, lobe_amp in QRS_LOBES:
            add(
                onset + lobe_start * qrs_s,
                lobe_width * qrs_s,
                lobe_amp * spec.qrs_amplitude_uv,
                spec.qrs_axis_deg,
            )
        if spec.t_amplitude_uv > 0:
            add(
                onset + spec.qt_ms / 1000.0 - t_width_s,
                t_width_s,
                spec.t_amplitude_uv,
                spec.t_axis_deg,
            )
    return dx, dy


def _add_noise(
    leads_uv: dict[LeadId, np.ndarray], spec: SynthSpec, t: np.ndarray, rng: np.random.Generator
) -> None:
    if spec.noise == "none":
        return
    gain = 10.0 ** (-spec.snr_db / 20.0)
    if spec.noise == "mains50":
        phase = rng.uniform(0.0, 2.0 * math.pi)
        carrier = np.sin(2.0 * math.pi * 50.0 * t + phase)
    elif spec.noise == "baseline":
        phase = rng.uniform(0.0, 2.0 * math.pi)
        carrier = np.sin(2.0 * math.pi * BASELINE_DRIFT_HZ * t + phase)
    else:
        carrier = None
    for lead, x in leads_uv.items():
        rms = float(np.sqrt(np.mean(x * x)))
        if rms == 0.0:
            continue
        if carrier is not None:
            x += math.sqrt(2.0) * rms * gain * carrier
        else:  # emg: broadband noise
            x += rng.normal(0.0, rms * gain, size=len(x))


def synth_record(spec: SynthSpec, seed: int = 0) -> tuple[EcgRecord, ReferenceAnnotation]:
    """Generate one record and its exact ground-truth annotation."""
    fs = STANDARD_SAMPLE_RATE_HZ
    n = int(round(spec.duration_s * fs))
    t = np.arange(n, dtype=np.float64) / fs
    dx, dy = _dipole(spec, t)

    leads_uv: dict[LeadId, np.ndarray] = {}
    for lead, angle in LIMB_ANGLES_DEG.items():
        theta = math.radians(angle)
        leads_uv[lead] = dx * math.cos(theta) + dy * math.sin(theta)
    for lead, (ci, cii) in PRECORDIAL_MIX.items():
        leads_uv[lead] = ci * leads_uv[LeadId.I] + cii * leads_uv[LeadId.II]

    rng = np.random.default_rng(seed)
    _add_noise(leads_uv, spec, t, rng)

    lsb = DEFAULT_LSB_NANOVOLTS
    lo = -(1 << (STANDARD_RESOLUTION_BITS - 1))
    hi = (1 << (STANDARD_RESOLUTION_BITS - 1)) - 1
    counts = {
        lead: np.clip(np.rint(x * 1000.0 / lsb), lo, hi).astype(np.int32)
        for lead, x in leads_uv.items()
    }

    record = EcgRecord(
        device_id=spec.device_id,
        ambulance_id=spec.ambulance_id,
        recorded_at=SYNTH_EPOCH,
        sample_rate_hz=fs,
        resolution_bits=STANDARD_RESOLUTION_BITS,
        lsb_nanovolts=lsb,
        duration_samples=n,
        leads=counts,
    )
    annotation = ReferenceAnnotation(
        record_id="synthetic",
        p_duration_ms=spec.p_duration_ms if spec.p_amplitude_uv > 0 else None,
        qrs_duration_ms=spec.qrs_ms,
        pq_interval_ms=spec.pq_ms if spec.p_amplitude_uv > 0 else None,
        qt_interval_ms=spec.qt_ms if spec.t_amplitude_uv > 0 else None,
        p_axis_deg=spec.p_axis_deg if spec.p_amplitude_uv > 0 else None,
        qrs_axis_deg=spec.qrs_axis_deg,
        t_axis_deg=spec.t_axis_deg if spec.t_amplitude_uv > 0 else None,
        r_peak_samples=tuple(true_r_peaks(spec, fs)),
    )
    return record, annotation


def random_spec(rng: np.random.Generator, noise: str = "none", snr_db: float = 10.0) -> SynthSpec:
    """A physiologically plausible random generation spec."""
    bpm = rng.uniform(55.0, 90.0)
    p = rng.uniform(80.0, 120.0)
    pq = p + rng.uniform(50.0, 100.0)
    qrs = rng.uniform(70.0, 110.0)
    rr = 60000.0 / bpm
    qt_hi = min(440.0, rr - pq - 80.0)
    qt_lo = qrs + 240.0
    qt = rng.uniform(qt_lo, max(qt_lo + 1.0, qt_hi))
    qrs_axis = rng.uniform(-30.0, 100.0)
    return SynthSpec(
        bpm=bpm,
        p_duration_ms=p,
        pq_ms=pq,
        qrs_ms=qrs,
        qt_ms=qt,
        qrs_axis_deg=qrs_axis,
        t_axis_deg=qrs_axis + rng.uniform(-30.0, 30.0),
        p_axis_deg=rng.uniform(30.0, 75.0),
        noise=noise,
        snr_db=snr_db,
        p_amplitude_uv=rng.uniform(120.0, 220.0),
        qrs_amplitude_uv=rng.uniform(900.0, 1800.0),
        t_amplitude_uv=rng.uniform(250.0, 500.0),
    )


def build_corpus(
    records_dir: str | Path,
    refs_dir: str | Path,
    count: int = 50,
    seed: int = 1,
    noise: str = "none",
    snr_db: float = 10.0,
) -> list[str]:
    """Write a corpus of record files and matching annotations; returns ids."""
    records_dir, refs_dir = Path(records_dir), Path(refs_dir)
    records_dir.mkdir(parents=True, exist_ok=True)
    refs_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    ids = []
    for i in range(count):
        record_id = f"synth-{i:03d}"
        spec = random_spec(rng, noise=noise, snr_db=snr_db)
        record, annotation = synth_record(spec, seed=seed + i)
        annotation = replace(annotation, record_id=record_id)
        (records_dir / f"{record_id}.tvb").write_bytes(encode_batch(record))
        save_annotation(annotation, refs_dir / f"{record_id}.json")
        ids.append(record_id)
    return ids
