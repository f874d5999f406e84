"""Domain types shared by every stage: leads, records, vitals, fiducials."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping

import numpy as np


class LeadId(enum.Enum):
    """The 12 standard ECG leads."""

    I = "I"
    II = "II"
    III = "III"
    aVR = "aVR"
    aVL = "aVL"
    aVF = "aVF"
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"
    V4 = "V4"
    V5 = "V5"
    V6 = "V6"

    @classmethod
    def from_name(cls, name: str) -> "LeadId":
        for lead in cls:
            if lead.value.upper() == name.upper():
                return lead
        raise ValueError(f"unknown lead name: {name!r}")


LEAD_ORDER: tuple[LeadId, ...] = tuple(LeadId)
LIMB_LEADS: tuple[LeadId, ...] = (
    LeadId.I,
    LeadId.II,
    LeadId.III,
    LeadId.aVR,
    LeadId.aVL,
    LeadId.aVF,
)


class BeatLabel(enum.IntEnum):
    """Beat classes: normal, normal-with-short-RR before an abnormal, abnormal."""

    NORMAL = 0
    NORMAL_SHORT_RR = 1
    ABNORMAL = 2


class QrsType(enum.Enum):
    """The six QRS morphology types."""

    RSR_PRIME = "RSR'"
    QR = "QR"
    QRS = "QRS"
    RS = "RS"
    R = "R"
    QS = "QS"


@dataclass(frozen=True)
class EcgRecord:
    """One 12-lead recording with scaling metadata and routing identifiers.

    Samples are raw ADC counts (signed, ``resolution_bits`` wide) stored in
    int32 arrays; ``lsb_nanovolts`` is the physical value of one count.
    Carries no patient demographics by construction.
    """

    device_id: str
    ambulance_id: str
    recorded_at: datetime
    sample_rate_hz: int
    resolution_bits: int
    lsb_nanovolts: int
    duration_samples: int
    leads: Mapping[LeadId, np.ndarray]

    def __post_init__(self) -> None:
        frozen = {}
        for lead, samples in self.leads.items():
            arr = np.asarray(samples, dtype=np.int32)
            arr.setflags(write=False)
            frozen[lead] = arr
        object.__setattr__(self, "leads", frozen)

    def lead_uv(self, lead: LeadId) -> np.ndarray:
        """Samples of one lead converted to microvolts (float64)."""
        return counts_to_microvolts(self.leads[lead], self.lsb_nanovolts)

    @property
    def duration_seconds(self) -> float:
        return self.duration_samples / self.sample_rate_hz


@dataclass(frozen=True)
class VitalSigns:
    """Heart rate and non-invasive blood pressure travelling with a record."""

    heart_rate_bpm: float | None = None
    nibp_systolic_mmhg: float | None = None
    nibp_diastolic_mmhg: float | None = None
    nibp_mean_mmhg: float | None = None

    def __post_init__(self) -> None:
        for name in (
            "heart_rate_bpm",
            "nibp_systolic_mmhg",
            "nibp_diastolic_mmhg",
            "nibp_mean_mmhg",
        ):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        sys_, dia = self.nibp_systolic_mmhg, self.nibp_diastolic_mmhg
        if sys_ is not None and dia is not None and sys_ < dia:
            raise ValueError(f"systolic {sys_} below diastolic {dia}")


@dataclass(frozen=True)
class BeatFiducials:
    """Per-beat landmark sample indices for one lead; absent points are None."""

    p_onset: int | None = None
    p_peak: int | None = None
    p_offset: int | None = None
    qrs_onset: int | None = None
    q_peak: int | None = None
    r_peak: int | None = None
    s_peak: int | None = None
    r_prime_peak: int | None = None
    qrs_offset: int | None = None
    t_onset: int | None = None
    t_peak: int | None = None
    t_offset: int | None = None
    beat_label: BeatLabel | None = None
    qrs_type: QrsType | None = None

    _ORDERED = (
        "p_onset",
        "p_peak",
        "p_offset",
        "qrs_onset",
        "qrs_offset",
        "t_onset",
        "t_peak",
        "t_offset",
    )
    # Consecutive pairs that may coincide (offset touching the next onset).
    _TIES = {("p_offset", "qrs_onset"), ("qrs_offset", "t_onset")}

    def ordering_violations(self, duration_samples: int | None = None) -> list[str]:
        """Names of ordering/bounds rules this beat violates (empty if none)."""
        problems = []
        present = [(n, getattr(self, n)) for n in self._ORDERED if getattr(self, n) is not None]
        for (name_a, idx_a), (name_b, idx_b) in zip(present, present[1:]):
            ok = idx_a <= idx_b if (name_a, name_b) in self._TIES else idx_a < idx_b
            if not ok:
                problems.append(f"{name_a} !< {name_b} ({idx_a} vs {idx_b})")
        if duration_samples is not None:
            for name, idx in present:
                if not 0 <= idx < duration_samples:
                    problems.append(f"{name} out of record bounds: {idx}")
        return problems


FiducialSet = Mapping[LeadId, tuple[BeatFiducials, ...]]
"""Delineation output: per lead, one BeatFiducials per detected beat."""


@dataclass(frozen=True)
class GlobalMeasurements:
    """Multi-lead global durations and intervals in milliseconds."""

    p_duration_ms: float | None = None
    qrs_duration_ms: float | None = None
    pq_interval_ms: float | None = None
    qt_interval_ms: float | None = None
    heart_rate_bpm: float | None = None


@dataclass(frozen=True)
class AxisResult:
    """Frontal-plane axes in degrees, range (-180, +180]."""

    p_axis_deg: float | None = None
    qrs_axis_deg: float | None = None
    t_axis_deg: float | None = None


@dataclass(frozen=True)
class Violation:
    """One failed record invariant; data, not an exception."""

    field: str
    rule: str
    message: str


STANDARD_SAMPLE_RATE_HZ = 500
STANDARD_RESOLUTION_BITS = 24
DEFAULT_LSB_NANOVOLTS = 1000  # 1 uV per count


def to_microvolts(sample: int, lsb_nanovolts: int) -> float:
    """Physical value of one raw count in microvolts."""
    return sample * lsb_nanovolts / 1000.0


def counts_to_microvolts(samples: np.ndarray, lsb_nanovolts: int) -> np.ndarray:
    """Vectorized count-to-microvolt conversion.

    The integer product is formed first so that rescaling a record (samples
    times k, lsb divided by k) yields bit-identical microvolt arrays.
    """
    return np.asarray(samples, dtype=np.float64) * float(lsb_nanovolts) / 1000.0


def validate_record(record: EcgRecord) -> list[Violation]:
    """Check every record invariant; returns an empty list iff all hold."""
    violations: list[Violation] = []

    def add(field_name: str, rule: str, message: str) -> None:
        violations.append(Violation(field_name, rule, message))

    for name, value in (
        ("sample_rate_hz", record.sample_rate_hz),
        ("resolution_bits", record.resolution_bits),
        ("lsb_nanovolts", record.lsb_nanovolts),
        ("duration_samples", record.duration_samples),
    ):
        if not isinstance(value, (int, np.integer)) or value <= 0:
            add(name, "positive-integer", f"{name} must be a positive integer, got {value!r}")

    if record.recorded_at.tzinfo is None or record.recorded_at.utcoffset().total_seconds() != 0:
        add("recorded_at", "utc-timestamp", "recorded_at must be timezone-aware UTC")

    missing = [lead.value for lead in LEAD_ORDER if lead not in record.leads]
    for name in missing:
        add("leads", "all-leads-present", f"lead {name} missing")
    extra = [lead for lead in record.leads if lead not in LEAD_ORDER]
    for lead in extra:
        add("leads", "all-leads-present", f"unexpected lead entry {lead!r}")

    if violations:
        # Structural problems first; the sample checks below assume sane metadata.
        structural = {v.rule for v in violations}
        if "positive-integer" in structural or missing or extra:
            return violations

    lo = -(1 << (record.resolution_bits - 1))
    hi = (1 << (record.resolution_bits - 1)) - 1
    for lead in LEAD_ORDER:
        samples = record.leads[lead]
        if len(samples) != record.duration_samples:
            add(
                "leads",
                "lead-length",
                f"lead {lead.value} has {len(samples)} samples, expected {record.duration_samples}",
            )
            continue
        if len(samples) and (samples.min() < lo or samples.max() > hi):
            add(
                "leads",
                "sample-range",
                f"lead {lead.value} has samples outside signed {record.resolution_bits}-bit range",
            )

    if record.sample_rate_hz != STANDARD_SAMPLE_RATE_HZ:
        add(
            "sample_rate_hz",
            "nonstandard-sample-rate",
            f"expected {STANDARD_SAMPLE_RATE_HZ} Hz, got {record.sample_rate_hz}",
        )
    if record.resolution_bits != STANDARD_RESOLUTION_BITS:
        add(
            "resolution_bits",
            "nonstandard-resolution",
            f"expected {STANDARD_RESOLUTION_BITS} bits, got {record.resolution_bits}",
        )
    return violations


def utc_now_seconds() -> datetime:
    """Current UTC time truncated to whole seconds."""
    return datetime.now(timezone.utc).replace(microsecond=0)
