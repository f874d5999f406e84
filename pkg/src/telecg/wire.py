"""Tag-value batch codec: the wire format and the on-disk record format.

One batch is UTF-8 lines of ``TAG=VALUE`` carrying a record's header fields,
optional vital signs and one base64 block of little-endian int32 samples per
lead. Wire and disk forms are byte-identical. Patient demographics are
structurally impossible: the forbidden tag set is rejected at decode.
"""

from __future__ import annotations

import base64
import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import CodecError, DemographicsForbiddenError
from .model import EcgRecord, LeadId, LEAD_ORDER, VitalSigns, validate_record, Violation

PROTO_VERSION = "1"
CONTENT_TYPE = "application/x-telecg-batch"

TAG_PATTERN = re.compile(r"^[A-Z][A-Z0-9_.]*$")

FORBIDDEN_TAGS = frozenset({"NAME", "DOB", "SEX", "ADDRESS", "NATIONAL_ID"})
FORBIDDEN_PREFIX = "PATIENT_"

_HEADER_TAGS = (
    "PROTO",
    "DEVICE_ID",
    "AMBULANCE_ID",
    "REC_TIME",
    "FS",
    "RES_BITS",
    "LSB_NV",
    "NSAMP",
)
_VITALS_TAGS = ("HR", "NIBP_SYS", "NIBP_DIA", "NIBP_MAP")


def lead_tag(lead: LeadId) -> str:
    return f"LEAD.{lead.value.upper()}"


_LEAD_TAGS = tuple(lead_tag(lead) for lead in LEAD_ORDER)
MANDATORY_TAGS = _HEADER_TAGS + _LEAD_TAGS


def is_demographic_tag(tag: str) -> bool:
    return tag in FORBIDDEN_TAGS or tag.startswith(FORBIDDEN_PREFIX)


@dataclass(frozen=True)
class TagValueBatch:
    """Ordered (tag, value) pairs of one batch."""

    pairs: tuple[tuple[str, str], ...]

    def validate(self) -> None:
        seen: set[str] = set()
        for tag, value in self.pairs:
            if not TAG_PATTERN.match(tag):
                raise CodecError(f"malformed tag {tag!r}")
            if is_demographic_tag(tag):
                raise DemographicsForbiddenError(tag)
            if tag in seen:
                raise CodecError(f"duplicate tag {tag}")
            seen.add(tag)
            if "\n" in value or "\r" in value:
                raise CodecError(f"value of {tag} contains a line break")
        for tag in MANDATORY_TAGS:
            if tag not in seen:
                raise CodecError(f"missing mandatory tag {tag}")

    def to_bytes(self) -> bytes:
        self.validate()
        return "".join(f"{tag}={value}\n" for tag, value in self.pairs).encode("utf-8")


@dataclass(frozen=True)
class DecodedBatch:
    """Decode result: the record, optional vitals, unknown-tag extras and
    soft validation flags (e.g. nonstandard sample rate)."""

    record: EcgRecord
    vitals: VitalSigns | None
    extras: dict[str, str] = field(default_factory=dict)
    flags: list[Violation] = field(default_factory=list)

    def __iter__(self):
        return iter((self.record, self.vitals))


def _format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def _format_time(moment: datetime) -> str:
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_time(text: str) -> datetime:
    try:
        return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    except ValueError as exc:
        raise CodecError(f"malformed REC_TIME {text!r}: {exc}") from None


def _encode_samples(samples: np.ndarray) -> str:
    return base64.b64encode(np.asarray(samples, dtype="<i4").tobytes()).decode("ascii")


def _decode_samples(tag: str, value: str, expected: int) -> np.ndarray:
    try:
        raw = base64.b64decode(value, validate=True)
    except Exception as exc:
        raise CodecError(f"malformed base64 in {tag}: {exc}") from None
    if len(raw) % 4 != 0:
        raise CodecError(f"sample block of {tag} is not a whole number of int32 values")
    samples = np.frombuffer(raw, dtype="<i4").astype(np.int32)
    if len(samples) != expected:
        raise CodecError(
            f"length mismatch on {tag.removeprefix('LEAD.')}: got {len(samples)} samples, NSAMP says {expected}"
        )
    return samples


def build_batch(record: EcgRecord, vitals: VitalSigns | None = None) -> TagValueBatch:
    """Canonically ordered tag-value pairs for a record and optional vitals."""
    structural = [
        v
        for v in validate_record(record)
        if v.rule not in ("nonstandard-sample-rate", "nonstandard-resolution")
    ]
    if structural:
        raise CodecError(f"record invalid: {structural[0].message}")

    pairs: list[tuple[str, str]] = [
        ("PROTO", PROTO_VERSION),
        ("DEVICE_ID", record.device_id),
        ("AMBULANCE_ID", record.ambulance_id),
        ("REC_TIME", _format_time(record.recorded_at)),
        ("FS", str(record.sample_rate_hz)),
        ("RES_BITS", str(record.resolution_bits)),
        ("LSB_NV", str(record.lsb_nanovolts)),
        ("NSAMP", str(record.duration_samples)),
        ("LEADS", ",".join(lead.value for lead in LEAD_ORDER)),
    ]
    if vitals is not None:
        for tag, value in (
            ("HR", vitals.heart_rate_bpm),
            ("NIBP_SYS", vitals.nibp_systolic_mmhg),
            ("NIBP_DIA", vitals.nibp_diastolic_mmhg),
            ("NIBP_MAP", vitals.nibp_mean_mmhg),
        ):
            if value is not None:
                pairs.append((tag, _format_number(value)))
    for lead in LEAD_ORDER:
        pairs.append((lead_tag(lead), _encode_samples(record.leads[lead])))
    return TagValueBatch(tuple(pairs))


def encode_batch(record: EcgRecord, vitals: VitalSigns | None = None) -> bytes:
    """Byte-deterministic tag-value encoding of one record plus vitals."""
    return build_batch(record, vitals).to_bytes()


def decode_batch(data: bytes) -> DecodedBatch:
    """Strict parse of a tag-value batch.

    Raises CodecError for missing/duplicate/malformed tags, base64 problems
    or sample-count mismatches, and DemographicsForbiddenError for any tag in
    the forbidden demographic set. Unknown benign tags land in extras.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CodecError(f"batch is not valid UTF-8: {exc}") from None
    if text.endswith("\n"):
        text = text[:-1]
    if not text:
        raise CodecError("empty batch")

    values: dict[str, str] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            raise CodecError(f"blank line at line {lineno}")
        if "=" not in line:
            raise CodecError(f"line {lineno} has no '=' separator")
        tag, value = line.split("=", 1)
        if not TAG_PATTERN.match(tag):
            raise CodecError(f"malformed tag {tag!r} at line {lineno}")
        if is_demographic_tag(tag):
            raise DemographicsForbiddenError(tag)
        if tag in values:
            raise CodecError(f"duplicate tag {tag}")
        values[tag] = value

    for tag in MANDATORY_TAGS:
        if tag not in values:
            raise CodecError(f"missing mandatory tag {tag}")

    def positive_int(tag: str) -> int:
        try:
            parsed = int(values[tag])
        except ValueError:
            raise CodecError(f"tag {tag} must be an integer, got {values[tag]!r}") from None
        if parsed <= 0:
            raise CodecError(f"tag {tag} must be positive, got {parsed}")
        return parsed

    if values["PROTO"] != PROTO_VERSION:
        raise CodecError(f"unsupported protocol version {values['PROTO']!r}")
    fs = positive_int("FS")
    res_bits = positive_int("RES_BITS")
    lsb_nv = positive_int("LSB_NV")
    nsamp = positive_int("NSAMP")
    recorded_at = _parse_time(values["REC_TIME"])

    if "LEADS" in values:
        expected = ",".join(lead.value for lead in LEAD_ORDER)
        if values["LEADS"] != expected:
            raise CodecError(f"unexpected lead list {values['LEADS']!r}")

    leads = {
        lead: _decode_samples(lead_tag(lead), values[lead_tag(lead)], nsamp)
        for lead in LEAD_ORDER
    }

    def optional_number(tag: str) -> float | None:
        if tag not in values:
            return None
        try:
            return float(values[tag])
        except ValueError:
            raise CodecError(f"tag {tag} must be numeric, got {values[tag]!r}") from None

    vitals = None
    if any(tag in values for tag in _VITALS_TAGS):
        try:
            vitals = VitalSigns(
                heart_rate_bpm=optional_number("HR"),
                nibp_systolic_mmhg=optional_number("NIBP_SYS"),
                nibp_diastolic_mmhg=optional_number("NIBP_DIA"),
                nibp_mean_mmhg=optional_number("NIBP_MAP"),
            )
        except ValueError as exc:
            raise CodecError(f"invalid vital signs: {exc}") from None

    known = set(MANDATORY_TAGS) | set(_VITALS_TAGS) | {"LEADS"}
    extras = {tag: value for tag, value in values.items() if tag not in known}

    record = EcgRecord(
        device_id=values["DEVICE_ID"],
        ambulance_id=values["AMBULANCE_ID"],
        recorded_at=recorded_at,
        sample_rate_hz=fs,
        resolution_bits=res_bits,
        lsb_nanovolts=lsb_nv,
        duration_samples=nsamp,
        leads=leads,
    )
    flags = validate_record(record)
    structural = [
        v for v in flags if v.rule in ("all-leads-present", "lead-length", "positive-integer")
    ]
    if structural:
        raise CodecError(f"record invalid: {structural[0].message}")
    return DecodedBatch(record=record, vitals=vitals, extras=extras, flags=flags)


def content_digest(data: bytes) -> str:
    """SHA-256 hex digest; the idempotency key and record-id fragment."""
    return hashlib.sha256(data).hexdigest()
