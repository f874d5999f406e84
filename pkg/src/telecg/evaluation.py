"""Measurement-accuracy evaluation against reference annotations.

Compares global measurements and axes with per-record references, summarizes
mean difference and sample standard deviation per parameter, and checks the
interval limits (P 10/15, QRS 10/10, PQ 10/10, QT 25/30 ms). Axis parameters
are summarized without a pass/fail limit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .axis import compute_axes, wrap_degrees
from .delineation import DelineationConfig, measure
from .dsp import FilterConfig
from .errors import CodecError, TelecgError, UnmeasurableRecordError
from .model import AxisResult, GlobalMeasurements
from .wire import decode_batch

INTERVAL_PARAMETERS = (
    "p_duration_ms",
    "qrs_duration_ms",
    "pq_interval_ms",
    "qt_interval_ms",
)
AXIS_PARAMETERS = ("p_axis_deg", "qrs_axis_deg", "t_axis_deg")
ALL_PARAMETERS = INTERVAL_PARAMETERS + AXIS_PARAMETERS


@dataclass(frozen=True)
class IecLimit:
    """Acceptance bounds on |mean difference| and standard deviation (ms)."""

    max_abs_mean_ms: float
    max_sd_ms: float


IEC_LIMITS: dict[str, IecLimit] = {
    "p_duration_ms": IecLimit(10.0, 15.0),
    "qrs_duration_ms": IecLimit(10.0, 10.0),
    "pq_interval_ms": IecLimit(10.0, 10.0),
    "qt_interval_ms": IecLimit(25.0, 30.0),
}


@dataclass(frozen=True)
class ReferenceAnnotation:
    """Ground-truth interval and axis values for one record."""

    record_id: str
    p_duration_ms: float | None = None
    qrs_duration_ms: float | None = None
    pq_interval_ms: float | None = None
    qt_interval_ms: float | None = None
    p_axis_deg: float | None = None
    qrs_axis_deg: float | None = None
    t_axis_deg: float | None = None
    r_peak_samples: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if all(getattr(self, name) is None for name in ALL_PARAMETERS):
            raise ValueError("annotation must carry at least one reference value")


@dataclass(frozen=True)
class SummaryRow:
    parameter: str
    mean_difference: float
    standard_deviation: float | None
    n: int
    limit: IecLimit | None
    passed: bool | None


@dataclass(frozen=True)
class EvaluationSummary:
    rows: dict[str, SummaryRow]

    def passed_intervals(self) -> bool:
        interval_rows = [self.rows[p] for p in INTERVAL_PARAMETERS if p in self.rows]
        return bool(interval_rows) and all(r.passed for r in interval_rows)


@dataclass(frozen=True)
class RecordEvaluation:
    record_id: str
    differences: dict[str, float]


@dataclass(frozen=True)
class CorpusEvaluation:
    summary: EvaluationSummary
    records: list[RecordEvaluation]
    skipped: list[tuple[str, str]]


def compare(
    measured: GlobalMeasurements,
    axes: AxisResult | None,
    reference: ReferenceAnnotation,
    record_id: str | None = None,
) -> dict[str, float]:
    """Signed measured-minus-reference differences where both sides exist;
    axis differences are wrapped into (-180, +180]."""
    if record_id is not None and record_id != reference.record_id:
        raise ValueError(
            f"record id mismatch: measured {record_id!r} vs reference {reference.record_id!r}"
        )
    diffs: dict[str, float] = {}
    for name in INTERVAL_PARAMETERS:
        got = getattr(measured, name)
        want = getattr(reference, name)
        if got is not None and want is not None:
            diffs[name] = got - want
    if axes is not None:
        for name in AXIS_PARAMETERS:
            got = getattr(axes, name)
            want = getattr(reference, name)
            if got is not None and want is not None:
                diffs[name] = wrap_degrees(got - want)
    return diffs


def summarize(differences: Mapping[str, Sequence[float]]) -> EvaluationSummary:
    """Per-parameter mean and sample (n-1) standard deviation, with the IEC
    pass flag for interval parameters. Empty sequences are omitted; n=1
    leaves the standard deviation undefined (mean-only check)."""
    rows: dict[str, SummaryRow] = {}
    for name in ALL_PARAMETERS:
        values = list(differences.get(name, ()))
        if not values:
            continue
        mean = float(np.mean(values))
        sd = float(np.std(values, ddof=1)) if len(values) >= 2 else None
        limit = IEC_LIMITS.get(name)
        passed = None
        if limit is not None:
            passed = abs(mean) <= limit.max_abs_mean_ms and (
                sd is None or sd <= limit.max_sd_ms
            )
        rows[name] = SummaryRow(
            parameter=name,
            mean_difference=mean,
            standard_deviation=sd,
            n=len(values),
            limit=limit,
            passed=passed,
        )
    return EvaluationSummary(rows)


def save_annotation(annotation: ReferenceAnnotation, path: str | Path) -> None:
    payload = {k: v for k, v in asdict(annotation).items() if v is not None}
    if "r_peak_samples" in payload:
        payload["r_peak_samples"] = list(payload["r_peak_samples"])
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_annotation(path: str | Path) -> ReferenceAnnotation:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    r_peaks = data.get("r_peak_samples")
    return ReferenceAnnotation(
        record_id=data["record_id"],
        p_duration_ms=data.get("p_duration_ms"),
        qrs_duration_ms=data.get("qrs_duration_ms"),
        pq_interval_ms=data.get("pq_interval_ms"),
        qt_interval_ms=data.get("qt_interval_ms"),
        p_axis_deg=data.get("p_axis_deg"),
        qrs_axis_deg=data.get("qrs_axis_deg"),
        t_axis_deg=data.get("t_axis_deg"),
        r_peak_samples=tuple(int(i) for i in r_peaks) if r_peaks is not None else None,
    )


def evaluate_corpus(
    records_dir: str | Path,
    refs_dir: str | Path,
    config: DelineationConfig | None = None,
    filter_config: FilterConfig | None = None,
) -> CorpusEvaluation:
    """Measure every record in the corpus, compare against its annotation and
    summarize. Unreadable or unmeasurable pairs are skipped, not fatal."""
    records_dir = Path(records_dir)
    refs_dir = Path(refs_dir)
    record_paths = sorted(records_dir.glob("*.tvb"))
    if not record_paths:
        raise ValueError(f"no .tvb records found in {records_dir}")

    per_parameter: dict[str, list[float]] = {name: [] for name in ALL_PARAMETERS}
    details: list[RecordEvaluation] = []
    skipped: list[tuple[str, str]] = []

    for record_path in record_paths:
        record_id = record_path.stem
        ref_path = refs_dir / f"{record_id}.json"
        if not ref_path.exists():
            skipped.append((record_id, "no matching annotation"))
            continue
        try:
            reference = load_annotation(ref_path)
            decoded = decode_batch(record_path.read_bytes())
            result = measure(decoded.record, config, filter_config)
            axes = compute_axes(decoded.record, result)
            diffs = compare(result.measurements, axes, reference, record_id=record_id)
        except (CodecError, UnmeasurableRecordError, TelecgError, ValueError, OSError) as exc:
            skipped.append((record_id, str(exc)))
            continue
        details.append(RecordEvaluation(record_id=record_id, differences=diffs))
        for name, value in diffs.items():
            per_parameter[name].append(value)

    return CorpusEvaluation(
        summary=summarize(per_parameter), records=details, skipped=skipped
    )


def iter_corpus_pairs(records_dir: str | Path, refs_dir: str | Path) -> Iterable[tuple[Path, Path]]:
    """Matched (record, annotation) paths, sorted by record id."""
    records_dir, refs_dir = Path(records_dir), Path(refs_dir)
    for record_path in sorted(records_dir.glob("*.tvb")):
        ref_path = refs_dir / f"{record_path.stem}.json"
        if ref_path.exists():
            yield record_path, ref_path
