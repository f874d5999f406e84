"""Report documents: the measurement report and the evaluation report.

Both are JSON with stable field names; the evaluation report also renders as
a fixed-width text table (one row per parameter) for terminal use.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from .delineation import MeasurementResult
from .evaluation import (
    AXIS_PARAMETERS,
    CorpusEvaluation,
    INTERVAL_PARAMETERS,
    EvaluationSummary,
)
from .model import AxisResult, BeatFiducials, LEAD_ORDER

MEASUREMENT_SCHEMA = "telecg-measurements/1"
EVALUATION_SCHEMA = "telecg-evaluation/1"

PARAMETER_TITLES = {
    "p_duration_ms": "P Duration",
    "qrs_duration_ms": "QRS Duration",
    "pq_interval_ms": "PQ Interval",
    "qt_interval_ms": "QT Interval",
    "p_axis_deg": "P Axis",
    "qrs_axis_deg": "QRS Axis",
    "t_axis_deg": "T Axis",
}


def _beat_dict(beat: BeatFiducials) -> dict:
    return {
        "p_onset": beat.p_onset,
        "p_peak": beat.p_peak,
        "p_offset": beat.p_offset,
        "qrs_onset": beat.qrs_onset,
        "q_peak": beat.q_peak,
        "r_peak": beat.r_peak,
        "s_peak": beat.s_peak,
        "r_prime_peak": beat.r_prime_peak,
        "qrs_offset": beat.qrs_offset,
        "t_onset": beat.t_onset,
        "t_peak": beat.t_peak,
        "t_offset": beat.t_offset,
        "beat_label": int(beat.beat_label) if beat.beat_label is not None else None,
        "qrs_type": beat.qrs_type.value if beat.qrs_type is not None else None,
    }


def build_measurement_report(
    result: MeasurementResult, axes: AxisResult | None = None, record_id: str | None = None
) -> dict:
    """The measurement document consumed by the CLI, evaluation and viewer."""
    waves = result.global_waves
    return {
        "schema": MEASUREMENT_SCHEMA,
        "record_id": record_id,
        "global": {
            "p_duration_ms": result.measurements.p_duration_ms,
            "qrs_duration_ms": result.measurements.qrs_duration_ms,
            "pq_interval_ms": result.measurements.pq_interval_ms,
            "qt_interval_ms": result.measurements.qt_interval_ms,
            "heart_rate_bpm": result.measurements.heart_rate_bpm,
        },
        "axes": {
            "p_axis_deg": axes.p_axis_deg if axes else None,
            "qrs_axis_deg": axes.qrs_axis_deg if axes else None,
            "t_axis_deg": axes.t_axis_deg if axes else None,
        },
        "global_waves": {
            "p": asdict(waves.p) if waves.p else None,
            "qrs": asdict(waves.qrs) if waves.qrs else None,
            "t": asdict(waves.t) if waves.t else None,
        },
        "dominant_beat": result.dominant_beat,
        "beat_labels": [int(lbl) for lbl in result.beat_labels],
        "r_peaks": list(result.r_peaks),
        "detection_lead": result.detection_lead.value,
        "leads": {
            lead.value: [_beat_dict(b) for b in result.fiducials[lead]] for lead in LEAD_ORDER
        },
        "config": {
            "delineation": asdict(result.config),
            "filters": asdict(result.filter_config),
        },
    }


def build_evaluation_report(evaluation: CorpusEvaluation) -> dict:
    """Machine-readable evaluation table plus per-record detail rows."""
    summary_rows = []
    for name in INTERVAL_PARAMETERS + AXIS_PARAMETERS:
        row = evaluation.summary.rows.get(name)
        if row is None:
            continue
        summary_rows.append(
            {
                "parameter": name,
                "mean_difference": row.mean_difference,
                "standard_deviation": row.standard_deviation,
                "n": row.n,
                "limit_mean": row.limit.max_abs_mean_ms if row.limit else None,
                "limit_sd": row.limit.max_sd_ms if row.limit else None,
                "pass": row.passed,
            }
        )
    return {
        "schema": EVALUATION_SCHEMA,
        "summary": summary_rows,
        "records": [
            {"record_id": r.record_id, "differences": r.differences} for r in evaluation.records
        ],
        "skipped": [{"record_id": rid, "reason": reason} for rid, reason in evaluation.skipped],
    }


def format_evaluation_table(summary: EvaluationSummary) -> str:
    """Fixed-width table: parameter, mean difference, SD, n, limits, verdict."""
    header = f"{'Parameter':<14}{'Mean Diff':>11}{'Std Dev':>10}{'n':>5}{'Limits':>14}  Result"
    lines = [header, "-" * len(header)]
    for name in INTERVAL_PARAMETERS + AXIS_PARAMETERS:
        row = summary.rows.get(name)
        if row is None:
            continue
        sd = f"{row.standard_deviation:.2f}" if row.standard_deviation is not None else "-"
        if row.limit is not None:
            limits = f"±{row.limit.max_abs_mean_ms:g}/{row.limit.max_sd_ms:g}"
            verdict = "pass" if row.passed else "FAIL"
        else:
            limits = "-"
            verdict = "-"
        lines.append(
            f"{PARAMETER_TITLES[name]:<14}{row.mean_difference:>11.2f}{sd:>10}{row.n:>5}{limits:>14}  {verdict}"
        )
    return "\n".join(lines)


def write_json(document: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
