"""Command-line entry points.

Exit codes: 0 success, 1 data errors, 2 usage errors. Every report is
written to a file so runs can be diffed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .axis import compute_axes
from .delineation import measure
from .dsp import config_from_flags
from .errors import TelecgError
from .evaluation import evaluate_corpus
from .model import validate_record
from .reports import (
    build_evaluation_report,
    build_measurement_report,
    format_evaluation_table,
    write_json,
)
from .synth import SynthSpec, synth_record
from .wire import decode_batch, encode_batch

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE = 2


def _add_filter_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--hp", choices=["on", "off"], default="on", help="0.8 Hz high-pass")
    parser.add_argument("--lp", choices=["on", "off"], default="on", help="150 Hz low-pass")
    parser.add_argument("--notch", choices=["50", "60", "off"], default="50", help="mains notch")
    parser.add_argument("--baseline", choices=["on", "off"], default="on", help="baseline wander removal")
    parser.add_argument("--emg", choices=["on", "off"], default="off", help="dynamic EMG filter")


def _filter_config(args: argparse.Namespace):
    return config_from_flags(
        hp=args.hp, lp=args.lp, notch=args.notch, baseline=args.baseline, emg=args.emg
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="telecg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic record")
    p_synth.add_argument("--spec", required=True, help="JSON generation spec")
    p_synth.add_argument("--out", required=True, help="output record (.tvb)")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--annotation", help="also write the ground-truth annotation here")

    p_delin = sub.add_parser("delineate", help="measure a record")
    p_delin.add_argument("--in", dest="infile", required=True)
    p_delin.add_argument("--out", required=True, help="measurement report (.json)")
    _add_filter_flags(p_delin)

    p_axes = sub.add_parser("axes", help="compute frontal axes of a record")
    p_axes.add_argument("--in", dest="infile", required=True)
    p_axes.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="evaluate a corpus against annotations")
    p_eval.add_argument("--records", required=True)
    p_eval.add_argument("--refs", required=True)
    p_eval.add_argument("--report", required=True)

    p_send = sub.add_parser("send", help="upload a record to a repository service")
    p_send.add_argument("--server", required=True)
    p_send.add_argument("--in", dest="infile", required=True)

    p_serve = sub.add_parser("serve", help="run the repository service")
    p_serve.add_argument("--port", type=int, default=8240)
    p_serve.add_argument(
        "--data-dir",
        default=os.environ.get("TELECG_DATA_DIR"),
        help="storage directory (default: $TELECG_DATA_DIR)",
    )
    p_serve.add_argument("--host", default="127.0.0.1")

    p_val = sub.add_parser("validate", help="check record invariants")
    p_val.add_argument("--in", dest="infile", required=True)

    return parser


def _load_record(path: str):
    return decode_batch(Path(path).read_bytes())


def cmd_synth(args: argparse.Namespace) -> int:
    spec_data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    spec = SynthSpec(**spec_data)
    record, annotation = synth_record(spec, seed=args.seed)
    Path(args.out).write_bytes(encode_batch(record))
    if args.annotation:
        from dataclasses import replace

        from .evaluation import save_annotation

        save_annotation(replace(annotation, record_id=Path(args.out).stem), args.annotation)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_delineate(args: argparse.Namespace) -> int:
    decoded = _load_record(args.infile)
    result = measure(decoded.record, filter_config=_filter_config(args))
    axes = compute_axes(decoded.record, result)
    report = build_measurement_report(result, axes, record_id=Path(args.infile).stem)
    write_json(report, args.out)
    g = report["global"]
    print(
        f"P {g['p_duration_ms']} ms, QRS {g['qrs_duration_ms']} ms, "
        f"PQ {g['pq_interval_ms']} ms, QT {g['qt_interval_ms']} ms, "
        f"HR {g['heart_rate_bpm'] and round(g['heart_rate_bpm'], 1)} bpm"
    )
    return EXIT_OK


def cmd_axes(args: argparse.Namespace) -> int:
    decoded = _load_record(args.infile)
    result = measure(decoded.record)
    axes = compute_axes(decoded.record, result)
    document = {
        "schema": "telecg-axes/1",
        "record_id": Path(args.infile).stem,
        "p_axis_deg": axes.p_axis_deg,
        "qrs_axis_deg": axes.qrs_axis_deg,
        "t_axis_deg": axes.t_axis_deg,
    }
    write_json(document, args.out)
    print(f"P {axes.p_axis_deg}, QRS {axes.qrs_axis_deg}, T {axes.t_axis_deg} (degrees)")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    evaluation = evaluate_corpus(args.records, args.refs)
    write_json(build_evaluation_report(evaluation), args.report)
    print(format_evaluation_table(evaluation.summary))
    if evaluation.skipped:
        print(f"skipped {len(evaluation.skipped)} record(s)")
    if not evaluation.records:
        print("no records evaluated", file=sys.stderr)
        return EXIT_DATA_ERROR
    return EXIT_OK


def cmd_send(args: argparse.Namespace) -> int:
    from .client import upload

    record_id = upload(args.server, Path(args.infile).read_bytes())
    print(record_id)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    if not args.data_dir:
        print("serve needs --data-dir or TELECG_DATA_DIR", file=sys.stderr)
        return EXIT_USAGE
    from .service import run_server

    run_server(args.data_dir, args.port, args.host)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    decoded = _load_record(args.infile)
    violations = validate_record(decoded.record)
    for violation in violations:
        print(f"{violation.field}: {violation.rule}: {violation.message}")
    if violations:
        return EXIT_DATA_ERROR
    print("ok")
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "delineate": cmd_delineate,
    "axes": cmd_axes,
    "evaluate": cmd_evaluate,
    "send": cmd_send,
    "serve": cmd_serve,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (TelecgError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
