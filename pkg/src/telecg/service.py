"""HTTP API v1 of the repository service.

POST /api/v1/records                 store a tag-value batch -> {record_id}
GET  /api/v1/records                 metadata list (device/ambulance/time filters)
GET  /api/v1/records/{id}            batch bytes (optional server-side filtering)
GET  /api/v1/records/{id}/measurements   measure+axes report (cached)
POST /api/v1/tools/manual-axis       manual axis from picked values
GET  /api/v1/health                  liveness

JSON responses throughout except the batch bytes themselves. CORS is open so
the browser viewer can talk to the service directly.
"""

from __future__ import annotations

import json
import logging
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .axis import manual_axis
from .delineation import detect_with_filters, qrs_mask_from_peaks
from .dsp import config_from_flags, preprocess
from .errors import CodecError, RecordNotFoundError
from .model import LeadId
from .repository import Repository
from .wire import CONTENT_TYPE, decode_batch, encode_batch

log = logging.getLogger(__name__)

API_PREFIX = "/api/v1"
FILTER_PARAMS = ("hp", "lp", "notch", "baseline", "emg")
FILTER_DEFAULTS = {"hp": "on", "lp": "on", "notch": "50", "baseline": "on", "emg": "off"}


class TelecgServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], repository: Repository):
        super().__init__(address, ApiHandler)
        self.repository = repository


class ApiHandler(BaseHTTPRequestHandler):
    server: TelecgServer
    protocol_version = "HTTP/1.1"

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, document: dict) -> None:
        self._send(status, json.dumps(document).encode("utf-8"), "application/json")

    def _error(self, status: int, message: str) -> None:
        self._json(status, {"error": message})

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", 0))
        return self.rfile.read(length) if length else b""

    # -- routing ----------------------------------------------------------

    def do_OPTIONS(self) -> None:  # CORS preflight
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, Idempotency-Key")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_POST(self) -> None:
        url = urlparse(self.path)
        if url.path == f"{API_PREFIX}/records":
            self._post_record()
        elif url.path == f"{API_PREFIX}/tools/manual-axis":
            self._post_manual_axis()
        else:
            self._error(404, "not found")

    def do_GET(self) -> None:
        url = urlparse(self.path)
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        parts = [p for p in url.path.split("/") if p]
        if url.path == f"{API_PREFIX}/health":
            self._json(200, {"status": "ok"})
        elif url.path == f"{API_PREFIX}/records":
            self._list_records(query)
        elif len(parts) == 4 and url.path.startswith(f"{API_PREFIX}/records/"):
            self._get_record(parts[3], query)
        elif (
            len(parts) == 5
            and url.path.startswith(f"{API_PREFIX}/records/")
            and parts[4] == "measurements"
        ):
            self._get_measurements(parts[3], query)
        else:
            self._error(404, "not found")

    # -- handlers ---------------------------------------------------------

    def _post_record(self) -> None:
        payload = self._read_body()
        try:
            meta = self.server.repository.store(payload)
        except CodecError as exc:
            self._error(400, str(exc))
            return
        self._json(201, {"record_id": meta.record_id})

    def _post_manual_axis(self) -> None:
        try:
            body = json.loads(self._read_body().decode("utf-8"))
            angle = manual_axis(
                baseline_a=float(body["baseline_a"]),
                peak_a=float(body["peak_a"]),
                baseline_b=float(body["baseline_b"]),
                peak_b=float(body["peak_b"]),
                lead_a=LeadId.from_name(str(body["lead_a"])),
                lead_b=LeadId.from_name(str(body["lead_b"])),
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            self._error(400, str(exc))
            return
        self._json(200, {"axis_deg": angle})

    def _list_records(self, query: dict[str, str]) -> None:
        try:
            from_time = _parse_query_time(query.get("from"))
            to_time = _parse_query_time(query.get("to"))
        except ValueError as exc:
            self._error(400, str(exc))
            return
        metas = self.server.repository.list(
            device_id=query.get("device_id"),
            ambulance_id=query.get("ambulance_id"),
            from_time=from_time,
            to_time=to_time,
        )
        self._json(200, {"records": [m.to_dict() for m in metas]})

    def _get_record(self, record_id: str, query: dict[str, str]) -> None:
        try:
            payload = self.server.repository.fetch(record_id)
        except RecordNotFoundError:
            self._error(404, f"no record {record_id}")
            return
        if any(p in query for p in FILTER_PARAMS):
            try:
                payload = _filtered_payload(payload, query)
            except ValueError as exc:
                self._error(400, str(exc))
                return
        self._send(200, payload, CONTENT_TYPE)

    def _get_measurements(self, record_id: str, query: dict[str, str]) -> None:
        filter_config = None
        if any(p in query for p in FILTER_PARAMS):
            try:
                filter_config = _filter_config_from_query(query)
            except ValueError as exc:
                self._error(400, str(exc))
                return
        try:
            report = self.server.repository.measurements_report(
                record_id, filter_config=filter_config
            )
        except RecordNotFoundError:
            self._error(404, f"no record {record_id}")
            return
        status = 422 if "error" in report else 200
        self._json(status, report)


def _parse_query_time(text: str | None) -> datetime | None:
    if text is None:
        return None
    try:
        return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    except ValueError:
        raise ValueError(f"time filter must look like 2026-01-01T00:00:00Z, got {text!r}") from None


def _filter_config_from_query(query: dict[str, str]):
    flags = dict(FILTER_DEFAULTS)
    for name in FILTER_PARAMS:
        if name in query:
            flags[name] = query[name]
    return config_from_flags(**flags)


def _filtered_payload(payload: bytes, query: dict[str, str]) -> bytes:
    """Re-encode the batch after server-side filtering (the viewer path)."""
    config = _filter_config_from_query(query)
    decoded = decode_batch(payload)
    record = decoded.record
    mask = None
    if config.emg_enabled:
        peaks, _, _ = detect_with_filters(record, config.without_emg())
        if len(peaks):
            mask = qrs_mask_from_peaks(peaks, record.sample_rate_hz, record.duration_samples)
    return encode_batch(preprocess(record, config, mask), decoded.vitals)


def make_server(data_dir: str, port: int, host: str = "127.0.0.1") -> TelecgServer:
    return TelecgServer((host, port), Repository(data_dir))


def run_server(data_dir: str, port: int, host: str = "127.0.0.1") -> None:
    server = make_server(data_dir, port, host)
    log.info("serving on %s:%d, data dir %s", host, server.server_address[1], data_dir)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()


def start_in_thread(data_dir: str, port: int = 0, host: str = "127.0.0.1") -> tuple[TelecgServer, threading.Thread]:
    """Start the service on a background thread (tests and embedding)."""
    server = make_server(data_dir, port, host)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread
