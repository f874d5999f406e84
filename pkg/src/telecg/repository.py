"""Medical-center record repository: byte-exact batch storage with an index.

One ``<record_id>.tvb`` file per record plus an append-only JSON-lines index;
no database. Uploads deduplicate on the content digest, so re-sending the
same batch always yields the original record id.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .axis import compute_axes
from .delineation import DelineationConfig, measure
from .dsp import FilterConfig
from .errors import RecordNotFoundError, UnmeasurableRecordError
from .model import utc_now_seconds
from .reports import build_measurement_report
from .wire import content_digest, decode_batch

INDEX_FILENAME = "index.jsonl"


@dataclass(frozen=True)
class StoredRecordMeta:
    record_id: str
    received_at: datetime
    device_id: str
    ambulance_id: str
    recorded_at: datetime
    byte_size: int

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "received_at": _format_time(self.received_at),
            "device_id": self.device_id,
            "ambulance_id": self.ambulance_id,
            "recorded_at": _format_time(self.recorded_at),
            "byte_size": self.byte_size,
        }


def _format_time(moment: datetime) -> str:
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_time(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


class Repository:
    """Thread-safe store/list/fetch over a data directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._by_id: dict[str, StoredRecordMeta] = {}
        self._id_by_digest: dict[str, str] = {}
        self._load_index()

    def _index_path(self) -> Path:
        return self.root / INDEX_FILENAME

    def _load_index(self) -> None:
        path = self._index_path()
        if not path.exists():
            return
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            meta = StoredRecordMeta(
                record_id=entry["record_id"],
                received_at=_parse_time(entry["received_at"]),
                device_id=entry["device_id"],
                ambulance_id=entry["ambulance_id"],
                recorded_at=_parse_time(entry["recorded_at"]),
                byte_size=entry["byte_size"],
            )
            self._by_id[meta.record_id] = meta
            self._id_by_digest[entry["digest"]] = meta.record_id

    def store(self, payload: bytes) -> StoredRecordMeta:
        """Persist the exact received bytes; idempotent on content digest.

        Raises CodecError (nothing persisted) when the batch does not decode.
        """
        decoded = decode_batch(payload)
        digest = content_digest(payload)
        with self._lock:
            existing = self._id_by_digest.get(digest)
            if existing is not None:
                return self._by_id[existing]

            received_at = utc_now_seconds()
            record_id = f"{received_at:%Y%m%dT%H%M%S}Z-{digest[:12]}"
            meta = StoredRecordMeta(
                record_id=record_id,
                received_at=received_at,
                device_id=decoded.record.device_id,
                ambulance_id=decoded.record.ambulance_id,
                recorded_at=decoded.record.recorded_at,
                byte_size=len(payload),
            )

            final_path = self.root / f"{record_id}.tvb"
            tmp_path = self.root / f".{record_id}.tvb.tmp"
            tmp_path.write_bytes(payload)
            os.replace(tmp_path, final_path)

            entry = dict(meta.to_dict(), digest=digest)
            with open(self._index_path(), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry) + "\n")

            self._by_id[record_id] = meta
            self._id_by_digest[digest] = record_id
            return meta

    def list(
        self,
        device_id: str | None = None,
        ambulance_id: str | None = None,
        from_time: datetime | None = None,
        to_time: datetime | None = None,
    ) -> list[StoredRecordMeta]:
        """Metadata ordered by received_at descending; time range filters on
        the recording time."""
        with self._lock:
            metas = list(self._by_id.values())
        if device_id is not None:
            metas = [m for m in metas if m.device_id == device_id]
        if ambulance_id is not None:
            metas = [m for m in metas if m.ambulance_id == ambulance_id]
        if from_time is not None:
            metas = [m for m in metas if m.recorded_at >= from_time]
        if to_time is not None:
            metas = [m for m in metas if m.recorded_at <= to_time]
        return sorted(metas, key=lambda m: (m.received_at, m.record_id), reverse=True)

    def fetch(self, record_id: str) -> bytes:
        """The stored bytes, exactly as received."""
        with self._lock:
            if record_id not in self._by_id:
                raise RecordNotFoundError(record_id)
        return (self.root / f"{record_id}.tvb").read_bytes()

    def measurements_report(
        self,
        record_id: str,
        config: DelineationConfig | None = None,
        filter_config: FilterConfig | None = None,
    ) -> dict:
        """The measure+axes report for a stored record.

        The default-configuration report is computed once and cached beside
        the record; explicit configurations are computed fresh.
        """
        use_cache = config is None and filter_config is None
        cache_path = self.root / f"{record_id}.meas.json"
        if use_cache and cache_path.exists():
            return json.loads(cache_path.read_text(encoding="utf-8"))

        payload = self.fetch(record_id)
        decoded = decode_batch(payload)
        try:
            result = measure(decoded.record, config, filter_config)
            axes = compute_axes(decoded.record, result)
            report = build_measurement_report(result, axes, record_id=record_id)
        except UnmeasurableRecordError as exc:
            report = {"schema": "telecg-measurements/1", "record_id": record_id, "error": str(exc)}
        if use_cache:
            tmp = cache_path.with_suffix(".json.tmp")
            tmp.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
            os.replace(tmp, cache_path)
        return report
