"""Repository storage, HTTP API and upload client."""

import json
import threading

import numpy as np
import pytest
import requests

from telecg.client import upload
from telecg.errors import (
    CodecError,
    PermanentRejectionError,
    RecordNotFoundError,
    TransportError,
)
from telecg.model import EcgRecord, LeadId
from telecg.repository import Repository
from telecg.service import start_in_thread
from telecg.synth import SynthSpec, synth_record
from telecg.wire import CONTENT_TYPE, decode_batch, encode_batch

from conftest import make_flat_record


@pytest.fixture
def batch_bytes(default_record):
    return encode_batch(default_record)


def record_with_ambulance(ambulance_id, seed):
    spec = SynthSpec(ambulance_id=ambulance_id, bpm=60.0 + seed)
    record, _ = synth_record(spec, seed=seed)
    return encode_batch(record)


class TestRepository:
    def test_store_fetch_byte_identity(self, tmp_path, batch_bytes):
        repo = Repository(tmp_path)
        meta = repo.store(batch_bytes)
        assert repo.fetch(meta.record_id) == batch_bytes

    def test_idempotent_store(self, tmp_path, batch_bytes):
        repo = Repository(tmp_path)
        ids = {repo.store(batch_bytes).record_id for _ in range(5)}
        assert len(ids) == 1
        assert len(repo.list()) == 1

    def test_undecodable_batch_not_persisted(self, tmp_path):
        repo = Repository(tmp_path)
        with pytest.raises(CodecError):
            repo.store(b"NOT=a batch\n")
        assert repo.list() == []
        assert list(tmp_path.glob("*.tvb")) == []

    def test_demographic_batch_rejected(self, tmp_path, batch_bytes):
        repo = Repository(tmp_path)
        with pytest.raises(CodecError, match="demographics forbidden"):
            repo.store(batch_bytes + b"PATIENT_NAME=John\n")
        assert repo.list() == []

    def test_list_filter_by_ambulance(self, tmp_path):
        repo = Repository(tmp_path)
        repo.store(record_with_ambulance("AMB-1", 1))
        repo.store(record_with_ambulance("AMB-2", 2))
        repo.store(record_with_ambulance("AMB-1", 3))
        metas = repo.list(ambulance_id="AMB-1")
        assert len(metas) == 2
        assert all(m.ambulance_id == "AMB-1" for m in metas)

    def test_list_newest_first(self, tmp_path):
        repo = Repository(tmp_path)
        for seed in range(3):
            repo.store(record_with_ambulance("AMB-X", seed))
        metas = repo.list()
        received = [m.received_at for m in metas]
        assert received == sorted(received, reverse=True)

    def test_fetch_unknown_id(self, tmp_path):
        repo = Repository(tmp_path)
        with pytest.raises(RecordNotFoundError):
            repo.fetch("nonexistent")

    def test_index_survives_reload(self, tmp_path, batch_bytes):
        meta = Repository(tmp_path).store(batch_bytes)
        reloaded = Repository(tmp_path)
        assert reloaded.fetch(meta.record_id) == batch_bytes
        assert reloaded.list()[0].record_id == meta.record_id

    def test_concurrent_stores_single_entry(self, tmp_path, batch_bytes):
        repo = Repository(tmp_path)
        results = []

        def worker():
            results.append(repo.store(batch_bytes).record_id)

        threads = [threading.Thread(target=worker) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(set(results)) == 1
        assert len(repo.list()) == 1

    def test_measurements_cached(self, tmp_path, batch_bytes):
        repo = Repository(tmp_path)
        meta = repo.store(batch_bytes)
        report = repo.measurements_report(meta.record_id)
        assert report["global"]["qrs_duration_ms"] is not None
        cache = tmp_path / f"{meta.record_id}.meas.json"
        assert cache.exists()
        again = repo.measurements_report(meta.record_id)
        assert again == report


@pytest.fixture(scope="module")
def live_server(tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("repo")
    server, thread = start_in_thread(str(data_dir), port=0)
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}", data_dir
    server.shutdown()
    server.server_close()


class TestHttpApi:
    def test_health(self, live_server):
        url, _ = live_server
        response = requests.get(f"{url}/api/v1/health", timeout=5)
        assert response.status_code == 200
        assert response.json() == {"status": "ok"}

    def test_post_and_fetch_round_trip(self, live_server, batch_bytes):
        url, _ = live_server
        response = requests.post(
            f"{url}/api/v1/records",
            data=batch_bytes,
            headers={"Content-Type": CONTENT_TYPE},
            timeout=10,
        )
        assert response.status_code == 201
        record_id = response.json()["record_id"]

        got = requests.get(f"{url}/api/v1/records/{record_id}", timeout=10)
        assert got.status_code == 200
        assert got.headers["Content-Type"] == CONTENT_TYPE
        assert got.content == batch_bytes

    def test_duplicate_posts_same_id(self, live_server, batch_bytes):
        url, _ = live_server
        ids = set()
        for _ in range(3):
            response = requests.post(f"{url}/api/v1/records", data=batch_bytes, timeout=10)
            assert response.status_code == 201
            ids.add(response.json()["record_id"])
        assert len(ids) == 1

    def test_demographics_rejected_server_side(self, live_server, batch_bytes):
        url, _ = live_server
        response = requests.post(
            f"{url}/api/v1/records", data=batch_bytes + b"PATIENT_NAME=John\n", timeout=10
        )
        assert response.status_code == 400
        assert "demographics forbidden" in response.json()["error"]

    def test_list_endpoint(self, live_server, batch_bytes):
        url, _ = live_server
        requests.post(f"{url}/api/v1/records", data=batch_bytes, timeout=10)
        listing = requests.get(f"{url}/api/v1/records", timeout=10).json()
        assert "records" in listing
        assert any("record_id" in m for m in listing["records"])
        filtered = requests.get(
            f"{url}/api/v1/records", params={"ambulance_id": "NO-SUCH"}, timeout=10
        ).json()
        assert filtered["records"] == []

    def test_fetch_unknown_404(self, live_server):
        url, _ = live_server
        response = requests.get(f"{url}/api/v1/records/missing-id", timeout=10)
        assert response.status_code == 404
        assert "error" in response.json()

    def test_measurements_endpoint(self, live_server, batch_bytes):
        url, _ = live_server
        record_id = requests.post(f"{url}/api/v1/records", data=batch_bytes, timeout=10).json()[
            "record_id"
        ]
        report = requests.get(f"{url}/api/v1/records/{record_id}/measurements", timeout=30)
        assert report.status_code == 200
        body = report.json()
        assert body["global"]["qrs_duration_ms"] is not None
        assert body["axes"]["qrs_axis_deg"] is not None
        assert body["record_id"] == record_id

    def test_measurements_unmeasurable_422(self, live_server):
        url, _ = live_server
        flat = encode_batch(make_flat_record())
        record_id = requests.post(f"{url}/api/v1/records", data=flat, timeout=10).json()[
            "record_id"
        ]
        report = requests.get(f"{url}/api/v1/records/{record_id}/measurements", timeout=30)
        assert report.status_code == 422
        assert "unmeasurable" in report.json()["error"]

    def test_filtered_record_fetch(self, live_server, batch_bytes):
        url, _ = live_server
        record_id = requests.post(f"{url}/api/v1/records", data=batch_bytes, timeout=10).json()[
            "record_id"
        ]
        got = requests.get(
            f"{url}/api/v1/records/{record_id}",
            params={"hp": "on", "lp": "on", "notch": "50", "baseline": "on", "emg": "off"},
            timeout=30,
        )
        assert got.status_code == 200
        decoded = decode_batch(got.content)
        assert decoded.record.duration_samples == 5000
        assert got.content != batch_bytes  # filtering changed samples

    def test_bad_filter_param_400(self, live_server, batch_bytes):
        url, _ = live_server
        record_id = requests.post(f"{url}/api/v1/records", data=batch_bytes, timeout=10).json()[
            "record_id"
        ]
        got = requests.get(
            f"{url}/api/v1/records/{record_id}", params={"notch": "45"}, timeout=10
        )
        assert got.status_code == 400

    def test_manual_axis_endpoint(self, live_server):
        url, _ = live_server
        body = {
            "lead_a": "I", "baseline_a": 0, "peak_a": 1000,
            "lead_b": "aVF", "baseline_b": 0, "peak_b": 0,
        }
        response = requests.post(f"{url}/api/v1/tools/manual-axis", json=body, timeout=5)
        assert response.status_code == 200
        assert response.json()["axis_deg"] == pytest.approx(0.0)

        body.update(peak_a=0, peak_b=1000)
        response = requests.post(f"{url}/api/v1/tools/manual-axis", json=body, timeout=5)
        assert response.json()["axis_deg"] == pytest.approx(90.0)

    def test_manual_axis_precordial_rejected(self, live_server):
        url, _ = live_server
        body = {
            "lead_a": "V1", "baseline_a": 0, "peak_a": 1000,
            "lead_b": "aVF", "baseline_b": 0, "peak_b": 10,
        }
        response = requests.post(f"{url}/api/v1/tools/manual-axis", json=body, timeout=5)
        assert response.status_code == 400

    def test_cors_headers_present(self, live_server):
        url, _ = live_server
        response = requests.get(f"{url}/api/v1/health", timeout=5)
        assert response.headers["Access-Control-Allow-Origin"] == "*"
        preflight = requests.options(f"{url}/api/v1/records", timeout=5)
        assert preflight.status_code == 204


class TestUploadClient:
    def test_upload_returns_record_id(self, live_server, batch_bytes):
        url, _ = live_server
        record_id = upload(url, batch_bytes)
        assert record_id
        assert upload(url, batch_bytes) == record_id  # idempotent

    def test_demographic_upload_permanently_rejected(self, live_server, batch_bytes):
        url, _ = live_server
        with pytest.raises(PermanentRejectionError) as err:
            upload(url, batch_bytes + b"PATIENT_NAME=John\n")
        assert err.value.status == 400
        assert "demographics forbidden" in err.value.server_message

    def test_retries_transient_failures_with_backoff(self, batch_bytes):
        sleeps = []

        class FlakySession:
            def __init__(self):
                self.calls = 0

            def post(self, url, data=None, headers=None, timeout=None):
                self.calls += 1
                if self.calls < 3:
                    raise requests.ConnectionError("refused")
                response = requests.Response()
                response.status_code = 201
                response._content = json.dumps({"record_id": "abc"}).encode()
                return response

        session = FlakySession()
        record_id = upload(
            "http://example.invalid", batch_bytes, session=session, sleep=sleeps.append
        )
        assert record_id == "abc"
        assert session.calls == 3
        assert sleeps == [1.0, 2.0]  # exponential backoff, 1 s base

    def test_exhausted_retries_raise_transport_error(self, batch_bytes):
        class DeadSession:
            def post(self, *args, **kwargs):
                raise requests.ConnectionError("refused")

        with pytest.raises(TransportError, match="3 retries"):
            upload("http://example.invalid", batch_bytes, session=DeadSession(), sleep=lambda s: None)

    def test_idempotency_key_sent(self, batch_bytes):
        captured = {}

        class CapturingSession:
            def post(self, url, data=None, headers=None, timeout=None):
                captured.update(headers)
                response = requests.Response()
                response.status_code = 201
                response._content = b'{"record_id": "x"}'
                return response

        upload("http://example.invalid", batch_bytes, session=CapturingSession())
        assert captured["Idempotency-Key"].startswith("sha256:")
        assert captured["Content-Type"] == CONTENT_TYPE
