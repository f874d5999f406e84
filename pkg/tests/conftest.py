"""Shared fixtures: canonical synthetic records and corpus directories."""

from __future__ import annotations

import numpy as np
import pytest

from telecg.synth import SynthSpec, synth_record

_acceptance_results: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def default_record_pair():
    """72 bpm, P 100 ms, PQ 160 ms, QRS 90 ms, QT 380 ms, axes 60/45."""
    return synth_record(SynthSpec(), seed=1)


@pytest.fixture(scope="session")
def default_record(default_record_pair):
    return default_record_pair[0]


@pytest.fixture(scope="session")
def corpus_dirs(tmp_path_factory):
    """The 50-record noise-free corpus with annotations."""
    from telecg.synth import build_corpus

    root = tmp_path_factory.mktemp("corpus")
    build_corpus(root / "records", root / "refs", count=50, seed=1)
    return root / "records", root / "refs"


def make_flat_record(n: int = 5000, value: int = 0):
    from datetime import datetime, timezone

    from telecg.model import EcgRecord, LEAD_ORDER

    return EcgRecord(
        device_id="DEV-TEST",
        ambulance_id="AMB-TEST",
        recorded_at=datetime(2026, 1, 1, tzinfo=timezone.utc),
        sample_rate_hz=500,
        resolution_bits=24,
        lsb_nanovolts=1000,
        duration_samples=n,
        leads={lead: np.full(n, value, dtype=np.int32) for lead in LEAD_ORDER},
    )


@pytest.fixture
def flat_record():
    return make_flat_record()


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance_results.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _acceptance_results:
        verdict = "PASS" if outcome == "PASSED" else outcome
        terminalreporter.write_line(f"ACCEPTANCE {name}: {verdict}")
