"""Cross-checks that keep the frontend fixtures honest: documents the
editor emits must validate and re-simulate to the stored traces."""

from __future__ import annotations

from pathlib import Path

import pytest

from qmlsim.engine import ResourceLimits, configure, run
from qmlsim.qml import parse, serialize_result, validate

FRONTEND_FIXTURES = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures"
SAMPLES = Path(__file__).parent.parent / "sample_jobs"
LIMITS = ResourceLimits(memory_bytes=4 * 1024**3, throughput=1e9)

pytestmark = pytest.mark.skipif(
    not FRONTEND_FIXTURES.is_dir(), reason="frontend fixtures not present"
)


def _rerun(doc: bytes) -> bytes:
    job = parse(doc)
    trace = run(job, configure(job, LIMITS), limits=LIMITS)
    return serialize_result(trace, job)


def test_editor_bell_document_validates_and_matches_sample():
    drawn = (FRONTEND_FIXTURES / "bell.canonical.qml").read_bytes()
    assert validate(drawn) == []
    # the drawn document is the sample document post-normalization
    from qmlsim.qml import serialize_job

    assert serialize_job(parse((SAMPLES / "bell.qml").read_bytes())) == drawn


def test_editor_bell_resimulates_to_stored_trace():
    drawn = (FRONTEND_FIXTURES / "bell.canonical.qml").read_bytes()
    stored = (FRONTEND_FIXTURES / "bell.result.qml").read_bytes()
    assert _rerun(drawn) == stored


def test_shor_fixture_matches_fresh_run():
    stored = (FRONTEND_FIXTURES / "shor9.result.qml").read_bytes()
    assert _rerun((SAMPLES / "shor9.qml").read_bytes()) == stored
