"""
Unit tests for the report store
Tests claims, duplicate detection and persistence across reconnects
"""

from __future__ import annotations

import pytest

from jobs import fingerprint, run_job
from models import AuditJob, ProbeLayout, StoredReport, TightnessJob
from report_store import ReportStore


def _stored(fp: str, kind: str = "tightness", failures: int = 0) -> StoredReport:
    return StoredReport(kind=kind, fingerprint=fp, report={"failures": failures})


@pytest.mark.asyncio
async def test_claim_new_then_duplicate(test_db: ReportStore):
    """
    Test 1: A fingerprint is claimed once

    Requirement: Identical jobs are computed at most once
    Verifies: check_and_mark() is True first, False afterwards
    """
    # Act
    first = await test_db.check_and_mark("abc123", "tightness")
    second = await test_db.check_and_mark("abc123", "tightness")
    other = await test_db.check_and_mark("def456", "tightness")

    # Assert
    assert first is True, "First claim should be new"
    assert second is False, "Second claim should be a duplicate"
    assert other is True, "A different fingerprint is a different job"


@pytest.mark.asyncio
async def test_store_and_fetch_report(test_db: ReportStore):
    """
    Test 2: Stored reports come back unchanged

    Requirement: GET /reports and GET /reports/{fingerprint} serve stored reports
    Verifies: load_reports() filtering by kind and get_report() lookup
    """
    # Arrange
    _ = await test_db.check_and_mark("t1", "tightness")
    _ = await test_db.check_and_mark("a1", "audit")

    # Act
    await test_db.store_report(_stored("t1", failures=3))
    await test_db.store_report(_stored("a1", kind="audit"))

    # Assert
    all_reports = await test_db.load_reports()
    audits = await test_db.load_reports(kind="audit")
    fetched = await test_db.get_report("t1")

    assert len(all_reports) == 2
    assert [r.fingerprint for r in audits] == ["a1"]
    assert fetched is not None and fetched.report == {"failures": 3}
    assert await test_db.get_report("missing") is None


@pytest.mark.asyncio
async def test_stats_and_counters(test_db: ReportStore):
    """
    Test 3: Counters and stats

    Requirement: received and duplicate_dropped are tracked
    Verifies: Counter increments and computed/kinds in get_stats()
    """
    # Act
    await test_db.increment_received(3)
    await test_db.increment_duplicate_dropped()
    _ = await test_db.check_and_mark("t1", "tightness")
    await test_db.store_report(_stored("t1"))

    # Assert
    stats = await test_db.get_stats()
    assert await test_db.get_counter("received") == 3
    assert await test_db.get_counter("duplicate_dropped") == 1
    assert await test_db.get_counter("unknown") == 0
    assert stats["computed"] == 1
    assert stats["kinds"] == ["tightness"]


@pytest.mark.asyncio
async def test_release_allows_resubmission(test_db: ReportStore):
    _ = await test_db.check_and_mark("failed", "audit")

    await test_db.release("failed")

    assert await test_db.check_and_mark("failed", "audit") is True


@pytest.mark.asyncio
async def test_persistence_after_reconnect(tmp_path):
    """
    Test 4: Claims and reports survive a restart

    Requirement: File-based store survives restarts; interrupted claims are released
    Verifies: A finished job stays a duplicate, an unfinished claim becomes new again
    """
    # Arrange
    db_path = str(tmp_path / "reports.db")
    store = ReportStore(db_path)
    await store.initialize()
    _ = await store.check_and_mark("done", "tightness")
    await store.store_report(_stored("done"))
    _ = await store.check_and_mark("crashed", "tightness")
    await store.increment_received(2)
    await store.close()

    # Act
    reopened = ReportStore(db_path)
    await reopened.initialize()

    # Assert
    try:
        assert await reopened.check_and_mark("done", "tightness") is False
        assert await reopened.check_and_mark("crashed", "tightness") is True
        assert await reopened.get_counter("received") == 2
        assert len(await reopened.load_reports()) == 1
    finally:
        await reopened.close()


def test_fingerprint_depends_on_parameters():
    """
    Test 5: Job fingerprints

    Requirement: Equal parameters give equal fingerprints
    Verifies: Stable SHA-256 hex digest; any parameter change alters it
    """
    job = TightnessJob(s=161, m=16, t=3, k=4, trials=10, seed=7)

    assert fingerprint(job) == fingerprint(job.model_copy())
    assert len(fingerprint(job)) == 64
    assert fingerprint(job) != fingerprint(job.model_copy(update={"seed": 8}))


def test_run_job_produces_reports(dense_layout: ProbeLayout):
    tightness = run_job(TightnessJob(s=161, m=16, t=3, k=4, trials=5, seed=1))
    audit = run_job(AuditJob(layout=dense_layout, k=2))

    assert tightness.kind == "tightness" and tightness.report["trials"] == 5
    assert audit.kind == "audit" and audit.report["verdict"] == "violation"
    assert audit.fingerprint == fingerprint(AuditJob(layout=dense_layout, k=2))
