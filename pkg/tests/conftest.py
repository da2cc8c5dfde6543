# pyright:reportExplicitAny=false

from __future__ import annotations

import asyncio
import tempfile
from pathlib import Path

import pytest
import pytest_asyncio
from httpx import ASGITransport, AsyncClient
from hypothesis import HealthCheck, settings

import config
from models import Multigraph, ProbeLayout
from report_store import ReportStore

settings.register_profile(
    "span",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("span")


@pytest.fixture(autouse=True)
def isolated_db(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    """
    Point the service at a throwaway database for every test.
    The app reads config.DB_PATH when its lifespan starts.
    """
    monkeypatch.setattr(config, "DB_PATH", str(tmp_path / "reports.db"))
    yield


@pytest_asyncio.fixture
async def test_db():
    """Create temporary report store."""
    with tempfile.TemporaryDirectory() as tmpdir:
        db_path = Path(tmpdir) / "test_reports.db"

        store = ReportStore(str(db_path))
        await store.initialize()

        yield store

        await store.close()


@pytest_asyncio.fixture
async def test_client():
    """Client against a fresh app lifespan (store, queue and consumer)."""
    from main import app, lifespan

    async with lifespan(app):
        async with AsyncClient(
            transport=ASGITransport(app=app), base_url="http://test", timeout=30.0
        ) as client:
            await asyncio.sleep(0.1)  # Let consumer start
            yield client


# ---------------------------------------------------------------------------
# Small graphs
# ---------------------------------------------------------------------------


@pytest.fixture
def theta() -> Multigraph:
    """Two vertices joined by three parallel paths of length two: s=5, m=6."""
    return Multigraph(s=5, edges=((0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)))


@pytest.fixture
def triple_edge() -> Multigraph:
    """Two vertices and three parallel edges."""
    return Multigraph(s=2, edges=((0, 1), (0, 1), (0, 1)))


@pytest.fixture
def k4() -> Multigraph:
    return Multigraph(
        s=4, edges=((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    )


@pytest.fixture
def triangle() -> Multigraph:
    return Multigraph(s=3, edges=((0, 1), (1, 2), (0, 2)))


@pytest.fixture
def path4() -> Multigraph:
    return Multigraph(s=4, edges=((0, 1), (1, 2), (2, 3)))


@pytest.fixture
def dense_layout() -> ProbeLayout:
    """Five queries that read only the three cells 0..2 of a 6-cell table."""
    return ProbeLayout(
        s=6,
        m=6,
        t=2,
        probes=((0, 1), (1, 2), (0, 2), (0, 1), (3, 4), (4, 5)),
    )
