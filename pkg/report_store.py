"""
Report store for computed tightness and audit reports
File-based SQLite, keyed by job fingerprint, survives restarts
"""

import json
import logging
from pathlib import Path
from typing import TypedDict, cast

import aiosqlite

from models import JsonValue, StoredReport

logger = logging.getLogger(__name__)


class StatsDict(TypedDict):
    computed: int
    kinds: list[str]
    db_size_mb: float


class ReportStore:
    """
    Persistent report store using SQLite.
    A fingerprint is claimed once (INSERT OR IGNORE); later jobs with the
    same fingerprint are duplicates and are not recomputed.
    """

    def __init__(self, db_path: str = "data/reports.db"):
        self.db_path: Path = Path(db_path)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self._conn: aiosqlite.Connection | None = None
        logger.info(f"Initialized ReportStore at {self.db_path}")

    async def initialize(self):
        """Create database schema if not exists."""
        self._conn = await aiosqlite.connect(self.db_path, timeout=10.0)

        _ = await self._conn.execute("PRAGMA journal_mode=WAL")
        _ = await self._conn.execute("PRAGMA synchronous=NORMAL")

        _ = await self._conn.execute("""
            CREATE TABLE IF NOT EXISTS claimed_jobs (
                fingerprint TEXT PRIMARY KEY,
                kind TEXT NOT NULL,
                claimed_at TEXT NOT NULL
            )
        """)

        _ = await self._conn.execute("""
            CREATE TABLE IF NOT EXISTS reports (
                fingerprint TEXT PRIMARY KEY,
                kind TEXT NOT NULL,
                report TEXT NOT NULL,  -- JSON string
                created_at TEXT NOT NULL,
                FOREIGN KEY (fingerprint) REFERENCES claimed_jobs(fingerprint)
            )
        """)

        _ = await self._conn.execute("""
            CREATE INDEX IF NOT EXISTS idx_reports_kind
            ON reports(kind)
        """)

        _ = await self._conn.execute("""
            CREATE TABLE IF NOT EXISTS system_stats (
                key TEXT PRIMARY KEY,
                value INTEGER NOT NULL
            )
        """)

        _ = await self._conn.execute("""
            INSERT OR IGNORE INTO system_stats (key, value) VALUES
            ('received', 0),
            ('duplicate_dropped', 0)
        """)

        await self._conn.commit()
        await self._release_unfinished()
        logger.info("ReportStore schema initialized")

    async def close(self):
        """Close database connection gracefully"""
        if self._conn:
            await self._conn.close()
            logger.info("ReportStore closed")

    async def check_and_mark(self, fingerprint: str, kind: str) -> bool:
        """
        Atomic claim of a fingerprint.
        Returns True if the job is NEW, False if an identical job was seen.
        """
        assert self._conn is not None
        cursor = await self._conn.execute(
            "INSERT OR IGNORE INTO claimed_jobs (fingerprint, kind, claimed_at) "
            "VALUES (?, ?, datetime('now'))",
            (fingerprint, kind),
        )
        await self._conn.commit()

        is_new = cursor.rowcount > 0
        await cursor.close()

        if is_new:
            logger.info(f"New job claimed: kind={kind}, fingerprint={fingerprint[:12]}")
        else:
            logger.warning(f"Duplicate job: kind={kind}, fingerprint={fingerprint[:12]}")
        return is_new

    async def store_report(self, stored: StoredReport) -> None:
        assert self._conn is not None
        try:
            _ = await self._conn.execute(
                """INSERT OR REPLACE INTO reports (fingerprint, kind, report, created_at)
                   VALUES (?, ?, ?, ?)""",
                (
                    stored.fingerprint,
                    stored.kind,
                    json.dumps(stored.report),
                    stored.created_at,
                ),
            )
            await self._conn.commit()
            logger.debug(f"Stored {stored.kind} report {stored.fingerprint[:12]}")
        except Exception as e:
            logger.error(f"Error storing report: {e}")
            raise

    async def release(self, fingerprint: str) -> None:
        """Drop a claim whose job failed so it can be submitted again."""
        assert self._conn is not None
        _ = await self._conn.execute(
            "DELETE FROM claimed_jobs WHERE fingerprint = ?", (fingerprint,)
        )
        await self._conn.commit()

    async def load_reports(
        self, kind: str | None = None, limit: int = 100
    ) -> list[StoredReport]:
        """Stored reports, newest first"""
        assert self._conn is not None
        if kind:
            cursor = await self._conn.execute(
                """SELECT kind, fingerprint, report, created_at FROM reports
                   WHERE kind = ? ORDER BY created_at DESC LIMIT ?""",
                (kind, limit),
            )
        else:
            cursor = await self._conn.execute(
                """SELECT kind, fingerprint, report, created_at FROM reports
                   ORDER BY created_at DESC LIMIT ?""",
                (limit,),
            )
        rows = await cursor.fetchall()
        await cursor.close()

        return [
            StoredReport(
                kind=cast(str, row[0]),
                fingerprint=cast(str, row[1]),
                report=cast(dict[str, JsonValue], json.loads(cast(str, row[2]))),
                created_at=cast(str, row[3]),
            )
            for row in rows
        ]

    async def get_report(self, fingerprint: str) -> StoredReport | None:
        assert self._conn is not None
        cursor = await self._conn.execute(
            "SELECT kind, fingerprint, report, created_at FROM reports WHERE fingerprint = ?",
            (fingerprint,),
        )
        row = await cursor.fetchone()
        await cursor.close()
        if row is None:
            return None
        return StoredReport(
            kind=cast(str, row[0]),
            fingerprint=cast(str, row[1]),
            report=cast(dict[str, JsonValue], json.loads(cast(str, row[2]))),
            created_at=cast(str, row[3]),
        )

    async def get_stats(self) -> StatsDict:
        """Used by GET /stats."""
        assert self._conn is not None
        cursor = await self._conn.execute("SELECT COUNT(*) FROM reports")
        row = await cursor.fetchone()
        computed = row[0] if row else 0
        await cursor.close()

        cursor = await self._conn.execute("SELECT DISTINCT kind FROM reports ORDER BY kind")
        kinds = [row[0] for row in await cursor.fetchall()]
        await cursor.close()

        db_size_bytes = self.db_path.stat().st_size if self.db_path.exists() else 0
        return {
            "computed": computed,
            "kinds": kinds,
            "db_size_mb": round(db_size_bytes / (1024 * 1024), 3),
        }

    async def increment_received(self, count: int = 1):
        assert self._conn is not None
        _ = await self._conn.execute(
            "UPDATE system_stats SET value = value + ? WHERE key = 'received'", (count,)
        )
        await self._conn.commit()

    async def increment_duplicate_dropped(self):
        assert self._conn is not None
        _ = await self._conn.execute(
            "UPDATE system_stats SET value = value + 1 WHERE key = 'duplicate_dropped'"
        )
        await self._conn.commit()

    async def get_counter(self, key: str) -> int:
        assert self._conn is not None
        cursor = await self._conn.execute(
            "SELECT value FROM system_stats WHERE key = ?", (key,)
        )
        row = await cursor.fetchone()
        await cursor.close()
        return row[0] if row else 0

    async def _release_unfinished(self):
        """Claims without a report belong to jobs interrupted by a crash"""
        assert self._conn is not None
        cursor = await self._conn.execute("""
            SELECT c.fingerprint FROM claimed_jobs c
            LEFT JOIN reports r ON c.fingerprint = r.fingerprint
            WHERE r.fingerprint IS NULL
        """)
        rows = cast(list[tuple[str]], await cursor.fetchall())
        await cursor.close()
        if rows:
            logger.warning(f"Releasing {len(rows)} unfinished job claims")
            _ = await self._conn.executemany(
                "DELETE FROM claimed_jobs WHERE fingerprint = ?", rows
            )
            await self._conn.commit()
