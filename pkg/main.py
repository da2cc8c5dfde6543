"""
span-witness service - Main Application
FastAPI server running tightness and audit jobs with fingerprint dedup,
plus synchronous dense-set search and witness verification
"""

import asyncio
import logging
import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException

import config
from dense_core import find_dense_set
from graph_core import parse_graph_file, parse_witness
from jobs import fingerprint, run_job
from models import (
    AuditJob,
    DenseWitness,
    FindDenseRequest,
    GraphFormatError,
    JobBatch,
    JobResponse,
    Multigraph,
    PreconditionError,
    ReportQueryResponse,
    StoredReport,
    SystemStats,
    TightnessJob,
    Verdict,
    VerifyRequest,
)
from oracle import verify_witness
from report_store import ReportStore

logging.basicConfig(level=logging.INFO, format=config.LOG_FORMAT)
logger = logging.getLogger(__name__)

# Global state
report_store: ReportStore
job_queue: asyncio.Queue[TightnessJob | AuditJob]
recent_reports: list[StoredReport] = []  # In-memory cache for GET /reports
start_time = time.time()


@asynccontextmanager
async def lifespan(_: FastAPI):
    """Application lifecycle management."""
    global report_store, job_queue, recent_reports
    report_store = ReportStore(config.DB_PATH)
    await report_store.initialize()

    job_queue = asyncio.Queue(maxsize=config.MAX_QUEUE)

    recent_reports = await report_store.load_reports(limit=config.MAX_RECENT_REPORTS)
    logger.info(f"Loaded {len(recent_reports)} existing reports from database")

    consumer_task = asyncio.create_task(consumer_worker())
    logger.info("Consumer worker started")

    yield

    logger.info("Shutting down...")
    __ = consumer_task.cancel()
    try:
        await consumer_task
    except asyncio.CancelledError:
        pass
    await report_store.close()
    logger.info("Shutdown complete")


app = FastAPI(
    title="span-witness",
    description="Dense-subgraph witnesses, tightness experiments and probe-layout audits",
    version="1.0.0",
    lifespan=lifespan,
)


async def consumer_worker():
    """Background worker: claim the fingerprint, compute off the event loop, store"""
    logger.info("Consumer worker running")

    while True:
        try:
            job = await job_queue.get()
        except asyncio.CancelledError:
            logger.info("Consumer worker cancelled")
            break

        key = fingerprint(job)
        try:
            if await report_store.check_and_mark(key, job.kind):
                stored = await asyncio.to_thread(run_job, job)
                await report_store.store_report(stored)

                recent_reports.append(stored)
                if len(recent_reports) > config.MAX_RECENT_REPORTS:
                    del recent_reports[: len(recent_reports) - config.MAX_RECENT_REPORTS]
                logger.debug(f"Computed {job.kind} report {key[:12]}")
            else:
                await report_store.increment_duplicate_dropped()
        except asyncio.CancelledError:
            logger.info("Consumer worker cancelled")
            break
        except Exception as e:
            logger.error(f"Job {key[:12]} failed: {e}")
            await report_store.release(key)
        finally:
            job_queue.task_done()


@app.post("/jobs", response_model=JobResponse, status_code=202)
async def submit_jobs(batch: JobBatch):
    """Queue jobs; identical jobs are computed once by the consumer."""
    accepted = 0

    for job in batch.jobs:
        await report_store.increment_received()
        try:
            await asyncio.wait_for(job_queue.put(job), timeout=5.0)
        except asyncio.TimeoutError:
            raise HTTPException(503, "Queue full")
        accepted += 1

    return JobResponse(accepted=accepted, message=f"Accepted {accepted} jobs for processing")


@app.get("/reports", response_model=ReportQueryResponse)
async def get_reports(kind: str | None = None, limit: int = 100):
    """
    GET /reports?kind=<tightness|audit>&limit=<limit>

    Computed reports, newest first, optionally filtered by kind (max 1000).
    """
    limit = min(limit, 1000)
    selected = [r for r in recent_reports if kind is None or r.kind == kind]
    selected = sorted(selected, key=lambda r: r.created_at, reverse=True)[:limit]
    return ReportQueryResponse(kind=kind, total=len(selected), reports=selected)


@app.get("/reports/{key}", response_model=StoredReport)
async def get_report(key: str):
    stored = await report_store.get_report(key)
    if stored is None:
        raise HTTPException(status_code=404, detail=f"No report with fingerprint {key}")
    return stored


def _multigraph(text: str) -> Multigraph:
    try:
        graph = parse_graph_file(text)
    except GraphFormatError as e:
        raise HTTPException(status_code=422, detail=str(e))
    if not isinstance(graph, Multigraph):
        raise HTTPException(status_code=422, detail="expected a multigraph ('g s m' header)")
    return graph


@app.post("/find-dense", response_model=DenseWitness)
async def find_dense(request: FindDenseRequest):
    graph = _multigraph(request.graph)
    try:
        return await asyncio.to_thread(find_dense_set, graph, request.epsilon)
    except PreconditionError as e:
        raise HTTPException(status_code=400, detail=str(e))


@app.post("/verify", response_model=Verdict)
async def verify(request: VerifyRequest):
    try:
        graph = parse_graph_file(request.graph)
        witness = parse_witness(request.witness)
    except GraphFormatError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return verify_witness(graph, witness)


@app.get("/stats", response_model=SystemStats)
async def get_stats():
    """
    GET /stats - job counters and stored report kinds

    Computed properties:
    - duplicate_rate: Percentage of duplicates (duplicate_dropped / received)
    """
    try:
        store_stats = await report_store.get_stats()
        return SystemStats(
            uptime_seconds=round(time.time() - start_time, 2),
            received=await report_store.get_counter("received"),
            computed=store_stats["computed"],
            duplicate_dropped=await report_store.get_counter("duplicate_dropped"),
            kinds=store_stats["kinds"],
        )
    except Exception as e:
        logger.error(f"Error in /stats: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.get("/health")
async def health_check():
    """Returns 200 OK if service is running"""
    return {
        "status": "healthy",
        "queue_size": job_queue.qsize(),
        "reports_cached": len(recent_reports),
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run("main:app", host="0.0.0.0", port=8080, log_level="info")
