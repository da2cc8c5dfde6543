"""
Report jobs accepted by the service: fingerprinting and execution
"""

import hashlib
import logging

from cellprobe import audit_layout
from models import AuditJob, StoredReport, TightnessJob
from tightness_lab import run_tightness_experiment

logger = logging.getLogger(__name__)


def fingerprint(job: TightnessJob | AuditJob) -> str:
    """
    SHA-256 of the canonical job JSON. Reports are reproducible from their
    parameters, so equal fingerprints mean equal reports.
    """
    return hashlib.sha256(job.model_dump_json().encode("utf-8")).hexdigest()


def run_job(job: TightnessJob | AuditJob) -> StoredReport:
    """Blocking; the service calls it from a worker thread."""
    match job:
        case TightnessJob():
            report = run_tightness_experiment(
                job.s, job.m, job.t, job.k, job.trials, job.seed
            ).model_dump(mode="json")
        case AuditJob():
            report = audit_layout(job.layout, job.k).model_dump(mode="json")
    logger.debug(f"Ran {job.kind} job {fingerprint(job)[:12]}")
    return StoredReport(kind=job.kind, fingerprint=fingerprint(job), report=report)
