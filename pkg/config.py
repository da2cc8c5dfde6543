"""
Runtime configuration, overridable through environment variables
"""

import os

ORACLE_BUDGET = int(os.getenv("SPAN_ORACLE_BUDGET", str(2**26)))  # subset evaluations
RANK_BUDGET = int(os.getenv("SPAN_RANK_BUDGET", str(2**20)))
DB_PATH = os.getenv("SPAN_DB_PATH", "data/reports.db")
LOG_LEVEL = os.getenv("SPAN_LOG_LEVEL", "WARNING")
MAX_QUEUE = int(os.getenv("SPAN_MAX_QUEUE", "10000"))
MAX_RECENT_REPORTS = int(os.getenv("SPAN_MAX_RECENT_REPORTS", "10000"))

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
