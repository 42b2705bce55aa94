"""
Script: db.py
Created: 2026-10-10
Purpose: SQLite experiment registry for published LOSO reports
Keywords: database, sqlite, registry, experiments, sffkit
Status: active
Prerequisites:
  - aiosqlite
Changelog:
  - 2026-10-10: Initial version (reports keyed by content fingerprint)
See-Also: endpoints.py
"""

import hashlib
import time
from typing import Dict, List, Optional

import aiosqlite

from . import config
from .models import ExperimentReport


def report_fingerprint(report: ExperimentReport) -> str:
    """run_id: SHA-256 of the canonical report JSON."""
    return hashlib.sha256(report.model_dump_json().encode("utf-8")).hexdigest()


async def init_db():
    """Create the experiments table."""
    async with aiosqlite.connect(config.SFFKIT_DB) as db:
        await db.execute("""
            CREATE TABLE IF NOT EXISTS experiments (
                run_id TEXT PRIMARY KEY,
                feature_kind TEXT NOT NULL,
                task TEXT,
                fold_count INTEGER NOT NULL,
                accuracy_mean REAL NOT NULL,
                accuracy_std REAL NOT NULL,
                uar REAL NOT NULL,
                report TEXT NOT NULL,
                created_at REAL NOT NULL
            )
        """)
        await db.execute("""
            CREATE INDEX IF NOT EXISTS idx_created_at ON experiments(created_at)
        """)
        await db.commit()


async def insert_report(report: ExperimentReport) -> str:
    """Store a report; publishing the same report twice keeps one row."""
    run_id = report_fingerprint(report)
    async with aiosqlite.connect(config.SFFKIT_DB) as db:
        await db.execute("""
            INSERT OR IGNORE INTO experiments
            (run_id, feature_kind, task, fold_count, accuracy_mean, accuracy_std, uar, report, created_at)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
        """, (
            run_id,
            report.feature_kind.value,
            report.task.value if report.task else None,
            report.fold_count,
            report.accuracy_mean,
            report.accuracy_std,
            report.pooled.uar,
            report.model_dump_json(),
            time.time(),
        ))
        await db.commit()
    return run_id


async def get_report(run_id: str) -> Optional[ExperimentReport]:
    async with aiosqlite.connect(config.SFFKIT_DB) as db:
        async with db.execute("SELECT report FROM experiments WHERE run_id = ?", (run_id,)) as cursor:
            row = await cursor.fetchone()
    if row is None:
        return None
    return ExperimentReport.model_validate_json(row[0])


async def list_recent_reports(limit: int = 50) -> List[Dict]:
    """Summary rows, newest first."""
    async with aiosqlite.connect(config.SFFKIT_DB) as db:
        db.row_factory = aiosqlite.Row
        async with db.execute("""
            SELECT run_id, feature_kind, task, fold_count, accuracy_mean, accuracy_std, uar, created_at
            FROM experiments
            ORDER BY created_at DESC
            LIMIT ?
        """, (limit,)) as cursor:
            rows = await cursor.fetchall()
            return [dict(row) for row in rows]
