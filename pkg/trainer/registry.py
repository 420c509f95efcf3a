# trainer/registry.py
"""实验运行登记表（SQLite），每次实验写入一行"""
from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from utils.alchemy_store import execute_sql

logger = logging.getLogger('registry')

_CREATE_RUNS = """
CREATE TABLE IF NOT EXISTS runs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    kind TEXT NOT NULL,
    fingerprint TEXT NOT NULL,
    created_at TEXT NOT NULL,
    result TEXT NOT NULL
)
"""


class RunRegistry:
    def __init__(self, db_path: str | Path):
        self.db_path = db_path
        execute_sql(self.db_path, _CREATE_RUNS)

    def record(self, kind: str, fingerprint: str, result: dict[str, Any]) -> int:
        inserted = execute_sql(
            self.db_path,
            "INSERT INTO runs (kind, fingerprint, created_at, result) VALUES (:kind, :fingerprint, :created_at, :result)",
            {
                'kind': kind,
                'fingerprint': fingerprint,
                'created_at': datetime.now(timezone.utc).isoformat(timespec='seconds'),
                'result': json.dumps(result, ensure_ascii=False),
            },
        )
        run_id = int(inserted['lastrowid'])
        logger.info(f"登记实验 #{run_id}: {kind} {fingerprint[:12]}")
        return run_id

    def list_runs(self, kind: str | None = None) -> list[dict[str, Any]]:
        if kind is None:
            rows = execute_sql(self.db_path, "SELECT id, kind, fingerprint, created_at FROM runs ORDER BY id")
        else:
            rows = execute_sql(
                self.db_path,
                "SELECT id, kind, fingerprint, created_at FROM runs WHERE kind = :kind ORDER BY id",
                {'kind': kind},
            )
        return rows

    def get(self, run_id: int) -> dict[str, Any] | None:
        rows = execute_sql(self.db_path, "SELECT * FROM runs WHERE id = :id", {'id': run_id})
        if not rows:
            return None
        row = dict(rows[0])
        row['result'] = json.loads(row['result'])
        return row

    def find(self, fingerprint: str) -> list[dict[str, Any]]:
        return execute_sql(
            self.db_path,
            "SELECT id, kind, fingerprint, created_at FROM runs WHERE fingerprint = :fingerprint ORDER BY id",
            {'fingerprint': fingerprint},
        )
