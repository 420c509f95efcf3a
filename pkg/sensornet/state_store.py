# sensornet/state_store.py
"""采集端各传感器的 seq 高水位，用于重启后跳过已落盘的帧"""
from __future__ import annotations

from pathlib import Path

from utils.alchemy_store import execute_sql

_CREATE = """
CREATE TABLE IF NOT EXISTS collector_hwm (
    output_path TEXT NOT NULL,
    sensor_id INTEGER NOT NULL,
    next_expected INTEGER NOT NULL,
    received INTEGER NOT NULL,
    gaps INTEGER NOT NULL,
    duplicates INTEGER NOT NULL,
    PRIMARY KEY (output_path, sensor_id)
)
"""

_UPSERT = """
INSERT INTO collector_hwm (output_path, sensor_id, next_expected, received, gaps, duplicates)
VALUES (:output_path, :sensor_id, :next_expected, :received, :gaps, :duplicates)
ON CONFLICT (output_path, sensor_id) DO UPDATE SET
    next_expected = excluded.next_expected,
    received = excluded.received,
    gaps = excluded.gaps,
    duplicates = excluded.duplicates
"""


class HighWaterMarkStore:
    def __init__(self, db_path: str | Path, output_path: str | Path):
        self.db_path = db_path
        self.output_path = str(Path(output_path).resolve())
        execute_sql(self.db_path, _CREATE)

    def load(self) -> dict[int, dict[str, int]]:
        rows = execute_sql(
            self.db_path,
            "SELECT sensor_id, next_expected, received, gaps, duplicates FROM collector_hwm "
            "WHERE output_path = :output_path",
            {'output_path': self.output_path},
        )
        return {int(row['sensor_id']): {k: int(v) for k, v in row.items() if k != 'sensor_id'} for row in rows}

    def save(self, marks: dict[int, dict[str, int]]) -> None:
        if not marks:
            return
        execute_sql(
            self.db_path,
            _UPSERT,
            [{'output_path': self.output_path, 'sensor_id': sensor_id, **values} for sensor_id, values in marks.items()],
        )
