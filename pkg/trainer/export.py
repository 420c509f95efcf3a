# trainer/export.py
"""供外部绘图的长表 CSV 导出（列 x, metric, task）"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Iterable

from csi_core.metrics import MetricsReport

CURVE_COLUMNS = ['x', 'metric', 'task']


def cdf_rows(per_task: dict[str, MetricsReport]) -> list[dict[str, Any]]:
    """每个任务的误差 CDF：x 为误差（米），metric 为累计占比"""
    rows = []
    for task, report in per_task.items():
        for error, fraction in report.error_cdf:
            rows.append({'x': error, 'metric': fraction, 'task': task})
    return rows


def sweep_rows(points: Iterable[tuple[float, MetricsReport]]) -> list[dict[str, Any]]:
    """样本比例曲线：task 列为指标名"""
    rows = []
    for fraction, report in points:
        rows.append({'x': fraction, 'metric': report.mae_m, 'task': 'mae_m'})
        rows.append({'x': fraction, 'metric': report.lmse_m2, 'task': 'lmse_m2'})
        if report.r2 is not None:
            rows.append({'x': fraction, 'metric': report.r2, 'task': 'r2'})
    return rows


def loss_rows(loss_curve: list[tuple[int, float]], task: str = 'loss_total') -> list[dict[str, Any]]:
    return [{'x': step, 'metric': loss, 'task': task} for step, loss in loss_curve]


def write_curve_csv(path: str | Path, rows: list[dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=CURVE_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return path
