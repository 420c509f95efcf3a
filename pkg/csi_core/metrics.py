# csi_core/metrics.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import InputShapeError
from .types import Position3D

# 所有真值完全相同时 R² 无定义
R2_UNDEFINED = None


@dataclass(frozen=True)
class MetricsReport:
    mae_m: float
    lmse_m2: float
    r2: float | None
    error_cdf: tuple[tuple[float, float], ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            'mae_m': self.mae_m,
            'lmse_m2': self.lmse_m2,
            'r2': self.r2,
            'cdf': [[error, fraction] for error, fraction in self.error_cdf],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> MetricsReport:
        return cls(
            mae_m=float(data['mae_m']),
            lmse_m2=float(data['lmse_m2']),
            r2=None if data.get('r2') is None else float(data['r2']),
            error_cdf=tuple((float(e), float(p)) for e, p in data.get('cdf', [])),
        )

    def cdf_at(self, error_m: float) -> float:
        """经验 CDF 在 error_m 处的取值"""
        fraction = 0.0
        for error, cumulative in self.error_cdf:
            if error <= error_m:
                fraction = cumulative
            else:
                break
        return fraction


def euclidean_error(pred: Position3D, truth: Position3D) -> float:
    return float(np.linalg.norm(pred.as_array() - truth.as_array()))


def _as_matrix(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        matrix = np.asarray(points, dtype=np.float64)
    else:
        matrix = np.array([p.as_array() if isinstance(p, Position3D) else p for p in points], dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != 3:
        raise InputShapeError(f"位置矩阵必须为 (N, 3)，实际为 {matrix.shape}")
    return matrix


def empirical_cdf(errors: np.ndarray) -> tuple[tuple[float, float], ...]:
    """去重排序后的误差与累计占比，最后一项恰为 1"""
    values, counts = np.unique(np.asarray(errors, dtype=np.float64), return_counts=True)
    cumulative = np.cumsum(counts)
    total = int(cumulative[-1])
    return tuple((float(v), float(c) / total) for v, c in zip(values, cumulative))


def compute_metrics(preds: Sequence[Position3D] | np.ndarray,
                    truths: Sequence[Position3D] | np.ndarray) -> MetricsReport:
    """MAE 为平均欧氏误差，LMSE 定义为 MAE 的平方，R² 在 3N 个坐标上合并计算"""
    pred_matrix = _as_matrix(preds)
    truth_matrix = _as_matrix(truths)
    if pred_matrix.shape[0] == 0:
        raise InputShapeError("预测列表不能为空")
    if pred_matrix.shape != truth_matrix.shape:
        raise InputShapeError(f"预测与真值数量不一致: {pred_matrix.shape[0]} vs {truth_matrix.shape[0]}")

    errors = np.linalg.norm(pred_matrix - truth_matrix, axis=1)
    mae = float(np.mean(errors))

    ss_res = float(np.sum((pred_matrix - truth_matrix) ** 2))
    ss_tot = float(np.sum((truth_matrix - truth_matrix.mean(axis=0)) ** 2))
    r2 = R2_UNDEFINED if ss_tot == 0.0 else 1.0 - ss_res / ss_tot

    return MetricsReport(mae_m=mae, lmse_m2=mae * mae, r2=r2, error_cdf=empirical_cdf(errors))
