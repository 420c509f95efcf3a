# trainer/evaluator.py
from __future__ import annotations

import numpy as np

from csi_core.errors import InputError, InputShapeError
from csi_core.metrics import MetricsReport, compute_metrics
from dsp.pipeline import AmplitudeMatrix
from sis.masks import SensorMask
from sis.model import predict
from sis.params import SisParams


def require_labels(matrix: AmplitudeMatrix) -> np.ndarray:
    if matrix.labels is None:
        raise InputError("幅度矩阵缺少真值标签，无法训练或评估")
    return matrix.labels


def evaluate(params: SisParams, test: AmplitudeMatrix, mask: SensorMask,
             head: int | str | None = None) -> MetricsReport:
    """掩码下的融合预测与真值比较；不修改 params。head 为 None 时按掩码选择回归头"""
    labels = require_labels(test)
    if test.shape[1] != params.sensor_count:
        raise InputShapeError(f"测试集传感器数 {test.shape[1]} 与模型 {params.sensor_count} 不一致")
    preds = predict(test.values, mask, params, head)
    return compute_metrics(preds, labels)


def mean_baseline(train_labels: np.ndarray, test_labels: np.ndarray) -> MetricsReport:
    """常数预测器：始终输出训练集平均位置"""
    mean = np.asarray(train_labels, dtype=np.float64).mean(axis=0)
    preds = np.repeat(mean[None, :], len(test_labels), axis=0)
    return compute_metrics(preds, test_labels)
