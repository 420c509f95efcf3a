# sis/losses.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from csi_core.errors import InputError, InputShapeError

from .config import SisConfig
from .masks import SensorMask
from .model import fuse_batch
from .params import SisParams


@dataclass(frozen=True)
class LossTerms:
    pred: float
    sor: float
    sam: float
    fuse: float
    total: float


def replicate_truth(truth: np.ndarray, sensor_count: int) -> np.ndarray:
    """单架无人机的 N×3 真值沿传感器轴复制为 N×S×3"""
    truth = np.asarray(truth, dtype=np.float64)
    if truth.ndim == 2:
        return np.repeat(truth[:, None, :], sensor_count, axis=1)
    return truth


def _active(mask: SensorMask | None, sensor_count: int) -> np.ndarray:
    if mask is None:
        return np.ones(sensor_count, dtype=bool)
    if mask.size != sensor_count:
        raise InputShapeError(f"掩码长度 {mask.size} 与传感器数 {sensor_count} 不一致")
    return mask.as_array()


def _residual(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    truth = replicate_truth(truth, pred.shape[1] if pred.ndim == 3 else 1)
    if pred.ndim != 3 or pred.shape != truth.shape or pred.shape[2] != 3:
        raise InputShapeError(f"预测 {pred.shape} 与真值 {truth.shape} 形状不一致")
    return pred - truth


def loss_pred(pred: np.ndarray, truth: np.ndarray, mask: SensorMask | None = None) -> float:
    residual = _residual(pred, truth)
    active = _active(mask, residual.shape[1])
    n = residual.shape[0]
    if n == 0:
        return 0.0
    return float(np.sum(residual[:, active] ** 2) / (n * active.sum()))


def loss_sor(w_s: np.ndarray, lambda_s: float) -> float:
    return float(lambda_s * np.sum(np.abs(w_s)))


def loss_sam(pred: np.ndarray, truth: np.ndarray, v: np.ndarray, mask: SensorMask | None = None) -> float:
    """Σ_i v_i² Σ_s ‖e_is‖² / |A|，不除以 N"""
    residual = _residual(pred, truth)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (residual.shape[0],):
        raise InputShapeError(f"样本权重长度 {v.shape} 与样本数 {residual.shape[0]} 不一致")
    if np.any(v < 0):
        raise InputError("样本权重 v 不能为负")
    active = _active(mask, residual.shape[1])
    per_sample = np.sum(residual[:, active] ** 2, axis=(1, 2))
    return float(np.sum(v ** 2 * per_sample) / active.sum())


def loss_fuse(fused: np.ndarray, truth: np.ndarray, lambda_fuse: float) -> float:
    if lambda_fuse == 0 or len(fused) == 0:
        return 0.0
    return float(lambda_fuse * np.mean(np.sum((fused - truth) ** 2, axis=1)))


def loss_terms(
    pred: np.ndarray,
    truth: np.ndarray,
    params: SisParams,
    config: SisConfig,
    mask: SensorMask | None = None,
    sample_weights: np.ndarray | None = None,
) -> LossTerms:
    pred = np.asarray(pred, dtype=np.float64)
    v = params.v if sample_weights is None else sample_weights
    mask = mask or SensorMask.full(pred.shape[1])
    term_pred = loss_pred(pred, truth, mask)
    term_sor = loss_sor(params.w_s, config.lambda_s)
    term_sam = loss_sam(pred, truth, v, mask)
    term_fuse = 0.0
    if config.lambda_fuse > 0:
        truth_fused = np.asarray(truth, dtype=np.float64)
        if truth_fused.ndim == 3:
            truth_fused = truth_fused[:, 0, :]
        term_fuse = loss_fuse(fuse_batch(pred, mask, params.w_s), truth_fused, config.lambda_fuse)
    total = term_pred + term_sor + config.lambda_v * term_sam + term_fuse
    return LossTerms(term_pred, term_sor, term_sam, term_fuse, total)


def loss_total(
    pred: np.ndarray,
    truth: np.ndarray,
    params: SisParams,
    config: SisConfig,
    mask: SensorMask | None = None,
    sample_weights: np.ndarray | None = None,
) -> float:
    """L_pred + L_sor + λv·L_sam（lambda_fuse > 0 时再加融合项）"""
    return loss_terms(pred, truth, params, config, mask, sample_weights).total
