# dsp/hampel.py
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, ConfigDict, field_validator

from csi_core.errors import InputError

logger = logging.getLogger('dsp')

# MAD 到高斯标准差的一致性系数
MAD_SCALE = 1.4826


class HampelParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    window_half: int = 5
    k_mad: float = 3.0
    max_passes: int = 16

    @field_validator('window_half', 'max_passes')
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("必须为正整数")
        return value

    @field_validator('k_mad')
    @classmethod
    def _check_k(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("k_mad 必须 > 0")
        return value


def _window_stats(values: np.ndarray, window_half: int) -> tuple[np.ndarray, np.ndarray]:
    """沿第 0 轴计算截断窗口的中位数与 MAD，values 形状 (T, C)"""
    length = values.shape[0]
    medians = np.empty_like(values)
    mads = np.empty_like(values)
    width = 2 * window_half + 1

    if length >= width:
        windows = sliding_window_view(values, width, axis=0)  # (T-2h, C, width)
        centre = np.median(windows, axis=-1)
        medians[window_half:length - window_half] = centre
        mads[window_half:length - window_half] = np.median(np.abs(windows - centre[..., None]), axis=-1)
        edges = list(range(window_half)) + list(range(length - window_half, length))
    else:
        edges = range(length)

    for i in edges:
        window = values[max(0, i - window_half):min(length, i + window_half + 1)]
        median = np.median(window, axis=0)
        medians[i] = median
        mads[i] = np.median(np.abs(window - median), axis=0)
    return medians, mads


def hampel_single_pass(values: np.ndarray, window_half: int, k_mad: float) -> tuple[np.ndarray, np.ndarray]:
    medians, mads = _window_stats(values, window_half)
    # MAD 为 0 时阈值为 0，等价于 x != median 才替换
    outliers = np.abs(values - medians) > k_mad * MAD_SCALE * mads
    return np.where(outliers, medians, values), outliers


def hampel_filter_matrix(values: np.ndarray, params: HampelParams | None = None) -> tuple[np.ndarray, np.ndarray]:
    """对 (T, C) 的每一列独立做 Hampel 滤波，迭代到不再有新的离群点"""
    params = params or HampelParams()
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise InputError("Hampel 输入必须是非空的 (T, C) 矩阵")

    filtered = values.copy()
    mask = np.zeros(values.shape, dtype=bool)
    for _ in range(params.max_passes):
        filtered, flagged = hampel_single_pass(filtered, params.window_half, params.k_mad)
        if not flagged.any():
            break
        mask |= flagged
    else:
        logger.warning(f"Hampel 滤波在 {params.max_passes} 轮内未收敛")
    return filtered, mask


def hampel_filter(series, window_half: int = 5, k_mad: float = 3.0) -> tuple[np.ndarray, np.ndarray]:
    """单条序列的 Hampel 滤波，返回 (滤波结果, 离群点掩码)"""
    series = np.asarray(series, dtype=np.float64).reshape(-1)
    if series.size == 0:
        raise InputError("Hampel 输入序列不能为空")
    params = HampelParams(window_half=window_half, k_mad=k_mad)
    filtered, mask = hampel_filter_matrix(series[:, None], params)
    return filtered[:, 0], mask[:, 0]
