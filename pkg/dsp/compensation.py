# dsp/compensation.py
"""动态 AGC 补偿：把 dB 增益换算为线性缩放因子并作用于每个子载波"""
import math

import numpy as np

from csi_core.errors import DomainError
from csi_core.types import CsiFrame


def dac_scaling_factor(gain_db: float) -> float:
    """ρ = 1 / 10^(gain/20)"""
    if not math.isfinite(gain_db):
        raise DomainError(f"AGC 增益必须为有限值: {gain_db}")
    return 1.0 / (10.0 ** (gain_db / 20.0))


def compensate_frame(frame: CsiFrame) -> CsiFrame:
    """实部、虚部同时乘以 ρ；增益被吸收进数据后置 0，防止重复补偿"""
    rho = dac_scaling_factor(frame.agc_gain_db)
    return frame.with_subcarriers(frame.subcarriers * rho, agc_gain_db=0.0)


def amplitude(frame: CsiFrame) -> np.ndarray:
    return np.sqrt(frame.subcarriers.real ** 2 + frame.subcarriers.imag ** 2)
