# synth/agc.py
import math

import numpy as np

from csi_core.errors import InputError

from .scene import SceneConfig

# 全零信道按 -120 dB 计，避免 log(0)
POWER_FLOOR_DB = -120.0


def received_power_db(channel: np.ndarray) -> float:
    power = float(np.mean(np.abs(channel) ** 2))
    if power <= 0.0:
        return POWER_FLOOR_DB
    return max(10.0 * math.log10(power), POWER_FLOOR_DB)


def quantize_gain(raw_gain_db: float, scene: SceneConfig) -> float:
    """按步长量化并钳位到可表示的步长整数倍区间"""
    step = scene.agc_step_db
    low = math.ceil(scene.agc_range_db[0] / step - 1e-9)
    high = math.floor(scene.agc_range_db[1] / step + 1e-9)
    steps = math.floor(raw_gain_db / step + 0.5)
    steps = min(max(steps, low), high)
    return steps * step + 0.0


def apply_agc(channel: np.ndarray, scene: SceneConfig,
              rng: np.random.Generator | None = None) -> tuple[np.ndarray, float]:
    """模拟 AGC：把接收功率拉向目标值，返回失真后的信道与实际增益

    rng 给定且 agc_jitter_db > 0 时，功率估计叠加干扰扰动（CSI 本身不含该干扰）。
    """
    channel = np.asarray(channel, dtype=np.complex128)
    if channel.size == 0:
        raise InputError("信道向量不能为空")
    if not scene.agc_enabled:
        return channel.copy(), 0.0

    measured_db = received_power_db(channel)
    if rng is not None and scene.agc_jitter_db > 0:
        measured_db += float(rng.normal(0.0, scene.agc_jitter_db))
    gain_db = quantize_gain(scene.agc_target_db - measured_db, scene)
    alpha = 10.0 ** (gain_db / 20.0)
    return channel * alpha, gain_db
