# synth/channel.py
"""对数距离路径损耗 + 镜像反射多径（莱斯因子控制直射/反射功率比）+ 复高斯噪声"""
from __future__ import annotations

import math

import numpy as np

from csi_core.errors import DomainError, InputError
from csi_core.types import Position3D
from utils.rng import substream

from .scene import SceneConfig

SPEED_OF_LIGHT = 299_792_458.0
MIN_DISTANCE_M = 0.01

# 反射面顺序：地面、四面墙、天花板
_SURFACES = (('z', 0), ('x', 0), ('y', 0), ('x', 1), ('y', 1), ('z', 1))
_AXIS = {'x': 0, 'y': 1, 'z': 2}


def subcarrier_frequencies(scene: SceneConfig) -> np.ndarray:
    offsets = np.arange(scene.subcarrier_count) - (scene.subcarrier_count - 1) / 2.0
    return scene.carrier_freq_hz + offsets * scene.subcarrier_spacing_hz


def path_amplitude(scene: SceneConfig, distance_m: float) -> float:
    """发射功率减去 ref_loss_db + 10·n·log10(d) 后的线性幅度"""
    distance_m = max(distance_m, MIN_DISTANCE_M)
    loss_db = scene.ref_loss_db + 10.0 * scene.pathloss_exponent * math.log10(distance_m)
    return 10.0 ** ((scene.tx_power_db - loss_db) / 20.0)


def image_distances(scene: SceneConfig, uav: np.ndarray, sensor: np.ndarray) -> np.ndarray:
    """前 multipath_taps 个一阶镜像源到传感器的路径长度"""
    distances = []
    for axis_name, side in _SURFACES[:scene.multipath_taps]:
        axis = _AXIS[axis_name]
        plane = getattr(scene.room, axis_name)[side]
        image = uav.copy()
        image[axis] = 2.0 * plane - uav[axis]
        distances.append(max(float(np.linalg.norm(image - sensor)), MIN_DISTANCE_M))
    return np.asarray(distances, dtype=np.float64)


def _tap_phases(scene: SceneConfig, sensor_index: int) -> np.ndarray:
    # 反射相位只取决于场景种子，保证同一位置指纹稳定
    rng = substream(scene.rng_seed, 'tap-phase', sensor_index)
    return rng.uniform(0.0, 2.0 * np.pi, size=6)[:scene.multipath_taps]


def true_channel(scene: SceneConfig, uav: Position3D, sensor_index: int,
                 rng: np.random.Generator | None = None) -> np.ndarray:
    """无 AGC 失真的信道 H(k)，长度为 subcarrier_count 的复数向量"""
    if not 0 <= sensor_index < scene.sensor_count:
        raise InputError(f"sensor_index {sensor_index} 超出范围 [0, {scene.sensor_count})")
    if not scene.room.contains(uav):
        raise DomainError(f"无人机位置 {uav} 不在房间内")

    uav_xyz = uav.as_array()
    sensor_xyz = np.asarray(scene.sensor_positions[sensor_index], dtype=np.float64)
    freqs = subcarrier_frequencies(scene)

    distance = max(float(np.linalg.norm(uav_xyz - sensor_xyz)), MIN_DISTANCE_M)
    los_amp = path_amplitude(scene, distance)
    channel = los_amp * np.exp(-2j * np.pi * freqs * distance / SPEED_OF_LIGHT)

    if scene.multipath_taps > 0:
        tap_distances = image_distances(scene, uav_xyz, sensor_xyz)
        weights = tap_distances ** (-scene.pathloss_exponent / 2.0)
        # 反射总功率 = 直射功率 / K
        k_linear = 10.0 ** (scene.rician_k_db / 10.0)
        scatter_power = los_amp ** 2 / k_linear
        tap_amps = weights * math.sqrt(scatter_power / float(np.sum(weights ** 2)))
        phases = _tap_phases(scene, sensor_index)
        delays = np.exp(-2j * np.pi * np.outer(tap_distances, freqs) / SPEED_OF_LIGHT)
        channel = channel + (tap_amps * np.exp(1j * phases)) @ delays

    if math.isfinite(scene.noise_floor_db):
        if rng is None:
            rng = substream(scene.rng_seed, 'channel-noise', sensor_index)
        sigma = math.sqrt(10.0 ** (scene.noise_floor_db / 10.0) / 2.0)
        noise = rng.normal(0.0, sigma, size=(2, scene.subcarrier_count))
        channel = channel + noise[0] + 1j * noise[1]

    return channel
