# synth/generator.py
import logging

import numpy as np

from csi_core.errors import DomainError
from csi_core.types import CsiFrame, Dataset, LabeledSample, Position3D
from utils.rng import substream

from .agc import apply_agc
from .channel import true_channel
from .scene import GridPlan, SceneConfig

logger = logging.getLogger('synth')


def capture_frame(scene: SceneConfig, uav: Position3D, sensor_index: int, seq: int,
                  timestamp_us: int, rng: np.random.Generator) -> CsiFrame:
    """一次 ping/reply 交换得到的 CSI：真实信道经过 AGC"""
    channel = true_channel(scene, uav, sensor_index, rng)
    distorted, gain_db = apply_agc(channel, scene, rng)
    return CsiFrame(
        sensor_id=sensor_index,
        seq=seq,
        timestamp_us=timestamp_us,
        agc_gain_db=gain_db,
        subcarriers=distorted,
    )


def hover_position(scene: SceneConfig, point, jitter_m: float, rng: np.random.Generator) -> Position3D:
    if jitter_m <= 0:
        return Position3D(*point)
    jittered = np.asarray(point, dtype=np.float64) + rng.normal(0.0, jitter_m, size=3)
    return Position3D(*scene.room.clip(tuple(jittered)))


def generate_dataset(scene: SceneConfig, plan: GridPlan, split: str = 'train') -> Dataset:
    """逐网格点、逐帧生成带标签样本；同一 (seed, split) 结果完全确定

    每帧随机数来自 (seed, split, 点序号, 帧序号) 子流，可按点并行生成。
    真值标签是网格点本身，悬停抖动只影响信道。
    """
    for index, point in enumerate(plan.grid_points):
        if not scene.room.contains(point):
            raise DomainError(f"网格点 {index} {point} 不在房间内")

    samples = []
    sample_index = 0
    for point_index, point in enumerate(plan.grid_points):
        truth = Position3D(*point)
        for frame_index in range(plan.frames_per_point):
            rng = substream(scene.rng_seed, split, point_index, frame_index)
            uav = hover_position(scene, point, plan.hover_jitter_m, rng)
            timestamp_us = plan.start_time_us + sample_index * plan.frame_interval_us
            frames = tuple(
                capture_frame(scene, uav, sensor_index, sample_index, timestamp_us, rng)
                for sensor_index in range(scene.sensor_count)
            )
            samples.append(LabeledSample(frames=frames, truth=truth))
            sample_index += 1

    logger.info(f"生成数据集完成: split={split}, N={len(samples)}, S={scene.sensor_count}, f={scene.subcarrier_count}")
    return Dataset(samples, meta={'split': split, 'rng_seed': scene.rng_seed})
