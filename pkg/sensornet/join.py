# sensornet/join.py
"""把采集端落盘的帧按采集时刻分组，并用轨迹插值得到位置标签"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from csi_core.dataset_io import read_frames
from csi_core.errors import InputError
from csi_core.types import CsiFrame, Dataset, LabeledSample

from .trajectory import Trajectory

logger = logging.getLogger('join')

# 50 Hz 帧间隔的一半
DEFAULT_TOLERANCE_US = 10_000


@dataclass
class JoinResult:
    dataset: Dataset
    excluded: int
    incomplete: int
    dropped: int

    def to_dict(self) -> dict:
        return {
            'samples': self.dataset.n,
            'excluded_frames': self.excluded,
            'incomplete_groups': self.incomplete,
            'dropped_groups': self.dropped,
        }


def _group_frames(frames: list[CsiFrame], tolerance_us: int) -> list[list[CsiFrame]]:
    """按时间排序后贪心分组：组内时间跨度不超过容差，且每个传感器至多一帧"""
    groups: list[list[CsiFrame]] = []
    current: list[CsiFrame] = []
    anchor = 0
    for frame in sorted(frames, key=lambda f: (f.timestamp_us, f.sensor_id, f.seq)):
        if current and (frame.timestamp_us - anchor > tolerance_us
                        or any(f.sensor_id == frame.sensor_id for f in current)):
            groups.append(current)
            current = []
        if not current:
            anchor = frame.timestamp_us
        current.append(frame)
    if current:
        groups.append(current)
    return groups


def join_labels(
    frames: list[CsiFrame] | str | Path,
    trajectory: Trajectory,
    sensor_ids: list[int] | None = None,
    tolerance_us: int = DEFAULT_TOLERANCE_US,
    drop_incomplete: bool = False,
) -> JoinResult:
    """缺传感器的组默认以全零占位帧补齐并标记；drop_incomplete=True 时丢弃"""
    if isinstance(frames, (str, Path)):
        frames = read_frames(frames)
    frames = [f for f in frames if f.n_sub > 0]
    if not frames:
        raise InputError("没有可用的 CSI 帧")

    inside = [f for f in frames if trajectory.covers(f.timestamp_us)]
    excluded = len(frames) - len(inside)
    if excluded:
        logger.warning(f"{excluded} 帧的时间戳超出轨迹范围，已排除")

    sensor_ids = sorted(sensor_ids if sensor_ids is not None else {f.sensor_id for f in frames})
    slot = {sensor_id: i for i, sensor_id in enumerate(sensor_ids)}
    n_sub = inside[0].n_sub if inside else frames[0].n_sub

    samples, incomplete, dropped = [], 0, 0
    for group in _group_frames(inside, tolerance_us):
        group = [f for f in group if f.sensor_id in slot]
        if not group:
            continue
        instant = int(round(np.mean([f.timestamp_us for f in group])))
        by_sensor = {f.sensor_id: f for f in group}
        missing = tuple(s for s in sensor_ids if s not in by_sensor)
        if missing:
            incomplete += 1
            if drop_incomplete:
                dropped += 1
                continue
        ordered = []
        for sensor_id in sensor_ids:
            frame = by_sensor.get(sensor_id)
            if frame is None:
                frame = CsiFrame(sensor_id, 0, instant, 0.0, np.zeros(n_sub, dtype=np.complex128))
            ordered.append(frame)
        samples.append(LabeledSample(tuple(ordered), trajectory.position_at(instant), missing))

    logger.info(f"标签对齐完成: {len(samples)} 个样本, 不完整 {incomplete}, 丢弃 {dropped}, 排除帧 {excluded}")
    dataset = Dataset(samples, meta={'sensor_ids': sensor_ids, 'tolerance_us': tolerance_us})
    return JoinResult(dataset, excluded, incomplete, dropped)
