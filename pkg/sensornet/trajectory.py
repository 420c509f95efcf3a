# sensornet/trajectory.py
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from csi_core.errors import DomainError, InputError
from csi_core.types import Position3D

TRAJECTORY_COLUMNS = ['timestamp_us', 'x', 'y', 'z']


@dataclass(eq=False)
class Trajectory:
    """无人机轨迹：时间戳非递减，各轴线性插值"""
    timestamps_us: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        self.timestamps_us = np.asarray(self.timestamps_us, dtype=np.int64)
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.timestamps_us.ndim != 1 or len(self.timestamps_us) == 0:
            raise InputError("轨迹至少需要一个点")
        if self.positions.shape != (len(self.timestamps_us), 3):
            raise InputError(f"轨迹位置形状 {self.positions.shape} 与时间戳数量不一致")
        if np.any(np.diff(self.timestamps_us) < 0):
            raise InputError("轨迹时间戳必须非递减")
        if not np.all(np.isfinite(self.positions)):
            raise DomainError("轨迹位置必须为有限值")

    @property
    def start_us(self) -> int:
        return int(self.timestamps_us[0])

    @property
    def end_us(self) -> int:
        return int(self.timestamps_us[-1])

    def covers(self, timestamp_us: int) -> bool:
        return self.start_us <= timestamp_us <= self.end_us

    def position_at(self, timestamp_us: float) -> Position3D:
        if not self.covers(timestamp_us):
            raise DomainError(f"时间戳 {timestamp_us} 超出轨迹范围 [{self.start_us}, {self.end_us}]")
        t = float(timestamp_us)
        times = self.timestamps_us.astype(np.float64)
        return Position3D(*(float(np.interp(t, times, self.positions[:, axis])) for axis in range(3)))

    def tick_count(self, rate_hz: float) -> int:
        return int(np.floor((self.end_us - self.start_us) * rate_hz / 1e6 + 1e-9)) + 1


def hover_trajectory(grid_points, frames_per_point: int, frame_interval_us: int = 20_000,
                     start_time_us: int = 0, transit_us: int = 0) -> Trajectory:
    """飞到网格点 -> 悬停采集 frames_per_point 帧 -> 飞往下一点"""
    if frames_per_point < 1:
        raise InputError("frames_per_point 必须 >= 1")
    times, points = [], []
    t = start_time_us
    dwell = (frames_per_point - 1) * frame_interval_us
    for point in grid_points:
        times.extend([t, t + dwell])
        points.extend([point, point])
        t += dwell + frame_interval_us + transit_us
    return Trajectory(np.array(times), np.array(points, dtype=np.float64))


def write_trajectory_csv(path: str | Path, trajectory: Trajectory) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_COLUMNS)
        for t, (x, y, z) in zip(trajectory.timestamps_us, trajectory.positions):
            writer.writerow([int(t), repr(float(x)), repr(float(y)), repr(float(z))])
    return path


def read_trajectory_csv(path: str | Path) -> Trajectory:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"轨迹文件不存在: {path}")
    times, points = [], []
    with path.open('r', newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in TRAJECTORY_COLUMNS):
            raise InputError(f"{path}: 轨迹 CSV 需要列 {TRAJECTORY_COLUMNS}")
        for line, row in enumerate(reader, start=2):
            try:
                times.append(int(row['timestamp_us']))
                points.append((float(row['x']), float(row['y']), float(row['z'])))
            except (TypeError, ValueError):
                raise InputError(f"{path}:{line}: 无法解析轨迹行")
    return Trajectory(np.array(times, dtype=np.int64), np.array(points, dtype=np.float64).reshape(-1, 3))
