# csi_core/types.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError, InputShapeError

# 默认子载波数
DEFAULT_SUBCARRIERS = 50


@dataclass(frozen=True)
class Position3D:
    """三维位置，单位米"""
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise DomainError(f"坐标必须为有限值: ({self.x}, {self.y}, {self.z})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> Position3D:
        x, y, z = (float(v) for v in values)
        return cls(x, y, z)


@dataclass(frozen=True, eq=False)
class CsiFrame:
    """单次 CSI 快照：子载波复数响应 + AGC 增益"""
    sensor_id: int
    seq: int
    timestamp_us: int
    agc_gain_db: float
    subcarriers: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.subcarriers, dtype=np.complex128).reshape(-1)
        values.flags.writeable = False
        object.__setattr__(self, 'subcarriers', values)
        if not math.isfinite(self.agc_gain_db):
            raise DomainError(f"传感器 {self.sensor_id} 的 AGC 增益非有限值: {self.agc_gain_db}")
        if self.sensor_id < 0 or self.seq < 0:
            raise DomainError("sensor_id 与 seq 必须为非负整数")

    @property
    def n_sub(self) -> int:
        return int(self.subcarriers.shape[0])

    def with_subcarriers(self, subcarriers: np.ndarray, agc_gain_db: float | None = None) -> CsiFrame:
        return CsiFrame(
            sensor_id=self.sensor_id,
            seq=self.seq,
            timestamp_us=self.timestamp_us,
            agc_gain_db=self.agc_gain_db if agc_gain_db is None else agc_gain_db,
            subcarriers=subcarriers,
        )

    def same_values(self, other: CsiFrame) -> bool:
        return (
            self.sensor_id == other.sensor_id
            and self.seq == other.seq
            and self.timestamp_us == other.timestamp_us
            and self.agc_gain_db == other.agc_gain_db
            and np.array_equal(self.subcarriers, other.subcarriers)
        )


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """同一采集时刻的全部传感器帧 + 真实位置

    missing_sensors 非空时，对应槽位是全零占位帧（见 sensornet.join）。
    """
    frames: tuple[CsiFrame, ...]
    truth: Position3D
    missing_sensors: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'frames', tuple(self.frames))
        if not self.frames:
            raise InputShapeError("样本至少包含一个传感器帧")
        counts = {frame.n_sub for frame in self.frames}
        if len(counts) != 1:
            raise InputShapeError(f"同一样本内子载波数不一致: {sorted(counts)}")

    @property
    def sensor_count(self) -> int:
        return len(self.frames)

    @property
    def subcarrier_count(self) -> int:
        return self.frames[0].n_sub


@dataclass(eq=False)
class Dataset:
    """N 个样本，S、f 在全部样本间一致"""
    samples: list[LabeledSample]
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.samples = list(self.samples)
        if not self.samples:
            return
        shape = (self.samples[0].sensor_count, self.samples[0].subcarrier_count)
        for index, sample in enumerate(self.samples):
            if (sample.sensor_count, sample.subcarrier_count) != shape:
                raise InputShapeError(
                    f"第 {index} 个样本形状 {(sample.sensor_count, sample.subcarrier_count)} 与首个样本 {shape} 不一致"
                )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def s(self) -> int:
        return self.samples[0].sensor_count if self.samples else 0

    @property
    def f(self) -> int:
        return self.samples[0].subcarrier_count if self.samples else 0

    def truths(self) -> np.ndarray:
        """(N, 3) 真实位置矩阵"""
        if not self.samples:
            return np.zeros((0, 3))
        return np.stack([sample.truth.as_array() for sample in self.samples])

    def subset(self, indices) -> Dataset:
        return Dataset([self.samples[int(i)] for i in indices], dict(self.meta))
