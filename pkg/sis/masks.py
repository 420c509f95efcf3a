# sis/masks.py
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from csi_core.errors import InputError


@dataclass(frozen=True)
class SensorMask:
    """长度为 S 的激活向量，至少一个传感器处于激活状态"""
    active: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, 'active', tuple(bool(a) for a in self.active))
        if not any(self.active):
            raise InputError("传感器掩码至少需要一个激活传感器")

    @classmethod
    def full(cls, sensor_count: int) -> SensorMask:
        return cls((True,) * sensor_count)

    @classmethod
    def from_label(cls, label: str, sensor_count: int) -> SensorMask:
        """'1-3' 表示第 1、3 个传感器（从 1 开始编号）"""
        label = label.strip()
        if label.lower() in ('all', '*'):
            return cls.full(sensor_count)
        try:
            members = {int(part) for part in label.split('-') if part.strip()}
        except ValueError:
            raise InputError(f"无法解析传感器组合: {label}")
        if not members or any(m < 1 or m > sensor_count for m in members):
            raise InputError(f"传感器组合 {label} 超出 1..{sensor_count}")
        return cls(tuple((i + 1) in members for i in range(sensor_count)))

    @property
    def label(self) -> str:
        return '-'.join(str(i + 1) for i, a in enumerate(self.active) if a)

    @property
    def size(self) -> int:
        return len(self.active)

    @property
    def count(self) -> int:
        return sum(self.active)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.active, dtype=bool)
