# synth/scene.py
from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from csi_core.types import Position3D

Point = tuple[float, float, float]


class Room(BaseModel):
    """轴对齐房间，单位米"""
    model_config = ConfigDict(extra='forbid')

    x: tuple[float, float] = (0.0, 5.0)
    y: tuple[float, float] = (0.0, 5.0)
    z: tuple[float, float] = (0.0, 2.5)

    @model_validator(mode='after')
    def _check_extents(self) -> Room:
        for axis in ('x', 'y', 'z'):
            low, high = getattr(self, axis)
            if not low < high:
                raise ValueError(f"房间 {axis} 范围必须满足 min < max，实际为 ({low}, {high})")
        return self

    def contains(self, point, tol: float = 1e-9) -> bool:
        px, py, pz = (point.x, point.y, point.z) if isinstance(point, Position3D) else point
        return (
            self.x[0] - tol <= px <= self.x[1] + tol
            and self.y[0] - tol <= py <= self.y[1] + tol
            and self.z[0] - tol <= pz <= self.z[1] + tol
        )

    def clip(self, point: Point) -> Point:
        return (
            min(max(point[0], self.x[0]), self.x[1]),
            min(max(point[1], self.y[0]), self.y[1]),
            min(max(point[2], self.z[0]), self.z[1]),
        )


def _default_sensors() -> list[Point]:
    # 三个传感器呈三角形布置在 2.5 m 高的天花板
    return [(0.5, 0.5, 2.5), (4.5, 0.5, 2.5), (2.5, 4.5, 2.5)]


class SceneConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    room: Room = Field(default_factory=Room)
    sensor_positions: list[Point] = Field(default_factory=_default_sensors)
    subcarrier_count: int = 50
    carrier_freq_hz: float = 2.437e9
    subcarrier_spacing_hz: float = 312_500.0
    pathloss_exponent: float = 2.2
    ref_loss_db: float = 40.0
    tx_power_db: float = 60.0
    multipath_taps: int = 3
    rician_k_db: float = 6.0
    # -inf 表示关闭噪声
    noise_floor_db: float = -15.0
    agc_enabled: bool = True
    agc_target_db: float = 15.0
    agc_range_db: tuple[float, float] = (-30.0, 30.0)
    agc_step_db: float = 1.0
    agc_jitter_db: float = 2.0
    rng_seed: int = 0

    @field_validator('subcarrier_count')
    @classmethod
    def _check_subcarriers(cls, value: int) -> int:
        if value < 1:
            raise ValueError("subcarrier_count 必须 >= 1")
        return value

    @field_validator('pathloss_exponent')
    @classmethod
    def _check_exponent(cls, value: float) -> float:
        if not 1.5 <= value <= 6.0:
            raise ValueError("pathloss_exponent 必须位于 [1.5, 6]")
        return value

    @field_validator('multipath_taps')
    @classmethod
    def _check_taps(cls, value: int) -> int:
        if not 0 <= value <= 6:
            raise ValueError("multipath_taps 必须位于 [0, 6]（六个反射面）")
        return value

    @field_validator('agc_step_db')
    @classmethod
    def _check_step(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("agc_step_db 必须 > 0")
        return value

    @field_validator('agc_jitter_db')
    @classmethod
    def _check_jitter(cls, value: float) -> float:
        if value < 0:
            raise ValueError("agc_jitter_db 不能为负")
        return value

    @field_validator('noise_floor_db')
    @classmethod
    def _check_noise(cls, value: float) -> float:
        if math.isnan(value) or value == math.inf:
            raise ValueError("noise_floor_db 必须为有限值或 -inf")
        return value

    @model_validator(mode='after')
    def _check_scene(self) -> SceneConfig:
        if not self.sensor_positions:
            raise ValueError("至少需要一个传感器")
        low, high = self.agc_range_db
        if low > high:
            raise ValueError(f"agc_range_db 必须满足 min <= max，实际为 ({low}, {high})")
        for index, position in enumerate(self.sensor_positions):
            if not self.room.contains(position):
                raise ValueError(f"传感器 {index} 位置 {position} 不在房间内")
        return self

    @property
    def sensor_count(self) -> int:
        return len(self.sensor_positions)


class GridPlan(BaseModel):
    grid_points: list[Point]
    frames_per_point: int = 20
    hover_jitter_m: float = 0.005
    start_time_us: int = 0
    # 50 Hz 采样
    frame_interval_us: int = 20_000

    @field_validator('frames_per_point')
    @classmethod
    def _check_frames(cls, value: int) -> int:
        if value < 1:
            raise ValueError("frames_per_point 必须为正整数")
        return value

    @field_validator('hover_jitter_m')
    @classmethod
    def _check_hover(cls, value: float) -> float:
        if value < 0:
            raise ValueError("hover_jitter_m 不能为负")
        return value

    @field_validator('grid_points')
    @classmethod
    def _check_points(cls, value: list[Point]) -> list[Point]:
        if not value:
            raise ValueError("grid_points 不能为空")
        return value

    @classmethod
    def build(cls, room: Room, grid_n: int = 5, heights: tuple[float, ...] = (0.6, 1.3, 2.0),
              frames_per_point: int = 20, margin_m: float = 0.5, **kwargs) -> GridPlan:
        """grid_n x grid_n 平面网格，逐高度展开"""
        if grid_n < 1:
            raise ValueError("grid_n 必须为正整数")
        xs = _linspace(room.x[0] + margin_m, room.x[1] - margin_m, grid_n)
        ys = _linspace(room.y[0] + margin_m, room.y[1] - margin_m, grid_n)
        points = [(x, y, z) for z in heights for y in ys for x in xs]
        return cls(grid_points=points, frames_per_point=frames_per_point, **kwargs)

    @property
    def sample_count(self) -> int:
        return len(self.grid_points) * self.frames_per_point


def _linspace(low: float, high: float, count: int) -> list[float]:
    if count == 1:
        return [(low + high) / 2.0]
    step = (high - low) / (count - 1)
    return [round(low + i * step, 9) for i in range(count)]
