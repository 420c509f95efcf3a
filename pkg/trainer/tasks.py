# trainer/tasks.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from csi_core.errors import InputError
from sis.masks import SensorMask
from utils.rng import substream

# 报告中的传感器组合顺序
DEFAULT_SENSOR_CONFIGS = ['3', '1', '1-3', '1-2-3']
DEFAULT_FRACTIONS = [0.25, 0.5, 0.75, 1.0]


@dataclass(frozen=True)
class TaskSpec:
    """一个训练任务：传感器子集 × 训练样本比例"""
    name: str
    mask: SensorMask
    sample_fraction: float
    sample_seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.sample_fraction <= 1.0:
            raise InputError(f"任务 {self.name} 的样本比例必须位于 (0, 1]，实际为 {self.sample_fraction}")

    def sample_indices(self, n: int) -> np.ndarray:
        """固定排列的前 ceil(fraction·n) 个样本，同一 sample_seed 下比例越小子集越小且互相嵌套"""
        permutation = substream(self.sample_seed, 'task-permutation').permutation(n)
        count = max(1, math.ceil(self.sample_fraction * n - 1e-9))
        return np.sort(permutation[:count])

    def describe(self) -> dict:
        return {
            'name': self.name,
            'mask': self.mask.label,
            'sample_fraction': self.sample_fraction,
            'sample_seed': self.sample_seed,
        }


def task_name(mask: SensorMask, fraction: float) -> str:
    return f"{mask.label}@{fraction:.2f}"


def build_tasks(
    sensor_configs: list[str | SensorMask],
    fractions: list[float],
    sensor_count: int = 3,
    sample_seed: int = 0,
) -> list[TaskSpec]:
    """传感器子集 × 样本比例的笛卡尔积，命名为 '<subset>@<fraction>'"""
    if not sensor_configs or not fractions:
        raise InputError("传感器组合与样本比例列表都不能为空")
    tasks = []
    for config in sensor_configs:
        mask = config if isinstance(config, SensorMask) else SensorMask.from_label(config, sensor_count)
        for fraction in fractions:
            tasks.append(TaskSpec(task_name(mask, fraction), mask, float(fraction), sample_seed))
    names = [task.name for task in tasks]
    if len(set(names)) != len(names):
        raise InputError(f"任务名称重复: {names}")
    return tasks


class TrainSchedule(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    tasks: list[TaskSpec]
    epochs: int = 400
    batch_size: int = 32
    task_sampling: Literal['round_robin', 'proportional'] = 'round_robin'
    lr: float = 1e-4
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8

    @field_validator('task_sampling', mode='before')
    @classmethod
    def _normalize_policy(cls, value):
        return value.replace('-', '_') if isinstance(value, str) else value

    @model_validator(mode='after')
    def _check(self) -> TrainSchedule:
        if not self.tasks:
            raise ValueError("训练计划至少包含一个任务")
        names = [task.name for task in self.tasks]
        if len(set(names)) != len(names):
            raise ValueError(f"任务名称重复: {names}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs 与 batch_size 必须 >= 1")
        if self.lr <= 0:
            raise ValueError("学习率必须为正")
        return self

    def with_tasks(self, tasks: list[TaskSpec]) -> TrainSchedule:
        return self.model_copy(update={'tasks': tasks})

    def describe(self) -> dict:
        return {
            'tasks': [task.describe() for task in self.tasks],
            'epochs': self.epochs,
            'batch_size': self.batch_size,
            'task_sampling': self.task_sampling,
            'lr': self.lr,
            'betas': list(self.betas),
            'eps': self.eps,
        }


class ScheduleSettings(BaseModel):
    """配置文件中的 schedule 段，按数据集的传感器数展开为 TrainSchedule"""
    model_config = ConfigDict(extra='forbid')

    sensor_configs: list[str] = DEFAULT_SENSOR_CONFIGS
    fractions: list[float] = [1.0]
    epochs: int = 400
    batch_size: int = 32
    task_sampling: Literal['round_robin', 'proportional'] = 'round_robin'
    lr: float = 1e-4
    sample_seed: int = 0

    @field_validator('task_sampling', mode='before')
    @classmethod
    def _normalize_policy(cls, value):
        return value.replace('-', '_') if isinstance(value, str) else value

    @field_validator('fractions')
    @classmethod
    def _check_fractions(cls, value: list[float]) -> list[float]:
        if not value or any(not 0.0 < f <= 1.0 for f in value):
            raise ValueError("fractions 中每个值必须位于 (0, 1]")
        return value

    @field_validator('epochs', 'batch_size')
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("必须 >= 1")
        return value

    def build(self, sensor_count: int, sensor_configs: list[str] | None = None,
              fractions: list[float] | None = None) -> TrainSchedule:
        tasks = build_tasks(
            sensor_configs or self.sensor_configs,
            fractions or self.fractions,
            sensor_count,
            self.sample_seed,
        )
        return TrainSchedule(
            tasks=tasks,
            epochs=self.epochs,
            batch_size=self.batch_size,
            task_sampling=self.task_sampling,
            lr=self.lr,
        )
