# utils/config_loader.py
"""YAML 运行配置：PyYAML 解析 + pydantic 校验，错误定位到文件行号"""
from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from yaml.nodes import MappingNode, SequenceNode

from csi_core.errors import ConfigError
from dsp.hampel import HampelParams
from sensornet.faults import FaultProfile
from sis.config import SisConfig
from synth.scene import GridPlan, SceneConfig
from trainer.tasks import ScheduleSettings


class PlanSettings(BaseModel):
    """悬停网格：grid_n × grid_n × len(heights) 个点，每点 frames_per_point 帧"""
    model_config = ConfigDict(extra='forbid')

    grid_n: int = 5
    heights: list[float] = [0.6, 1.3, 2.0]
    margin_m: float = 0.5
    frames_per_point: int = Field(default=20, ge=1)
    hover_jitter_m: float = Field(default=0.005, ge=0)
    frame_interval_us: int = Field(default=20_000, ge=1)
    start_time_us: int = Field(default=0, ge=0)

    def build(self, scene: SceneConfig) -> GridPlan:
        return GridPlan.build(
            scene.room,
            grid_n=self.grid_n,
            heights=tuple(self.heights),
            frames_per_point=self.frames_per_point,
            margin_m=self.margin_m,
            hover_jitter_m=self.hover_jitter_m,
            frame_interval_us=self.frame_interval_us,
            start_time_us=self.start_time_us,
        )


class SpikeSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    rate: float = Field(default=0.0, ge=0, le=1)
    gain: float = Field(default=10.0, gt=0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    seed: int = Field(default=0, ge=0)
    scene: SceneConfig = Field(default_factory=SceneConfig)
    plan: PlanSettings = Field(default_factory=PlanSettings)
    spikes: SpikeSettings = Field(default_factory=SpikeSettings)
    hampel: HampelParams = Field(default_factory=HampelParams)
    model: SisConfig = Field(default_factory=SisConfig)
    schedule: ScheduleSettings = Field(default_factory=ScheduleSettings)
    faults: FaultProfile = Field(default_factory=FaultProfile)

    def seeded_scene(self) -> SceneConfig:
        """全局种子覆盖场景种子"""
        return self.scene.model_copy(update={'rng_seed': self.seed})

    def seeded_faults(self) -> FaultProfile:
        return self.faults.model_copy(update={'rng_seed': self.seed})


def _node_line(root, loc: tuple[Any, ...]) -> int | None:
    if root is None:
        return None
    node, line = root, root.start_mark.line + 1
    for key in loc:
        if isinstance(node, MappingNode):
            match = next(((k, v) for k, v in node.value if k.value == str(key)), None)
            if match is None:
                break
            node, line = match[1], match[0].start_mark.line + 1
        elif isinstance(node, SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def parse_run_config(text: str, source: str = '<config>') -> RunConfig:
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigError(f"YAML 语法错误: {getattr(e, 'problem', None) or e}", source,
                          None if mark is None else mark.line + 1)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("配置文件顶层必须是映射", source, 1)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        loc = tuple(part for part in error['loc'] if not (isinstance(part, str) and part.startswith('function-')))
        dotted = '.'.join(str(part) for part in loc) or '<root>'
        raise ConfigError(f"{dotted}: {error['msg']}", source, _node_line(root, loc))


def load_run_config(path: str | Path | None) -> RunConfig:
    """path 为空时返回全默认配置"""
    if not path:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"配置文件不存在: {path}")
    return parse_run_config(path.read_text(encoding='utf-8'), str(path))
