# tools/base.py
"""子命令基类：每个命令产出一串输出（终端文本、JSON 记录或写入结果目录的文件）"""
from __future__ import annotations

import json
from abc import ABC, abstractmethod
from collections.abc import Iterator
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

from csi_core.errors import InputError
from utils.config_loader import RunConfig
from utils.fingerprint import config_fingerprint


class OutputKind(str, Enum):
    TEXT = 'text'
    RECORD = 'record'
    ARTIFACT = 'artifact'


@dataclass
class Output:
    """TEXT / RECORD 打印到标准输出；ARTIFACT 以 filename 写入结果目录"""
    kind: OutputKind
    body: Any
    filename: str | None = None


@dataclass
class CommandContext:
    """一次命令调用的共享上下文"""
    config: RunConfig
    seed: int
    out_dir: Path
    config_path: str | None = None


class Command(ABC):
    def __init__(self, context: CommandContext):
        self.context = context

    @property
    def config(self) -> RunConfig:
        return self.context.config

    @property
    def seed(self) -> int:
        return self.context.seed

    @property
    def out_dir(self) -> Path:
        return self.context.out_dir

    @abstractmethod
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        pass

    def text(self, text: str) -> Output:
        return Output(OutputKind.TEXT, text)

    def record(self, data: dict[str, Any]) -> Output:
        return Output(OutputKind.RECORD, data)

    def artifact(self, filename: str, data: Any) -> Output:
        """str 原样写出，bytes 按字节写出，其余对象序列化为 JSON"""
        if isinstance(data, str):
            body = data.encode('utf-8')
        elif isinstance(data, bytes):
            body = data
        else:
            body = (json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + '\n').encode('utf-8')
        return Output(OutputKind.ARTIFACT, body, filename)

    def fingerprint(self, command: str, args: dict[str, Any], *extra: Any) -> str:
        """配置 + 种子 + 命令参数的指纹；路径类参数不参与"""
        stable = {k: v for k, v in args.items() if k not in _PATH_ARGUMENTS}
        return config_fingerprint(command, self.config, self.seed, stable, *extra)

    def fingerprint_artifact(self, command: str, fingerprint: str) -> Output:
        return self.artifact(
            f"{command}.fingerprint.json",
            {'command': command, 'seed': self.seed, 'config_fingerprint': fingerprint},
        )


_PATH_ARGUMENTS = {'out', 'input', 'train', 'test', 'data', 'raw', 'test_raw', 'checkpoint',
                   'frames', 'trajectory', 'output', 'state_db', 'collector_addr'}


def parse_list(value: str | None, cast=str) -> list | None:
    """'0.25,0.5' -> [0.25, 0.5]；空值返回 None"""
    if value is None or str(value).strip() == '':
        return None
    return [cast(part.strip()) for part in str(value).split(',') if part.strip()]


def parse_address(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(':')
    if not host or not port.isdigit():
        raise InputError(f"地址格式应为 host:port，实际为 {value}")
    return host, int(port)
