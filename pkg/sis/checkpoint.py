# sis/checkpoint.py
"""SISM 二进制检查点：头部（魔数、版本、SisConfig、回归头名称）+ 命名张量序列，小端序"""
from __future__ import annotations

import os
import struct

import numpy as np

from csi_core.errors import InputError

from .config import SisConfig
from .params import SisParams, params_from_tensors

MAGIC = b'SISM'
VERSION = 2

_HEAD = struct.Struct('<4sH')
# f, f_h, S, N_train, 隐藏层数
_DIMS = struct.Struct('<IIHIH')
_LAMBDAS = struct.Struct('<ddd')


def _pack_str(value: str) -> bytes:
    raw = value.encode('utf-8')
    return struct.pack('<H', len(raw)) + raw


def encode_checkpoint(params: SisParams, config: SisConfig) -> bytes:
    parts = [
        _HEAD.pack(MAGIC, VERSION),
        _DIMS.pack(config.f, config.f_h, config.S, config.N_train, len(config.hidden_dims)),
        struct.pack(f"<{len(config.hidden_dims)}I", *config.hidden_dims),
        _LAMBDAS.pack(config.lambda_s, config.lambda_v, config.lambda_fuse),
        _pack_str(config.activation),
        struct.pack('<BH', int(config.sensor_context), len(config.heads)),
        *(_pack_str(name) for name in config.heads),
    ]
    tensors = params.named_tensors()
    if params.scaler is not None:
        tensors.update(params.scaler.named_tensors())
    parts.append(struct.pack('<I', len(tensors)))
    for name, value in tensors.items():
        value = np.ascontiguousarray(value, dtype='<f8')
        parts.append(_pack_str(name))
        parts.append(struct.pack(f"<B{value.ndim}I", value.ndim, *value.shape))
        parts.append(value.tobytes())
    return b''.join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise InputError("检查点文件被截断")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str | struct.Struct):
        layout = fmt if isinstance(fmt, struct.Struct) else struct.Struct(fmt)
        return layout.unpack(self.take(layout.size))

    def string(self) -> str:
        (length,) = self.unpack('<H')
        return self.take(length).decode('utf-8')


def decode_checkpoint(data: bytes) -> tuple[SisParams, SisConfig]:
    reader = _Reader(data)
    magic, version = reader.unpack(_HEAD)
    if magic != MAGIC:
        raise InputError(f"不是 SISM 检查点: 魔数 {magic!r}")
    if version != VERSION:
        raise InputError(f"不支持的检查点版本: {version}")
    f, f_h, sensors, n_train, n_hidden = reader.unpack(_DIMS)
    hidden = list(reader.unpack(f"<{n_hidden}I")) if n_hidden else []
    lambda_s, lambda_v, lambda_fuse = reader.unpack(_LAMBDAS)
    activation = reader.string()
    sensor_context, head_count = reader.unpack('<BH')
    heads = [reader.string() for _ in range(head_count)]
    config = SisConfig(
        f=f, f_h=f_h, hidden_dims=hidden, S=sensors, N_train=n_train,
        lambda_s=lambda_s, lambda_v=lambda_v, lambda_fuse=lambda_fuse, activation=activation,
        sensor_context=bool(sensor_context), heads=heads,
    )

    (count,) = reader.unpack('<I')
    tensors = {}
    for _ in range(count):
        name = reader.string()
        (rank,) = reader.unpack('<B')
        dims = reader.unpack(f"<{rank}I") if rank else ()
        size = int(np.prod(dims)) if dims else 1
        values = np.frombuffer(reader.take(8 * size), dtype='<f8').astype(np.float64)
        tensors[name] = values.reshape(dims)
    if reader.offset != len(data):
        raise InputError("检查点末尾存在多余字节")
    # 形状与配置不符时 params_from_tensors 抛出 InputShapeError
    return params_from_tensors(config, tensors), config


def save_checkpoint(path: str, params: SisParams, config: SisConfig) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(encode_checkpoint(params, config))


def load_checkpoint(path: str) -> tuple[SisParams, SisConfig]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"检查点不存在: {path}")
    with open(path, 'rb') as f:
        return decode_checkpoint(f.read())
