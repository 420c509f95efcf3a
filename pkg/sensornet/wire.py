# sensornet/wire.py
"""CIUW 数据报编解码：24 字节头 + n_sub 对 i16 定点复数 + crc32，全部小端序"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from csi_core.types import CsiFrame

MAGIC = b'CIUW'
VERSION = 1
MAX_SUBCARRIERS = 4096
FIXED_POINT_SCALE = 256.0

# magic, version, sensor_id, seq, timestamp_us, agc_gain_centidB, n_sub
_HEADER = struct.Struct('<4sHHIQhH')
_CRC = struct.Struct('<I')
HEADER_LEN = _HEADER.size
MIN_FRAME_LEN = HEADER_LEN + _CRC.size

_I16_MIN, _I16_MAX = -32768, 32767


class WireError(ValueError):
    """数据报无法解码"""


class ProtocolError(WireError):
    """魔数或版本不符"""


class TruncationError(WireError):
    """长度不足或与 n_sub 不符"""


class CorruptionError(WireError):
    """CRC 校验失败"""


class FrameSizeError(WireError):
    """子载波数超过上限"""


def frame_length(n_sub: int) -> int:
    return HEADER_LEN + 4 * n_sub + _CRC.size


@dataclass(frozen=True)
class EncodedFrame:
    data: bytes
    saturated: bool


def encode_with_status(frame: CsiFrame) -> EncodedFrame:
    n_sub = frame.n_sub
    if n_sub > MAX_SUBCARRIERS:
        raise FrameSizeError(f"子载波数 {n_sub} 超过上限 {MAX_SUBCARRIERS}")
    centidb = int(round(frame.agc_gain_db * 100))
    if not _I16_MIN <= centidb <= _I16_MAX:
        raise WireError(f"AGC 增益 {frame.agc_gain_db} dB 超出 i16 centidB 范围")

    pairs = np.empty((n_sub, 2), dtype=np.float64)
    pairs[:, 0] = frame.subcarriers.real
    pairs[:, 1] = frame.subcarriers.imag
    scaled = np.rint(pairs * FIXED_POINT_SCALE)
    saturated = bool(np.any(scaled < _I16_MIN) or np.any(scaled > _I16_MAX))
    payload = np.clip(scaled, _I16_MIN, _I16_MAX).astype('<i2').tobytes()

    body = _HEADER.pack(MAGIC, VERSION, frame.sensor_id, frame.seq, frame.timestamp_us, centidb, n_sub) + payload
    return EncodedFrame(body + _CRC.pack(zlib.crc32(body) & 0xFFFFFFFF), saturated)


def encode_frame(frame: CsiFrame) -> bytes:
    return encode_with_status(frame).data


def decode_frame(data: bytes) -> CsiFrame:
    """先校验 CRC，再校验魔数、版本与长度"""
    data = bytes(data)
    if len(data) < MIN_FRAME_LEN:
        raise TruncationError(f"数据报长度 {len(data)} 小于最小帧长 {MIN_FRAME_LEN}")
    body, (crc,) = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise CorruptionError("CRC 校验失败")

    magic, version, sensor_id, seq, timestamp_us, centidb, n_sub = _HEADER.unpack_from(body, 0)
    if magic != MAGIC:
        raise ProtocolError(f"魔数错误: {magic!r}")
    if version != VERSION:
        raise ProtocolError(f"不支持的协议版本: {version}")
    if n_sub > MAX_SUBCARRIERS:
        raise FrameSizeError(f"子载波数 {n_sub} 超过上限 {MAX_SUBCARRIERS}")
    if len(data) != frame_length(n_sub):
        raise TruncationError(f"数据报长度 {len(data)} 与 n_sub={n_sub} 要求的 {frame_length(n_sub)} 不一致")

    pairs = np.frombuffer(body, dtype='<i2', offset=HEADER_LEN).astype(np.float64).reshape(n_sub, 2)
    pairs /= FIXED_POINT_SCALE
    return CsiFrame(
        sensor_id=sensor_id,
        seq=seq,
        timestamp_us=timestamp_us,
        agc_gain_db=centidb / 100.0,
        subcarriers=pairs[:, 0] + 1j * pairs[:, 1],
    )


def end_marker(sensor_id: int, generated: int, timestamp_us: int = 0) -> bytes:
    """n_sub = 0 的结束帧，seq 为该节点生成的帧总数"""
    return encode_frame(CsiFrame(sensor_id, generated, timestamp_us, 0.0, np.zeros(0, dtype=np.complex128)))


def is_end_marker(frame: CsiFrame) -> bool:
    return frame.n_sub == 0
