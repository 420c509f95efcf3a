# dsp/pipeline.py
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from csi_core.errors import DomainError, InputError, InputShapeError
from csi_core.types import Dataset

from .compensation import amplitude, compensate_frame
from .hampel import HampelParams, hampel_filter_matrix

logger = logging.getLogger('dsp')

MAGIC = b'CIUA'
VERSION = 1
# magic, version, flags, N, S, f
_HEADER = struct.Struct('<4sHHIHH')

FLAG_DAC = 0x1
FLAG_HAMPEL = 0x2
FLAG_LABELS = 0x4

STAGE_RAW = 'raw'
STAGE_DAC = 'dac'
STAGE_HAMPEL = 'hampel'


@dataclass(eq=False)
class AmplitudeMatrix:
    """N x S x f 非负幅度矩阵；labels 为 (N, 3) 真值，可缺省"""
    values: np.ndarray
    provenance: tuple[str, ...] = (STAGE_RAW,)
    labels: np.ndarray | None = None
    outlier_mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise InputShapeError(f"幅度矩阵必须为 N x S x f，实际为 {self.values.shape}")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise DomainError("幅度矩阵必须全部为有限非负值")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.float64)
            if self.labels.shape != (self.values.shape[0], 3):
                raise InputShapeError(f"标签形状 {self.labels.shape} 与样本数 {self.values.shape[0]} 不匹配")

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.values.shape)

    @property
    def flags(self) -> int:
        flags = 0
        if STAGE_DAC in self.provenance:
            flags |= FLAG_DAC
        if STAGE_HAMPEL in self.provenance:
            flags |= FLAG_HAMPEL
        if self.labels is not None:
            flags |= FLAG_LABELS
        return flags

    def subset(self, indices) -> AmplitudeMatrix:
        indices = np.asarray(indices, dtype=np.int64)
        return AmplitudeMatrix(
            values=self.values[indices],
            provenance=self.provenance,
            labels=None if self.labels is None else self.labels[indices],
        )


def preprocess(dataset: Dataset, enable_dac: bool = True, enable_hampel: bool = True,
               hampel_params: HampelParams | None = None) -> AmplitudeMatrix:
    """DAC -> 幅度 -> Hampel（沿时间轴，每个 (传感器, 子载波) 序列独立）"""
    if dataset.n == 0:
        raise InputError("数据集为空")

    values = np.empty((dataset.n, dataset.s, dataset.f), dtype=np.float64)
    for i, sample in enumerate(dataset.samples):
        for s, frame in enumerate(sample.frames):
            if enable_dac:
                frame = compensate_frame(frame)
            values[i, s] = amplitude(frame)

    provenance = [STAGE_RAW]
    if enable_dac:
        provenance.append(STAGE_DAC)

    outlier_mask = None
    if enable_hampel:
        flat = values.reshape(dataset.n, -1)
        filtered, mask = hampel_filter_matrix(flat, hampel_params)
        values = filtered.reshape(values.shape)
        outlier_mask = mask.reshape(values.shape)
        provenance.append(STAGE_HAMPEL)
        logger.info(f"Hampel 滤波标记离群点 {int(mask.sum())} 个（占比 {mask.mean():.4%}）")

    return AmplitudeMatrix(values=values, provenance=tuple(provenance),
                           labels=dataset.truths(), outlier_mask=outlier_mask)


def write_amplitude_matrix(path: str | Path, matrix: AmplitudeMatrix) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, s, f = matrix.shape
    with path.open('wb') as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, matrix.flags, n, s, f))
        fh.write(np.ascontiguousarray(matrix.values, dtype='<f4').tobytes())
        if matrix.labels is not None:
            fh.write(np.ascontiguousarray(matrix.labels, dtype='<f8').tobytes())
    return path


def read_amplitude_matrix(path: str | Path) -> AmplitudeMatrix:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"文件不存在: {path}")
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise InputError(f"{path}: 文件过短，不是有效的幅度矩阵")
    magic, version, flags, n, s, f = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise InputError(f"{path}: magic 不匹配")
    if version != VERSION:
        raise InputError(f"{path}: 不支持的版本 {version}")

    offset = _HEADER.size
    count = n * s * f
    expected = offset + 4 * count + (24 * n if flags & FLAG_LABELS else 0)
    if len(data) != expected:
        raise InputError(f"{path}: 长度 {len(data)} 与头部声明 {expected} 不一致")
    values = np.frombuffer(data, dtype='<f4', count=count, offset=offset).astype(np.float64).reshape(n, s, f)
    labels = None
    if flags & FLAG_LABELS:
        labels = np.frombuffer(data, dtype='<f8', count=3 * n, offset=offset + 4 * count).reshape(n, 3).copy()

    provenance = [STAGE_RAW]
    if flags & FLAG_DAC:
        provenance.append(STAGE_DAC)
    if flags & FLAG_HAMPEL:
        provenance.append(STAGE_HAMPEL)
    return AmplitudeMatrix(values=values, provenance=tuple(provenance), labels=labels)
