# csi_core/dataset_io.py
"""JSON Lines 数据集读写，每行一个 LabeledSample"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

from .errors import InputError
from .metrics import MetricsReport
from .types import CsiFrame, Dataset, LabeledSample, Position3D

_SEPARATORS = (',', ':')


def frame_to_record(frame: CsiFrame) -> dict[str, Any]:
    return {
        'sensor_id': frame.sensor_id,
        'seq': frame.seq,
        'timestamp_us': frame.timestamp_us,
        'agc_gain_db': float(frame.agc_gain_db),
        're': [float(v) for v in frame.subcarriers.real],
        'im': [float(v) for v in frame.subcarriers.imag],
    }


def frame_from_record(record: dict[str, Any]) -> CsiFrame:
    try:
        re = np.asarray(record['re'], dtype=np.float64)
        im = np.asarray(record['im'], dtype=np.float64)
        if re.shape != im.shape:
            raise InputError(f"实部与虚部长度不一致: {re.shape} vs {im.shape}")
        return CsiFrame(
            sensor_id=int(record['sensor_id']),
            seq=int(record['seq']),
            timestamp_us=int(record['timestamp_us']),
            agc_gain_db=float(record['agc_gain_db']),
            subcarriers=re + 1j * im,
        )
    except InputError:
        raise
    except KeyError as e:
        raise InputError(f"帧记录缺少字段: {str(e)}")
    except (TypeError, ValueError) as e:
        raise InputError(f"帧记录字段类型错误: {str(e)}")


def sample_to_record(sample: LabeledSample) -> dict[str, Any]:
    record = {
        'sensor_frames': [frame_to_record(frame) for frame in sample.frames],
        'truth': [sample.truth.x, sample.truth.y, sample.truth.z],
    }
    if sample.missing_sensors:
        record['missing'] = list(sample.missing_sensors)
    return record


def sample_from_record(record: dict[str, Any]) -> LabeledSample:
    try:
        frames = [frame_from_record(item) for item in record['sensor_frames']]
        truth = record['truth']
    except KeyError as e:
        raise InputError(f"样本记录缺少字段: {str(e)}")
    if not isinstance(truth, list) or len(truth) != 3:
        raise InputError(f"truth 应为 3 个坐标，实际为 {truth!r}")
    try:
        truth = Position3D.from_array(truth)
    except (TypeError, ValueError):
        raise InputError(f"truth 坐标不是数值: {truth!r}")
    return LabeledSample(frames=tuple(frames), truth=truth, missing_sensors=tuple(record.get('missing', ())))


def dumps_line(record: dict[str, Any]) -> str:
    return json.dumps(record, separators=_SEPARATORS, ensure_ascii=False)


def write_dataset(path: str | Path, dataset: Dataset) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as fh:
        for sample in dataset.samples:
            fh.write(dumps_line(sample_to_record(sample)))
            fh.write('\n')
    return path


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"文件不存在: {path}")
    with path.open('r', encoding='utf-8') as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as e:
                raise InputError(f"{path}:{line_no}: JSON 解析失败: {str(e)}")


def read_dataset(path: str | Path) -> Dataset:
    samples = []
    for line_no, record in iter_jsonl(path):
        try:
            samples.append(sample_from_record(record))
        except InputError as e:
            raise InputError(f"{path}:{line_no}: {str(e)}")
    return Dataset(samples, meta={'source': str(path)})


def write_frames(path: str | Path, frames: Iterable[CsiFrame]) -> int:
    count = 0
    with Path(path).open('w', encoding='utf-8', newline='\n') as fh:
        for frame in frames:
            fh.write(dumps_line(frame_to_record(frame)))
            fh.write('\n')
            count += 1
    return count


def read_frames(path: str | Path) -> list[CsiFrame]:
    return [frame_from_record(record) for _, record in iter_jsonl(path)]


def write_metrics(path: str | Path, report: MetricsReport) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path
