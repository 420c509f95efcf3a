# trainer/experiments.py
"""消融、样本比例扫描与传感器配置对比；每个单元使用同一种子"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from csi_core.errors import InputError
from csi_core.metrics import MetricsReport
from csi_core.types import Dataset
from dsp.hampel import HampelParams
from dsp.pipeline import AmplitudeMatrix, preprocess
from sis.config import SisConfig
from sis.masks import SensorMask
from utils.rng import substream

from .evaluator import evaluate, mean_baseline, require_labels
from .tasks import DEFAULT_SENSOR_CONFIGS, TrainSchedule, build_tasks, task_name
from .trainer import ExperimentResult, fit_config, train

logger = logging.getLogger('experiments')

ABLATION_CELLS = [(False, False), (True, False), (False, True), (True, True)]


def split_dataset(matrix: AmplitudeMatrix, test_fraction: float = 0.2,
                  seed: int = 0) -> tuple[AmplitudeMatrix, AmplitudeMatrix]:
    """确定性随机划分；只有一个数据文件时使用"""
    if not 0.0 < test_fraction < 1.0:
        raise InputError(f"test_fraction 必须位于 (0, 1)，实际为 {test_fraction}")
    n = matrix.shape[0]
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n_test >= n:
        raise InputError(f"样本数 {n} 不足以按 {test_fraction} 划分训练/测试集")
    permutation = substream(seed, 'split').permutation(n)
    return matrix.subset(np.sort(permutation[n_test:])), matrix.subset(np.sort(permutation[:n_test]))


def full_mask_task(schedule: TrainSchedule, sensor_count: int) -> str:
    """评估主指标所用的全传感器任务名；计划中没有时取第一个任务"""
    full = SensorMask.full(sensor_count).label
    for task in schedule.tasks:
        if task.mask.label == full:
            return task.name
    return schedule.tasks[0].name


@dataclass
class AblationTable:
    """2×2 消融表：键为 (dac, hampel)"""
    cells: dict[tuple[bool, bool], MetricsReport]
    results: dict[tuple[bool, bool], ExperimentResult] = field(default_factory=dict)

    def best_cell(self) -> tuple[bool, bool]:
        return min(self.cells, key=lambda key: self.cells[key].lmse_m2)

    def rows(self) -> list[dict[str, Any]]:
        return [
            {'dac': dac, 'hampel': hampel, **self.cells[(dac, hampel)].to_dict()}
            for dac, hampel in ABLATION_CELLS if (dac, hampel) in self.cells
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            'cells': self.rows(),
            'fingerprints': {f"dac={d},hampel={h}": r.config_fingerprint for (d, h), r in self.results.items()},
        }


def ablation_grid(
    dataset_raw: Dataset,
    config: SisConfig,
    schedule: TrainSchedule,
    seed: int,
    test_raw: Dataset | None = None,
    hampel_params: HampelParams | None = None,
    test_fraction: float = 0.2,
) -> AblationTable:
    """DAC 开/关 × Hampel 开/关，四个单元用相同种子训练并在相同测试样本上评估"""
    table = AblationTable(cells={})
    for dac, hampel in ABLATION_CELLS:
        logger.info(f"消融单元 DAC={'开' if dac else '关'}, Hampel={'开' if hampel else '关'}")
        processed = preprocess(dataset_raw, enable_dac=dac, enable_hampel=hampel, hampel_params=hampel_params)
        if test_raw is None:
            train_matrix, test_matrix = split_dataset(processed, test_fraction, seed)
        else:
            train_matrix = processed
            test_matrix = preprocess(test_raw, enable_dac=dac, enable_hampel=hampel, hampel_params=hampel_params)
        _, result = train(train_matrix, schedule, fit_config(config, train_matrix, schedule), seed, test=test_matrix)
        table.cells[(dac, hampel)] = result.per_task[full_mask_task(schedule, processed.shape[1])]
        table.results[(dac, hampel)] = result
    return table


@dataclass
class SweepResult:
    """一次联合训练中各样本比例任务的指标；mask 为被扫描的传感器组合"""
    points: list[tuple[float, MetricsReport]]
    mask: str = ''
    result: ExperimentResult | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            'mask': self.mask,
            'points': [{'fraction': fraction, **report.to_dict()} for fraction, report in self.points],
            'config_fingerprint': None if self.result is None else self.result.config_fingerprint,
        }


def sample_sweep(
    train_matrix: AmplitudeMatrix,
    test_matrix: AmplitudeMatrix,
    config: SisConfig,
    schedule: TrainSchedule,
    fractions: list[float],
    seed: int,
) -> SweepResult:
    """传感器组合 × 样本比例的全部任务只训练一个模型，再逐个比例评估全传感器任务

    计划中没有全传感器组合时扫描最后一个组合。
    """
    if not fractions:
        raise InputError("fractions 不能为空")
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise InputError(f"fractions 中每个值必须位于 (0, 1]: {fractions}")
    if list(fractions) != sorted(fractions):
        raise InputError(f"fractions 必须升序: {fractions}")

    sensor_count = train_matrix.shape[1]
    masks = list(dict.fromkeys(task.mask for task in schedule.tasks))
    full = SensorMask.full(sensor_count)
    swept = full if full in masks else masks[-1]
    tasks = build_tasks(masks, fractions, sensor_count, schedule.tasks[0].sample_seed)
    joint = schedule.with_tasks(tasks)
    logger.info(f"样本比例扫描: {len(masks)} 个传感器组合 × {len(fractions)} 个比例 = {len(tasks)} 个任务")

    _, result = train(train_matrix, joint, fit_config(config, train_matrix, joint), seed, test=test_matrix)
    points = [(fraction, result.per_task[task_name(swept, fraction)]) for fraction in fractions]
    for fraction, report in points:
        logger.info(f"比例 {fraction:.2f}: MAE {report.mae_m:.4f} m")
    return SweepResult(points=points, mask=swept.label, result=result)


def study_sensor_configs(sensor_count: int) -> list[str]:
    """报告中的传感器组合顺序：3、1、1-3、全部"""
    if sensor_count < 3:
        raise InputError(f"传感器配置对比至少需要 3 个传感器，实际为 {sensor_count}")
    full = SensorMask.full(sensor_count).label
    return DEFAULT_SENSOR_CONFIGS[:3] + [full]


def single_task_baseline(
    train_matrix: AmplitudeMatrix,
    test_matrix: AmplitudeMatrix,
    config: SisConfig,
    schedule: TrainSchedule,
    seed: int,
    mask: SensorMask | None = None,
) -> tuple[MetricsReport, ExperimentResult]:
    """只在单个传感器组合上训练（默认全传感器、全部样本）"""
    mask = mask or SensorMask.full(train_matrix.shape[1])
    single = schedule.with_tasks(build_tasks([mask], [1.0], train_matrix.shape[1], schedule.tasks[0].sample_seed))
    _, result = train(train_matrix, single, fit_config(config, train_matrix, single), seed, test=test_matrix)
    return result.per_task[single.tasks[0].name], result


@dataclass
class SensorStudy:
    rows: list[tuple[str, MetricsReport]]
    joint: ExperimentResult
    single_task: MetricsReport | None = None
    baseline: MetricsReport | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            'rows': [{'sensors': label, **report.to_dict()} for label, report in self.rows],
            'single_task': None if self.single_task is None else self.single_task.to_dict(),
            'baseline': None if self.baseline is None else self.baseline.to_dict(),
            'config_fingerprint': self.joint.config_fingerprint,
        }


def sensor_study(
    train_matrix: AmplitudeMatrix,
    test_matrix: AmplitudeMatrix,
    config: SisConfig,
    schedule: TrainSchedule,
    seed: int,
    with_single_task: bool = True,
) -> SensorStudy:
    """一个模型联合训练 3、1、1-3、1-2-3 四个任务，再在每个掩码下评估"""
    sensor_count = train_matrix.shape[1]
    labels = study_sensor_configs(sensor_count)
    study = schedule.with_tasks(build_tasks(labels, [1.0], sensor_count, schedule.tasks[0].sample_seed))
    params, joint = train(train_matrix, study, fit_config(config, train_matrix, study), seed, test=test_matrix)
    rows = [(task.mask.label, evaluate(params, test_matrix, task.mask, task.name)) for task in study.tasks]

    single = None
    if with_single_task:
        single, _ = single_task_baseline(train_matrix, test_matrix, config, schedule, seed)
    baseline = mean_baseline(require_labels(train_matrix), require_labels(test_matrix))
    return SensorStudy(rows=rows, joint=joint, single_task=single, baseline=baseline)
