# trainer/trainer.py
from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from csi_core.errors import InputShapeError, NumericError, TrainingError
from csi_core.metrics import MetricsReport
from dsp.pipeline import AmplitudeMatrix
from sis.config import SisConfig
from sis.gradients import Batch, value_and_gradients
from sis.model import select_head
from sis.optimizer import AdamState, adam_step
from sis.params import Scaler, SisParams, init_params
from utils.fingerprint import config_fingerprint
from utils.rng import substream

from .evaluator import evaluate, mean_baseline, require_labels
from .tasks import TaskSpec, TrainSchedule

logger = logging.getLogger('trainer')


@dataclass
class ExperimentResult:
    per_task: dict[str, MetricsReport]
    loss_curve: list[tuple[int, float]]
    config_fingerprint: str
    baseline: MetricsReport | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            'config_fingerprint': self.config_fingerprint,
            'per_task': {name: report.to_dict() for name, report in self.per_task.items()},
            'baseline': None if self.baseline is None else self.baseline.to_dict(),
            'loss_curve': [[step, loss] for step, loss in self.loss_curve],
            **self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentResult:
        known = {'config_fingerprint', 'per_task', 'baseline', 'loss_curve'}
        return cls(
            per_task={name: MetricsReport.from_dict(r) for name, r in data['per_task'].items()},
            loss_curve=[(int(step), float(loss)) for step, loss in data.get('loss_curve', [])],
            config_fingerprint=data['config_fingerprint'],
            baseline=None if data.get('baseline') is None else MetricsReport.from_dict(data['baseline']),
            extra={k: v for k, v in data.items() if k not in known},
        )


def fit_config(template: SisConfig, matrix: AmplitudeMatrix, schedule: TrainSchedule | None = None) -> SisConfig:
    """按数据集形状补齐 f、S、N_train；给出训练计划时每个任务一个回归头"""
    n, s, f = matrix.shape
    update: dict[str, Any] = {'f': f, 'S': s, 'N_train': n}
    if schedule is not None:
        update['heads'] = [task.name for task in schedule.tasks]
    return template.model_copy(update=update)


def head_for_task(heads: tuple[str, ...] | list[str], task: TaskSpec) -> int:
    """任务同名的回归头；没有专属头的任务共用掩码对应的头"""
    if task.name in heads:
        return list(heads).index(task.name)
    return select_head(heads, task.mask)


def data_digest(matrix: AmplitudeMatrix) -> str:
    digest = hashlib.sha256(np.ascontiguousarray(matrix.values).tobytes())
    if matrix.labels is not None:
        digest.update(np.ascontiguousarray(matrix.labels).tobytes())
    return digest.hexdigest()


class TaskSampler:
    """round_robin: 第 k 步取 tasks[k % T]；proportional: 按任务样本量加权随机"""

    def __init__(self, tasks: list[TaskSpec], pools: dict[str, np.ndarray], policy: str, seed: int):
        self.tasks = tasks
        self.policy = policy
        sizes = np.array([len(pools[task.name]) for task in tasks], dtype=np.float64)
        self.weights = sizes / sizes.sum()
        self.rng = substream(seed, 'task-sampling')

    def pick(self, step: int) -> TaskSpec:
        if self.policy == 'round_robin':
            return self.tasks[step % len(self.tasks)]
        return self.tasks[int(self.rng.choice(len(self.tasks), p=self.weights))]


def train(
    data: AmplitudeMatrix,
    schedule: TrainSchedule,
    config: SisConfig,
    seed: int,
    test: AmplitudeMatrix | None = None,
) -> tuple[SisParams, ExperimentResult]:
    """跨任务联合训练；同一 (数据, 计划, 配置, 种子) 下结果逐位一致"""
    labels = require_labels(data)
    n, s, f = data.shape
    if (f, s, n) != (config.f, config.S, config.N_train):
        raise InputShapeError(
            f"数据形状 N={n}, S={s}, f={f} 与模型配置 N_train={config.N_train}, S={config.S}, f={config.f} 不一致"
        )

    scaler = Scaler.fit(data.values, labels)
    x = scaler.transform_x(data.values)
    y = scaler.transform_y(labels)

    params = init_params(config, substream(seed, 'init'))
    params.scaler = scaler
    state = AdamState()

    pools = {task.name: task.sample_indices(n) for task in schedule.tasks}
    heads = {task.name: head_for_task(config.heads, task) for task in schedule.tasks}
    sampler = TaskSampler(schedule.tasks, pools, schedule.task_sampling, seed)
    batch_rng = substream(seed, 'batches')
    steps_per_epoch = math.ceil(n / schedule.batch_size)
    log_every = max(1, schedule.epochs // 10)

    logger.info(
        f"开始训练: N={n}, S={s}, f={f}, 任务 {len(schedule.tasks)} 个, "
        f"{schedule.epochs} 轮 × {steps_per_epoch} 步, 策略 {schedule.task_sampling}"
    )

    loss_curve: list[tuple[int, float]] = []
    step = 0
    for epoch in range(schedule.epochs):
        epoch_losses = []
        for _ in range(steps_per_epoch):
            task = sampler.pick(step)
            pool = pools[task.name]
            size = min(schedule.batch_size, len(pool))
            indices = np.sort(batch_rng.choice(pool, size=size, replace=False))
            batch = Batch(x[indices], y[indices], indices)
            try:
                with np.errstate(over='raise', invalid='raise'):
                    terms, grads = value_and_gradients(batch, task.mask, params, config, heads[task.name])
                params, state = adam_step(params, grads, state, schedule.lr, schedule.betas, schedule.eps)
            except (NumericError, FloatingPointError) as e:
                logger.error(f"第 {step} 步（任务 {task.name}）出现数值异常: {e}")
                raise TrainingError(step, task.name, e)
            loss_curve.append((step, terms.total))
            epoch_losses.append(terms.total)
            step += 1
        if (epoch + 1) % log_every == 0 or epoch == schedule.epochs - 1:
            logger.info(f"epoch {epoch + 1}/{schedule.epochs} 平均损失 {np.mean(epoch_losses):.6f}")

    target = data if test is None else test
    target_labels = require_labels(target)
    per_task = {task.name: evaluate(params, target, task.mask, heads[task.name]) for task in schedule.tasks}
    baseline = mean_baseline(labels, target_labels)
    fingerprint = config_fingerprint(
        config, schedule.describe(), seed, data_digest(data),
        None if test is None else data_digest(test),
    )
    for name, report in per_task.items():
        logger.info(f"任务 {name}: MAE {report.mae_m:.4f} m, LMSE {report.lmse_m2:.4f}, R² {report.r2}")
    logger.info(f"均值基线: MAE {baseline.mae_m:.4f} m, LMSE {baseline.lmse_m2:.4f}")

    result = ExperimentResult(
        per_task=per_task,
        loss_curve=loss_curve,
        config_fingerprint=fingerprint,
        baseline=baseline,
        extra={'evaluated_on': 'train' if test is None else 'test'},
    )
    return params, result
