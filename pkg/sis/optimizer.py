# sis/optimizer.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import SAMPLE_WEIGHTS, GradientSet, SisParams


@dataclass
class AdamState:
    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_update(
    tensors: dict[str, np.ndarray],
    grads: GradientSet,
    state: AdamState,
    lr: float,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """标准 Adam（带偏差修正）；只更新 grads 中出现的张量，输入不被修改"""
    beta1, beta2 = betas
    t = state.t + 1
    first, second = dict(state.first), dict(state.second)
    updated = dict(tensors)
    for name, grad in grads.items():
        m = beta1 * first.get(name, np.zeros_like(grad)) + (1.0 - beta1) * grad
        v = beta2 * second.get(name, np.zeros_like(grad)) + (1.0 - beta2) * grad ** 2
        first[name], second[name] = m, v
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        updated[name] = tensors[name] - lr * m_hat / (np.sqrt(v_hat) + eps)
    return updated, AdamState(first, second, t)


def project_sample_weights(v: np.ndarray) -> np.ndarray:
    """v 投影到非负象限后归一化为均值 1；全部为 0 时重置为全 1"""
    v = np.clip(v, 0.0, None)
    mean = v.mean() if v.size else 0.0
    if mean <= 0:
        return np.ones_like(v)
    return v / mean


def adam_step(
    params: SisParams,
    grads: GradientSet,
    state: AdamState | None = None,
    lr: float = 1e-4,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[SisParams, AdamState]:
    tensors, state = adam_update(params.named_tensors(), grads, state or AdamState(), lr, betas, eps)
    tensors[SAMPLE_WEIGHTS] = project_sample_weights(tensors[SAMPLE_WEIGHTS])
    return params.replace(tensors), state
