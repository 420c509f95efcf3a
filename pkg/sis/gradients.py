# sis/gradients.py
"""总损失对全部参数的解析梯度（手写反向传播）"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from csi_core.errors import InputShapeError
from sis.activations.factory import ActivationFactory

from .config import SisConfig
from .losses import LossTerms, loss_terms
from .masks import SensorMask
from .model import ensure_finite, forward, fusion_coefficients
from .params import (
    CONTEXT_BIAS,
    CONTEXT_SELF_WEIGHT,
    CONTEXT_SLOT_BIAS,
    CONTEXT_SLOT_WEIGHT,
    REGRESSOR_BIAS,
    REGRESSOR_WEIGHT,
    SAMPLE_WEIGHTS,
    SENSOR_WEIGHTS,
    GradientSet,
    SisParams,
    extractor_bias,
    extractor_weight,
)


@dataclass
class Batch:
    """x: B×S×f 幅度；y: B×3 真值；indices: 样本在训练集中的行号（索引 v）"""
    x: np.ndarray
    y: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.x.ndim != 3 or self.y.shape != (self.x.shape[0], 3) or self.indices.shape != (self.x.shape[0],):
            raise InputShapeError(
                f"批次形状不一致: x {self.x.shape}, y {self.y.shape}, indices {self.indices.shape}"
            )

    @property
    def size(self) -> int:
        return int(self.x.shape[0])


def batch_loss(batch: Batch, mask: SensorMask, params: SisParams, config: SisConfig, head: int = 0) -> LossTerms:
    cache = forward(batch.x, mask, params, head)
    return loss_terms(cache.per_sensor, batch.y, params, config, mask, params.v[batch.indices])


def value_and_gradients(
    batch: Batch,
    mask: SensorMask,
    params: SisParams,
    config: SisConfig,
    head: int = 0,
) -> tuple[LossTerms, GradientSet]:
    cache = forward(batch.x, mask, params, head)
    pred = cache.per_sensor
    v_batch = params.v[batch.indices]
    terms = loss_terms(pred, batch.y, params, config, mask, v_batch)

    active = mask.as_array()
    active_count = int(active.sum())
    size = batch.size
    residual = (pred - batch.y[:, None, :]) * active[None, :, None]

    # dL/dpred：预测项 + 样本选择项
    scale = 2.0 / (size * active_count) + config.lambda_v * 2.0 * v_batch[:, None, None] ** 2 / active_count
    d_pred = residual * scale

    grads: GradientSet = {}
    d_w_s = config.lambda_s * np.sign(params.w_s)
    if config.lambda_fuse > 0:
        coefficients = fusion_coefficients(mask, params.w_s)
        fused = np.einsum('s,bsd->bd', coefficients, pred)
        d_fused = 2.0 * config.lambda_fuse * (fused - batch.y) / size
        d_pred = d_pred + coefficients[None, :, None] * d_fused[:, None, :]
        # softmax 雅可比：∂fused/∂w_s = c_s (pred_s - fused)
        d_w_s = d_w_s + coefficients * np.einsum('bd,bsd->s', d_fused, pred - fused[:, None, :])
    grads[SENSOR_WEIGHTS] = d_w_s

    d_v = np.zeros_like(params.v)
    per_sample = np.sum(residual ** 2, axis=(1, 2))
    np.add.at(d_v, batch.indices, config.lambda_v * 2.0 * v_batch * per_sample / active_count)
    grads[SAMPLE_WEIGHTS] = d_v

    # 只有本批次任务的回归头得到梯度
    weight, _ = params.head(head)
    d_head_weight = np.zeros_like(params.regressor[0])
    d_head_bias = np.zeros_like(params.regressor[1])
    d_head_weight[head] = np.einsum('bsi,bsj->ij', cache.mixed, d_pred)
    d_head_bias[head] = d_pred.sum(axis=(0, 1))
    grads[REGRESSOR_WEIGHT] = d_head_weight
    grads[REGRESSOR_BIAS] = d_head_bias

    activation = ActivationFactory.create_activation(params.activation)
    d_mixed = (d_pred @ weight.T) * active[None, :, None]
    if params.context is not None:
        context = params.context
        d_z = d_mixed * activation.derivative(cache.context_pre)
        d_shared = d_z.sum(axis=1)
        grads[CONTEXT_SELF_WEIGHT] = np.einsum('bsi,bsj->ij', cache.features, d_z)
        grads[CONTEXT_SLOT_WEIGHT] = np.einsum('bti,bj->tij', cache.features, d_shared)
        grads[CONTEXT_SLOT_BIAS] = active.astype(np.float64)[:, None] * d_shared.sum(axis=0)[None, :]
        grads[CONTEXT_BIAS] = d_z.sum(axis=(0, 1))
        d_features = d_z @ context.self_weight.T + np.einsum('bj,tij->bti', d_shared, context.slot_weight)
        d_a = ensure_finite('d_context.input', d_features * active[None, :, None])
    else:
        d_a = d_mixed

    last = len(params.extractor) - 1
    for layer in range(last, -1, -1):
        layer_weight, _ = params.extractor[layer]
        if layer < last:
            d_z = d_a * activation.derivative(cache.pre_activations[layer])
        else:
            d_z = d_a
        grads[extractor_weight(layer)] = np.einsum('bsi,bsj->ij', cache.layer_inputs[layer], d_z)
        grads[extractor_bias(layer)] = d_z.sum(axis=(0, 1))
        if layer > 0:
            d_a = ensure_finite(f"d_extractor.{layer}.input", d_z @ layer_weight.T)

    for name, value in grads.items():
        ensure_finite(f"grad.{name}", value)
    return terms, grads


def gradients(batch: Batch, mask: SensorMask, params: SisParams, config: SisConfig, head: int = 0) -> GradientSet:
    return value_and_gradients(batch, mask, params, config, head)[1]
