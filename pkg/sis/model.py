# sis/model.py
"""SiS 前向计算：共享特征提取器 -> 跨传感器上下文 -> 任务回归头 -> softmax(w_s) 融合

提取器为多层感知机，隐藏层使用可选的平滑激活（默认 softplus），
最后一层为线性映射到 f_h 维特征。所有传感器共用同一组权重。
上下文层让每个传感器的特征看到同一时刻其他已激活传感器的特征，
回归头按训练任务区分，推断时按掩码选择。
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import softmax

from csi_core.errors import InputError, InputShapeError, NumericError
from csi_core.types import Position3D
from sis.activations.factory import ActivationFactory

from .masks import SensorMask
from .params import SisParams


@dataclass
class ForwardCache:
    """反向传播所需的中间量，形状均以 (B, S, ·) 开头

    features 为提取器输出（已按掩码置零），mixed 为送入回归头的特征；
    未启用上下文层时两者相同，context_pre 为 None。
    """
    layer_inputs: list[np.ndarray]
    pre_activations: list[np.ndarray]
    features: np.ndarray
    context_pre: np.ndarray | None
    mixed: np.ndarray
    per_sensor: np.ndarray
    head: int = 0


def ensure_finite(name: str, value: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise NumericError(name)
    return value


def _as_batch(x: np.ndarray, mask: SensorMask, params: SisParams) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3:
        raise InputShapeError(f"输入应为 S×f 或 B×S×f，实际维度 {x.shape}")
    in_dim = params.extractor[0][0].shape[0]
    if x.shape[2] != in_dim:
        raise InputShapeError(f"子载波维度 {x.shape[2]} 与模型输入维度 {in_dim} 不一致")
    if x.shape[1] != mask.size or mask.size != params.sensor_count:
        raise InputShapeError(
            f"传感器数不一致: 输入 {x.shape[1]}, 掩码 {mask.size}, 模型 {params.sensor_count}"
        )
    return x, single


def _split_head(name: str) -> tuple[str, float]:
    label, _, fraction = name.partition('@')
    try:
        return label, float(fraction) if fraction else 1.0
    except ValueError:
        return label, 1.0


def select_head(heads: tuple[str, ...] | list[str], mask: SensorMask) -> int:
    """掩码对应的回归头：同一传感器组合中样本比例最大者，其次全传感器组合，否则第一个"""
    parsed = [_split_head(name) for name in heads]
    for label in (mask.label, SensorMask.full(mask.size).label, 'all'):
        candidates = [(fraction, -i) for i, (name, fraction) in enumerate(parsed) if name == label]
        if candidates:
            return -max(candidates)[1]
    return 0


def resolve_head(params: SisParams, mask: SensorMask, head: int | str | None = None) -> int:
    if head is None:
        return select_head(params.heads, mask)
    if isinstance(head, str):
        if head not in params.heads:
            raise InputError(f"模型中没有回归头 {head}，可用: {list(params.heads)}")
        return params.heads.index(head)
    if not 0 <= head < len(params.heads):
        raise InputError(f"回归头索引 {head} 超出 0..{len(params.heads) - 1}")
    return head


def mix_sensors(features: np.ndarray, mask: SensorMask, params: SisParams) -> tuple[np.ndarray, np.ndarray]:
    """B×S×f_h 特征 -> (混合后特征, 激活前的 z)；未激活传感器行为 0"""
    context = params.context
    activation = ActivationFactory.create_activation(params.activation)
    active = mask.as_array().astype(np.float64)
    shared = np.einsum('bti,tij->bj', features, context.slot_weight) + active @ context.slot_bias
    z = features @ context.self_weight + shared[:, None, :] + context.bias
    mixed = activation.forward(z) * active[None, :, None]
    return mixed, z


def forward(x: np.ndarray, mask: SensorMask, params: SisParams, head: int = 0) -> ForwardCache:
    x, _ = _as_batch(x, mask, params)
    activation = ActivationFactory.create_activation(params.activation)
    active = mask.as_array()[None, :, None]

    a = x * active
    layer_inputs, pre_activations = [], []
    last = len(params.extractor) - 1
    for layer, (weight, bias) in enumerate(params.extractor):
        layer_inputs.append(a)
        z = a @ weight + bias
        if layer < last:
            pre_activations.append(z)
            a = activation.forward(z)
        else:
            a = z
    features = ensure_finite('features', a * active)

    context_pre = None
    mixed = features
    if params.context is not None:
        mixed, context_pre = mix_sensors(features, mask, params)
        ensure_finite('context', mixed)

    weight, bias = params.head(head)
    per_sensor = ensure_finite('per_sensor_predictions', mixed @ weight + bias)
    return ForwardCache(layer_inputs, pre_activations, features, context_pre, mixed, per_sensor, head)


def extract_features(x: np.ndarray, mask: SensorMask, params: SisParams) -> np.ndarray:
    """S×f（或 B×S×f）幅度 -> S×f_h 特征，未激活传感器的特征行为 0"""
    _, single = _as_batch(x, mask, params)
    features = forward(x, mask, params).features
    return features[0] if single else features


def regress_positions(h: np.ndarray, params: SisParams, head: int = 0) -> np.ndarray:
    """回归头作用在送入回归器的特征上（启用上下文层时为混合后特征）"""
    h = np.asarray(h, dtype=np.float64)
    weight, bias = params.head(head)
    if h.shape[-1] != weight.shape[0]:
        raise InputShapeError(f"特征维度 {h.shape[-1]} 与回归器输入维度 {weight.shape[0]} 不一致")
    return h @ weight + bias


def fusion_coefficients(mask: SensorMask, w_s: np.ndarray) -> np.ndarray:
    """仅在激活传感器上做 softmax，未激活位置系数为 0"""
    w_s = np.asarray(w_s, dtype=np.float64)
    if w_s.shape != (mask.size,):
        raise InputShapeError(f"w_s 长度 {w_s.shape} 与掩码长度 {mask.size} 不一致")
    active = mask.as_array()
    coefficients = np.zeros(mask.size)
    coefficients[active] = softmax(w_s[active])
    return coefficients


def fuse_batch(per_sensor: np.ndarray, mask: SensorMask, w_s: np.ndarray) -> np.ndarray:
    """B×S×3 -> B×3"""
    coefficients = fusion_coefficients(mask, w_s)
    return np.einsum('s,bsd->bd', coefficients, per_sensor)


def fuse_prediction(per_sensor: np.ndarray, mask: SensorMask, w_s: np.ndarray) -> Position3D:
    per_sensor = np.asarray(per_sensor, dtype=np.float64)
    if per_sensor.shape != (mask.size, 3):
        raise InputShapeError(f"逐传感器预测应为 {mask.size}×3，实际 {per_sensor.shape}")
    return Position3D.from_array(fuse_batch(per_sensor[None], mask, w_s)[0])


def predict(x: np.ndarray, mask: SensorMask, params: SisParams, head: int | str | None = None) -> np.ndarray:
    """原始幅度 -> 融合后的位置（米），自动应用参数中保存的标准化

    head 为 None 时按掩码选择回归头。
    """
    x, _ = _as_batch(x, mask, params)
    index = resolve_head(params, mask, head)
    if params.scaler is not None:
        x = params.scaler.transform_x(x)
    fused = fuse_batch(forward(x, mask, params, index).per_sensor, mask, params.w_s)
    if params.scaler is not None:
        fused = params.scaler.inverse_y(fused)
    return fused
