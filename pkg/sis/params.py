# sis/params.py
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from csi_core.errors import InputShapeError

from .config import SisConfig

GradientSet = dict[str, np.ndarray]

SENSOR_WEIGHTS = 'sensor_weights'
SAMPLE_WEIGHTS = 'sample_weights'
REGRESSOR_WEIGHT = 'regressor.weight'
REGRESSOR_BIAS = 'regressor.bias'
CONTEXT_SELF_WEIGHT = 'context.self.weight'
CONTEXT_SLOT_WEIGHT = 'context.slot.weight'
CONTEXT_SLOT_BIAS = 'context.slot.bias'
CONTEXT_BIAS = 'context.bias'


def extractor_weight(layer: int) -> str:
    return f"extractor.{layer}.weight"


def extractor_bias(layer: int) -> str:
    return f"extractor.{layer}.bias"


@dataclass
class Scaler:
    """训练集上拟合的标准化统计量，不参与训练"""
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray) -> Scaler:
        x_std = x.std(axis=0)
        y_std = y.std(axis=0)
        return cls(
            x_mean=x.mean(axis=0),
            x_std=np.where(x_std > 1e-12, x_std, 1.0),
            y_mean=y.mean(axis=0),
            y_std=np.where(y_std > 1e-12, y_std, 1.0),
        )

    def transform_x(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_mean) / self.x_std

    def transform_y(self, y: np.ndarray) -> np.ndarray:
        return (y - self.y_mean) / self.y_std

    def inverse_y(self, y: np.ndarray) -> np.ndarray:
        return y * self.y_std + self.y_mean

    def named_tensors(self) -> dict[str, np.ndarray]:
        return {
            'scaler.x_mean': self.x_mean,
            'scaler.x_std': self.x_std,
            'scaler.y_mean': self.y_mean,
            'scaler.y_std': self.y_std,
        }


@dataclass
class SensorContext:
    """跨传感器上下文层

    z_s = h_s·A + Σ_t m_t (h_t·B_t + u_t) + c，输出 m_s·act(z_s)；
    B_t、u_t 按传感器槽位索引，未激活传感器的特征为 0，不贡献上下文。
    """
    self_weight: np.ndarray
    slot_weight: np.ndarray
    slot_bias: np.ndarray
    bias: np.ndarray

    def named_tensors(self) -> dict[str, np.ndarray]:
        return {
            CONTEXT_SELF_WEIGHT: self.self_weight,
            CONTEXT_SLOT_WEIGHT: self.slot_weight,
            CONTEXT_SLOT_BIAS: self.slot_bias,
            CONTEXT_BIAS: self.bias,
        }

    @classmethod
    def from_tensors(cls, tensors: dict[str, np.ndarray]) -> SensorContext:
        return cls(tensors[CONTEXT_SELF_WEIGHT], tensors[CONTEXT_SLOT_WEIGHT],
                   tensors[CONTEXT_SLOT_BIAS], tensors[CONTEXT_BIAS])


@dataclass
class SisParams:
    """SiS 全部可训练张量；提取器、上下文层与回归头在传感器之间共享

    regressor 为按任务堆叠的回归头：weight H×f_h×3，bias H×3，heads[i] 为第 i 个头的名称。
    """
    extractor: list[tuple[np.ndarray, np.ndarray]]
    regressor: tuple[np.ndarray, np.ndarray]
    w_s: np.ndarray
    v: np.ndarray
    context: SensorContext | None = None
    activation: str = 'softplus'
    heads: tuple[str, ...] = ('all',)
    scaler: Scaler | None = field(default=None, repr=False)

    def named_tensors(self) -> dict[str, np.ndarray]:
        tensors = {}
        for layer, (weight, bias) in enumerate(self.extractor):
            tensors[extractor_weight(layer)] = weight
            tensors[extractor_bias(layer)] = bias
        if self.context is not None:
            tensors.update(self.context.named_tensors())
        tensors[REGRESSOR_WEIGHT] = self.regressor[0]
        tensors[REGRESSOR_BIAS] = self.regressor[1]
        tensors[SENSOR_WEIGHTS] = self.w_s
        tensors[SAMPLE_WEIGHTS] = self.v
        return tensors

    def replace(self, tensors: dict[str, np.ndarray]) -> SisParams:
        merged = {**self.named_tensors(), **tensors}
        layers = len(self.extractor)
        return SisParams(
            extractor=[(merged[extractor_weight(i)], merged[extractor_bias(i)]) for i in range(layers)],
            regressor=(merged[REGRESSOR_WEIGHT], merged[REGRESSOR_BIAS]),
            w_s=merged[SENSOR_WEIGHTS],
            v=merged[SAMPLE_WEIGHTS],
            context=None if self.context is None else SensorContext.from_tensors(merged),
            activation=self.activation,
            heads=self.heads,
            scaler=self.scaler,
        )

    def copy(self) -> SisParams:
        clone = self.replace({name: value.copy() for name, value in self.named_tensors().items()})
        return clone

    def head(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        weight, bias = self.regressor
        return weight[index], bias[index]

    @property
    def sensor_count(self) -> int:
        return int(self.w_s.shape[0])


def expected_shapes(config: SisConfig) -> dict[str, tuple[int, ...]]:
    dims = config.layer_dims
    shapes = {}
    for layer in range(len(dims) - 1):
        shapes[extractor_weight(layer)] = (dims[layer], dims[layer + 1])
        shapes[extractor_bias(layer)] = (dims[layer + 1],)
    if config.sensor_context:
        shapes[CONTEXT_SELF_WEIGHT] = (config.f_h, config.f_h)
        shapes[CONTEXT_SLOT_WEIGHT] = (config.S, config.f_h, config.f_h)
        shapes[CONTEXT_SLOT_BIAS] = (config.S, config.f_h)
        shapes[CONTEXT_BIAS] = (config.f_h,)
    shapes[REGRESSOR_WEIGHT] = (config.head_count, config.f_h, 3)
    shapes[REGRESSOR_BIAS] = (config.head_count, 3)
    shapes[SENSOR_WEIGHTS] = (config.S,)
    shapes[SAMPLE_WEIGHTS] = (config.N_train,)
    return shapes


def scaler_shapes(config: SisConfig) -> dict[str, tuple[int, ...]]:
    return {
        'scaler.x_mean': (config.S, config.f),
        'scaler.x_std': (config.S, config.f),
        'scaler.y_mean': (3,),
        'scaler.y_std': (3,),
    }


def params_from_tensors(config: SisConfig, tensors: dict[str, np.ndarray]) -> SisParams:
    """按配置校验形状后组装参数"""
    shapes = expected_shapes(config)
    for name, shape in shapes.items():
        if name not in tensors:
            raise InputShapeError(f"缺少张量 {name}")
        if tuple(tensors[name].shape) != shape:
            raise InputShapeError(f"张量 {name} 形状 {tuple(tensors[name].shape)} 与配置要求 {shape} 不一致")

    scaler = None
    scaler_names = scaler_shapes(config)
    present = [name for name in scaler_names if name in tensors]
    if present:
        for name, shape in scaler_names.items():
            if name not in tensors or tuple(tensors[name].shape) != shape:
                raise InputShapeError(f"标准化张量 {name} 缺失或形状错误")
        scaler = Scaler(*(np.asarray(tensors[name], dtype=np.float64) for name in scaler_names))

    unknown = set(tensors) - set(shapes) - set(scaler_names)
    if unknown:
        raise InputShapeError(f"未知张量: {sorted(unknown)}")

    layers = len(config.layer_dims) - 1
    return SisParams(
        extractor=[(tensors[extractor_weight(i)], tensors[extractor_bias(i)]) for i in range(layers)],
        regressor=(tensors[REGRESSOR_WEIGHT], tensors[REGRESSOR_BIAS]),
        w_s=tensors[SENSOR_WEIGHTS],
        v=tensors[SAMPLE_WEIGHTS],
        context=SensorContext.from_tensors(tensors) if config.sensor_context else None,
        activation=config.activation,
        heads=tuple(config.heads),
        scaler=scaler,
    )


def _fan_in(name: str, shape: tuple[int, ...]) -> int:
    # 槽位权重对所有传感器求和
    if name == CONTEXT_SLOT_WEIGHT:
        return shape[0] * shape[1]
    return shape[-2]


def init_params(config: SisConfig, rng: np.random.Generator) -> SisParams:
    """权重按 fan-in 对称均匀分布初始化，偏置为 0；w_s = 0，v 全 1"""
    tensors = {}
    for name, shape in expected_shapes(config).items():
        if name.endswith('.weight'):
            limit = 1.0 / np.sqrt(_fan_in(name, shape))
            tensors[name] = rng.uniform(-limit, limit, size=shape)
        elif name == SAMPLE_WEIGHTS:
            tensors[name] = np.ones(shape)
        else:
            tensors[name] = np.zeros(shape)
    return params_from_tensors(config, tensors)


def zero_params(config: SisConfig) -> SisParams:
    tensors = {name: np.zeros(shape) for name, shape in expected_shapes(config).items()}
    tensors[SAMPLE_WEIGHTS] = np.ones(config.N_train)
    return params_from_tensors(config, tensors)
