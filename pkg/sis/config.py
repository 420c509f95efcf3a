# sis/config.py
from pydantic import BaseModel, ConfigDict, field_validator


class SisConfig(BaseModel):
    """SiS 模型结构与损失系数，默认 f_h=128, λs=0.01, λv=0.1"""
    model_config = ConfigDict(extra='forbid')

    f: int = 50
    f_h: int = 128
    hidden_dims: list[int] = [256, 256]
    S: int = 3
    N_train: int = 1
    lambda_s: float = 0.01
    lambda_v: float = 0.1
    # 融合损失系数，0 时总损失即三项损失
    lambda_fuse: float = 0.0
    activation: str = 'softplus'
    # 提取器之后按传感器槽位混合已激活传感器的特征；关闭时每个传感器独立回归
    sensor_context: bool = True
    # 任务专属回归头，训练时按计划中的任务名展开
    heads: list[str] = ['all']

    @field_validator('heads')
    @classmethod
    def _check_heads(cls, value: list[str]) -> list[str]:
        if not value:
            raise ValueError("heads 至少包含一个回归头")
        if len(set(value)) != len(value):
            raise ValueError(f"回归头名称重复: {value}")
        return value

    @field_validator('f', 'f_h', 'S', 'N_train')
    @classmethod
    def _check_dim(cls, value: int) -> int:
        if value < 1:
            raise ValueError("维度必须 >= 1")
        return value

    @field_validator('hidden_dims')
    @classmethod
    def _check_hidden(cls, value: list[int]) -> list[int]:
        if any(d < 1 for d in value):
            raise ValueError("hidden_dims 中每一层维度必须 >= 1")
        return value

    @field_validator('lambda_s', 'lambda_v', 'lambda_fuse')
    @classmethod
    def _check_lambda(cls, value: float) -> float:
        if value < 0:
            raise ValueError("正则系数不能为负")
        return value

    @field_validator('activation')
    @classmethod
    def _check_activation(cls, value: str) -> str:
        value = value.lower().strip()
        if value not in ('softplus', 'tanh', 'elu'):
            raise ValueError(f"不支持的激活函数: {value}")
        return value

    @property
    def layer_dims(self) -> list[int]:
        """f -> hidden_dims -> f_h"""
        return [self.f, *self.hidden_dims, self.f_h]

    @property
    def head_count(self) -> int:
        return len(self.heads)
