# sis/activations/factory.py
from sis.activations import (
    EluActivation,
    SoftplusActivation,
    TanhActivation,
)


class ActivationFactory:
    @staticmethod
    def create_activation(name: str):
        """按名称创建激活函数实例"""
        name = name.lower().strip()
        mapping = {
            'softplus': SoftplusActivation,
            'tanh': TanhActivation,
            'elu': EluActivation,
        }

        if name not in mapping:
            raise ValueError(f"Unsupported activation: {name}")

        return mapping[name]()
