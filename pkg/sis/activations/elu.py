# sis/activations/elu.py
import numpy as np

from .base import BaseActivation


class EluActivation(BaseActivation):
    """alpha = 1 时在 0 处一阶连续"""

    name = 'elu'

    def forward(self, z: np.ndarray) -> np.ndarray:
        return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))

    def derivative(self, z: np.ndarray) -> np.ndarray:
        return np.where(z > 0, 1.0, np.exp(np.minimum(z, 0.0)))
