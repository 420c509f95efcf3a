# sis/activations/softplus.py
import numpy as np
from scipy.special import expit

from .base import BaseActivation


class SoftplusActivation(BaseActivation):
    """平滑的整流函数 log(1 + e^z)，导数为 sigmoid"""

    name = 'softplus'

    def forward(self, z: np.ndarray) -> np.ndarray:
        return np.logaddexp(0.0, z)

    def derivative(self, z: np.ndarray) -> np.ndarray:
        return expit(z)
