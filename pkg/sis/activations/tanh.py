# sis/activations/tanh.py
import numpy as np

from .base import BaseActivation


class TanhActivation(BaseActivation):
    name = 'tanh'

    def forward(self, z: np.ndarray) -> np.ndarray:
        return np.tanh(z)

    def derivative(self, z: np.ndarray) -> np.ndarray:
        return 1.0 - np.tanh(z) ** 2
