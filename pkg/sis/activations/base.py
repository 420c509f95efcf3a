# sis/activations/base.py
from abc import ABC, abstractmethod

import numpy as np


class BaseActivation(ABC):
    """特征提取器隐藏层使用的逐元素非线性"""

    name: str = ''

    @abstractmethod
    def forward(self, z: np.ndarray) -> np.ndarray:
        """计算 act(z)"""
        pass

    @abstractmethod
    def derivative(self, z: np.ndarray) -> np.ndarray:
        """计算 d act(z) / dz"""
        pass
