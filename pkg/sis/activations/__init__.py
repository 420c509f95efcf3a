# sis/activations/__init__.py
from .base import BaseActivation
from .softplus import SoftplusActivation
from .tanh import TanhActivation
from .elu import EluActivation

__all__ = [
    'BaseActivation',
    'SoftplusActivation',
    'TanhActivation',
    'EluActivation',
]
