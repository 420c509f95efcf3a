# csi_core/__init__.py
from .errors import (
    CiuavError,
    ConfigError,
    DomainError,
    InputError,
    InputShapeError,
    NumericError,
    TrainingError,
)
from .types import CsiFrame, Dataset, LabeledSample, Position3D, DEFAULT_SUBCARRIERS
from .metrics import MetricsReport, compute_metrics, euclidean_error, empirical_cdf, R2_UNDEFINED
from .dataset_io import read_dataset, write_dataset, read_frames, write_frames, write_metrics

__all__ = [
    'CiuavError', 'ConfigError', 'DomainError', 'InputError', 'InputShapeError',
    'NumericError', 'TrainingError',
    'CsiFrame', 'Dataset', 'LabeledSample', 'Position3D', 'DEFAULT_SUBCARRIERS',
    'MetricsReport', 'compute_metrics', 'euclidean_error', 'empirical_cdf', 'R2_UNDEFINED',
    'read_dataset', 'write_dataset', 'read_frames', 'write_frames', 'write_metrics',
]
