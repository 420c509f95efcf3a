# dsp/__init__.py
from .compensation import amplitude, compensate_frame, dac_scaling_factor
from .hampel import HampelParams, hampel_filter, hampel_filter_matrix
from .pipeline import (
    AmplitudeMatrix,
    preprocess,
    read_amplitude_matrix,
    write_amplitude_matrix,
)

__all__ = [
    'amplitude', 'compensate_frame', 'dac_scaling_factor',
    'HampelParams', 'hampel_filter', 'hampel_filter_matrix',
    'AmplitudeMatrix', 'preprocess', 'read_amplitude_matrix', 'write_amplitude_matrix',
]
