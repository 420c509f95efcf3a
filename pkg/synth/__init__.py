# synth/__init__.py
from .scene import GridPlan, Room, SceneConfig
from .channel import true_channel, subcarrier_frequencies, path_amplitude
from .agc import apply_agc, quantize_gain, received_power_db
from .generator import capture_frame, generate_dataset
from .spikes import SpikeInjection, inject_spikes, write_injection_log

__all__ = [
    'GridPlan', 'Room', 'SceneConfig',
    'true_channel', 'subcarrier_frequencies', 'path_amplitude',
    'apply_agc', 'quantize_gain', 'received_power_db',
    'capture_frame', 'generate_dataset',
    'SpikeInjection', 'inject_spikes', 'write_injection_log',
]
