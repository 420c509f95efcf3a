# sensornet/__init__.py
from .collector import Collector, CollectorState, SensorState, collector_run, iter_datagram_log, replay
from .faults import FaultInjector, FaultProfile, SendStats
from .join import JoinResult, join_labels
from .node import sensor_node_run
from .simulation import SimulationInterrupted, SimulationReport, run_simulation
from .trajectory import Trajectory, hover_trajectory, read_trajectory_csv, write_trajectory_csv
from .wire import (
    CorruptionError,
    FrameSizeError,
    ProtocolError,
    TruncationError,
    WireError,
    decode_frame,
    encode_frame,
    encode_with_status,
)

__all__ = [
    'encode_frame', 'encode_with_status', 'decode_frame',
    'WireError', 'ProtocolError', 'TruncationError', 'CorruptionError', 'FrameSizeError',
    'FaultProfile', 'FaultInjector', 'SendStats', 'sensor_node_run',
    'Collector', 'CollectorState', 'SensorState', 'collector_run', 'replay', 'iter_datagram_log',
    'Trajectory', 'hover_trajectory', 'read_trajectory_csv', 'write_trajectory_csv',
    'JoinResult', 'join_labels',
    'SimulationReport', 'SimulationInterrupted', 'run_simulation',
]
