# sensornet/simulation.py
from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from synth.scene import SceneConfig

from .collector import Collector
from .faults import FaultProfile, SendStats
from .node import sensor_node_run
from .trajectory import Trajectory

logger = logging.getLogger('simulation')


@dataclass
class SimulationReport:
    send_stats: list[SendStats]
    collector: dict
    completed: bool = True
    output_path: str = ''
    notes: list[str] = field(default_factory=list)

    def conservation(self) -> dict[str, dict[str, int]]:
        """每个传感器：generated - (persisted + gaps)，静止时应为 0"""
        result = {}
        for stats in self.send_stats:
            sensor = self.collector['sensors'].get(str(stats.sensor_id), {})
            accounted = sensor.get('received', 0) + sensor.get('gaps', 0)
            result[str(stats.sensor_id)] = {
                'generated': stats.generated,
                'persisted': sensor.get('received', 0),
                'gaps': sensor.get('gaps', 0),
                'in_flight': stats.generated - accounted,
            }
        return result

    def to_dict(self) -> dict:
        return {
            'completed': self.completed,
            'output_path': self.output_path,
            'senders': [s.to_dict() for s in self.send_stats],
            'collector': self.collector,
            'conservation': self.conservation(),
            'notes': self.notes,
        }


class SimulationInterrupted(KeyboardInterrupt):
    """Ctrl-C 中断；携带已刷新的部分结果"""

    def __init__(self, report: SimulationReport):
        super().__init__("仿真被中断")
        self.report = report


def run_simulation(
    scene: SceneConfig,
    trajectory: Trajectory,
    output_path: str | Path,
    faults: FaultProfile | None = None,
    sensors: list[int] | None = None,
    rate_hz: float = 50.0,
    ticks: int | None = None,
    collector_addr: tuple[str, int] | None = None,
    state_db: str | Path | None = None,
    control_addr: tuple[str, int] | None = None,
    timeout_s: float = 60.0,
    pace: bool = False,
) -> SimulationReport:
    """启动采集端与 S 个节点线程，等待全部结束帧到达后停止

    collector_addr 为 None 时在本机随机端口启动内置采集端；
    否则只运行节点，向外部采集端发送。
    """
    faults = faults or FaultProfile()
    sensors = list(range(scene.sensor_count)) if sensors is None else sensors
    collector = None
    if collector_addr is None:
        collector = Collector(output_path, ('127.0.0.1', 0), len(sensors), state_db, control_addr=control_addr)
        collector.start()
        target = collector.address
    else:
        target = collector_addr

    stats: list[SendStats] = []
    completed = True
    stop_event = threading.Event()
    futures = []
    pool = ThreadPoolExecutor(max_workers=len(sensors), thread_name_prefix='sensor')
    try:
        futures = [
            pool.submit(sensor_node_run, scene, s, trajectory, rate_hz, target, faults, ticks, pace,
                        stop_event=stop_event)
            for s in sensors
        ]
        stats = [future.result() for future in futures]
        pool.shutdown()
        if collector is not None:
            completed = collector.wait(timeout_s=timeout_s)
    except KeyboardInterrupt:
        logger.warning("收到中断信号，刷新采集状态")
        stop_event.set()
        pool.shutdown(wait=True, cancel_futures=True)
        stats = [f.result() for f in futures if f.done() and not f.cancelled() and f.exception() is None]
        snapshot = collector.stop().snapshot() if collector is not None else {'sensors': {}}
        report = SimulationReport(stats, snapshot, completed=False, output_path=str(output_path),
                                  notes=['interrupted: output is partial'])
        raise SimulationInterrupted(report)
    except Exception:
        stop_event.set()
        pool.shutdown(wait=True, cancel_futures=True)
        if collector is not None:
            collector.stop()
        raise

    snapshot = collector.stop().snapshot() if collector is not None else {'sensors': {}}
    report = SimulationReport(stats, snapshot, completed=completed, output_path=str(output_path))
    if not completed:
        report.notes.append('collector did not reach quiescence before timeout')
    logger.info(f"仿真结束: {report.conservation()}")
    return report
