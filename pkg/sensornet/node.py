# sensornet/node.py
"""模拟传感器节点：每个 tick 做一次 ping/reply 捕获，经故障层以 UDP 发往采集端"""
from __future__ import annotations

import logging
import socket
import threading
import time

from synth.generator import capture_frame
from synth.scene import SceneConfig
from utils.rng import substream

from .faults import FaultInjector, FaultProfile, SendStats
from .trajectory import Trajectory
from .wire import encode_with_status, end_marker

logger = logging.getLogger('sensor_node')

# 结束帧重复发送次数，采集端按 (sensor, seq) 去重
END_MARKER_REPEATS = 3


def _send(sock: socket.socket, datagram: bytes, addr: tuple[str, int], retries: int, backoff_s: float) -> bool:
    delay = backoff_s
    for attempt in range(retries + 1):
        try:
            sock.sendto(datagram, addr)
            return True
        except OSError as e:
            if attempt == retries:
                logger.warning(f"发送到 {addr} 失败，已重试 {retries} 次: {e}")
                return False
            time.sleep(delay)
            delay = min(delay * 2, 1.0)
    return False


def sensor_node_run(
    scene: SceneConfig,
    sensor_index: int,
    trajectory: Trajectory,
    rate_hz: float,
    collector_addr: tuple[str, int],
    faults: FaultProfile | None = None,
    ticks: int | None = None,
    pace: bool = False,
    retries: int = 3,
    backoff_s: float = 0.05,
    burst: int = 32,
    stop_event: threading.Event | None = None,
) -> SendStats:
    """返回发送统计；帧内容与故障模式只取决于种子

    pace=False 时不按真实时间节拍发送，每 burst 帧让出 1 ms。
    """
    faults = faults or FaultProfile()
    injector = FaultInjector(faults, stream=sensor_index, rate_hz=rate_hz)
    stats = SendStats(sensor_id=sensor_index)
    period_us = 1e6 / rate_hz
    total = trajectory.tick_count(rate_hz) if ticks is None else ticks
    consecutive_failures = 0

    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    try:
        started = time.monotonic()
        for tick in range(total):
            if stop_event is not None and stop_event.is_set():
                logger.warning(f"传感器 {sensor_index} 在第 {tick} 帧被中止")
                break
            timestamp_us = int(round(trajectory.start_us + tick * period_us))
            if not trajectory.covers(timestamp_us):
                timestamp_us = trajectory.end_us
            uav = trajectory.position_at(timestamp_us)
            rng = substream(scene.rng_seed, 'node', sensor_index, tick)
            encoded = encode_with_status(capture_frame(scene, uav, sensor_index, tick, timestamp_us, rng))
            stats.generated += 1
            stats.saturated += int(encoded.saturated)

            outgoing = injector.process(encoded.data, stats)
            consecutive_failures = _transmit(sock, outgoing, collector_addr, stats, retries, backoff_s,
                                             consecutive_failures)

            if pace:
                lag = started + (tick + 1) / rate_hz - time.monotonic()
                if lag > 0:
                    time.sleep(lag)
            elif burst and (tick + 1) % burst == 0:
                time.sleep(0.001)

        _transmit(sock, injector.flush(), collector_addr, stats, retries, backoff_s, consecutive_failures)
        for _ in range(END_MARKER_REPEATS):
            _send(sock, end_marker(sensor_index, stats.generated, trajectory.end_us), collector_addr, retries, backoff_s)
    finally:
        sock.close()

    # 未送出的原始帧（非副本）记为失败，保证 generated = sent + dropped + failed
    stats.sent = stats.generated - stats.dropped - stats.failed
    logger.info(f"传感器 {sensor_index} 发送完成: {stats.to_dict()}")
    return stats


def _transmit(sock, outgoing, addr, stats: SendStats, retries: int, backoff_s: float,
              consecutive_failures: int) -> int:
    for datagram, is_copy in outgoing:
        # 采集端连续不可达时不再逐帧重试
        attempts = 0 if consecutive_failures >= 3 else retries
        if _send(sock, datagram, addr, attempts, backoff_s):
            consecutive_failures = 0
            stats.datagrams += 1
            stats.duplicated += int(is_copy)
        else:
            consecutive_failures += 1
            stats.unreachable = consecutive_failures >= 3
            if not is_copy:
                stats.failed += 1
    return consecutive_failures
