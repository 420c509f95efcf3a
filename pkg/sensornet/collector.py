# sensornet/collector.py
"""UDP 采集端：接收线程只负责收包入队，处理线程单写者解码、去重、重排并追加 JSONL"""
from __future__ import annotations

import errno
import json
import logging
import queue
import socket
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from csi_core.dataset_io import dumps_line, frame_to_record
from csi_core.types import CsiFrame

from .state_store import HighWaterMarkStore
from .wire import WireError, decode_frame, is_end_marker

logger = logging.getLogger('collector')

REORDER_WINDOW = 64
RECV_BUFFER_BYTES = 4 * 1024 * 1024
_MAX_DATAGRAM = 65535
# 每落盘这么多帧写一次高水位
_FLUSH_EVERY = 64


@dataclass
class SensorState:
    next_expected: int = 0
    received: int = 0
    gaps: int = 0
    duplicates: int = 0
    late: int = 0
    final_count: int | None = None
    buffer: dict[int, CsiFrame] = field(default_factory=dict, repr=False)
    gap_seqs: set[int] = field(default_factory=set, repr=False)

    @property
    def finished(self) -> bool:
        return self.final_count is not None and self.next_expected >= self.final_count

    def marks(self) -> dict[str, int]:
        return {
            'next_expected': self.next_expected,
            'received': self.received,
            'gaps': self.gaps,
            'duplicates': self.duplicates,
        }

    def snapshot(self) -> dict:
        return {
            'last_seq': self.next_expected - 1,
            'received': self.received,
            'gaps': self.gaps,
            'duplicates': self.duplicates,
            'late': self.late,
            'buffered': len(self.buffer),
            'final_count': self.final_count,
            'finished': self.finished,
        }


@dataclass
class CollectorState:
    """received + gaps == next_expected 对每个传感器恒成立"""
    sensors: dict[int, SensorState] = field(default_factory=dict)
    persisted: int = 0
    datagrams: int = 0
    decode_errors: int = 0
    shutdown_reason: str | None = None

    def sensor(self, sensor_id: int) -> SensorState:
        if sensor_id not in self.sensors:
            self.sensors[sensor_id] = SensorState()
        return self.sensors[sensor_id]

    def snapshot(self) -> dict:
        return {
            'persisted': self.persisted,
            'datagrams': self.datagrams,
            'decode_errors': self.decode_errors,
            'shutdown_reason': self.shutdown_reason,
            'sensors': {str(k): v.snapshot() for k, v in sorted(self.sensors.items())},
        }


class DiskFullError(OSError):
    pass


class Collector:
    def __init__(
        self,
        output_path: str | Path,
        listen_addr: tuple[str, int] = ('127.0.0.1', 0),
        expected_sensors: int | None = None,
        state_db: str | Path | None = None,
        reorder_window: int = REORDER_WINDOW,
        control_addr: tuple[str, int] | None = None,
        datagram_log: str | Path | None = None,
    ):
        self.output_path = Path(output_path)
        self.listen_addr = listen_addr
        self.expected_sensors = expected_sensors
        self.reorder_window = reorder_window
        self.control_addr = control_addr
        self.state = CollectorState()
        self.lock = threading.Lock()
        self.queue: queue.Queue[bytes | None] = queue.Queue()
        self.stop_event = threading.Event()
        self.threads: list[threading.Thread] = []
        self.sock: socket.socket | None = None
        self.control_sock: socket.socket | None = None
        self.store = HighWaterMarkStore(state_db, self.output_path) if state_db else None
        self.datagram_log = Path(datagram_log) if datagram_log else None
        self._since_flush = 0

        self.output_path.parent.mkdir(parents=True, exist_ok=True)
        if self.store:
            for sensor_id, marks in self.store.load().items():
                self.state.sensors[sensor_id] = SensorState(**marks)
                self.state.persisted += marks['received']
            if self.state.sensors:
                logger.info(f"从高水位恢复 {len(self.state.sensors)} 个传感器的状态")
            self._recover_output()
        self._out = self.output_path.open('a', encoding='utf-8', newline='\n')
        self._log = self.datagram_log.open('ab') if self.datagram_log else None

    def _recover_output(self) -> None:
        """高水位之后已写入输出的行计入状态，重启后同一 (sensor, seq) 不再重复写出"""
        if not self.output_path.exists():
            return
        raw = self.output_path.read_bytes()
        complete = raw.rfind(b'\n') + 1
        if complete < len(raw):
            logger.warning(f"截断输出末尾不完整的行（{len(raw) - complete} 字节）")
            with self.output_path.open('r+b') as f:
                f.truncate(complete)

        written: dict[int, list[int]] = {}
        for line_no, line in enumerate(raw[:complete].decode('utf-8').splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                written.setdefault(int(record['sensor_id']), []).append(int(record['seq']))
            except (ValueError, KeyError, TypeError):
                logger.warning(f"{self.output_path}:{line_no}: 无法解析的行，恢复时跳过")

        recovered = 0
        for sensor_id, seqs in written.items():
            sensor = self.state.sensor(sensor_id)
            unmarked = [seq for seq in seqs if seq >= sensor.next_expected]
            if not unmarked:
                continue
            top = max(unmarked) + 1
            sensor.gaps += top - sensor.next_expected - len(unmarked)
            sensor.received += len(unmarked)
            sensor.next_expected = top
            recovered += len(unmarked)
        if recovered:
            self.state.persisted += recovered
            self.store.save({sid: s.marks() for sid, s in self.state.sensors.items()})
            logger.info(f"输出中有 {recovered} 帧晚于高水位，已计入状态")

    # ---- 网络 ----
    @property
    def address(self) -> tuple[str, int]:
        if self.sock is None:
            raise RuntimeError("采集端尚未启动")
        return self.sock.getsockname()[:2]

    @property
    def control_address(self) -> tuple[str, int] | None:
        return None if self.control_sock is None else self.control_sock.getsockname()[:2]

    def start(self) -> Collector:
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, RECV_BUFFER_BYTES)
        except OSError as e:
            logger.warning(f"无法调大接收缓冲区: {e}")
        self.sock.bind(self.listen_addr)
        self.sock.settimeout(0.2)
        self.threads = [
            threading.Thread(target=self._receive_loop, name='collector-recv', daemon=True),
            threading.Thread(target=self._process_loop, name='collector-proc', daemon=True),
        ]
        if self.control_addr is not None:
            self.control_sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self.control_sock.bind(self.control_addr)
            self.control_sock.settimeout(0.2)
            self.threads.append(threading.Thread(target=self._control_loop, name='collector-ctl', daemon=True))
        for thread in self.threads:
            thread.start()
        logger.info(f"采集端监听 UDP {self.address[0]}:{self.address[1]}")
        return self

    def _receive_loop(self):
        while not self.stop_event.is_set():
            try:
                data, _ = self.sock.recvfrom(_MAX_DATAGRAM)
            except socket.timeout:
                continue
            except OSError:
                if self.stop_event.is_set():
                    break
                raise
            self.queue.put(data)

    def _process_loop(self):
        while True:
            try:
                data = self.queue.get(timeout=0.2)
            except queue.Empty:
                if self.stop_event.is_set():
                    break
                continue
            if data is None:
                break
            try:
                self.ingest(data)
            except DiskFullError:
                logger.error("磁盘已满，采集端停止接收并刷新状态")
                self.state.shutdown_reason = 'disk_full'
                self.stop_event.set()
                break
            finally:
                self.queue.task_done()

    def _control_loop(self):
        while not self.stop_event.is_set():
            try:
                _, addr = self.control_sock.recvfrom(1024)
            except socket.timeout:
                continue
            except OSError:
                break
            self.control_sock.sendto(self.status_line().encode('utf-8'), addr)

    def status_line(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(',', ':'))

    def snapshot(self) -> dict:
        with self.lock:
            return self.state.snapshot()

    # ---- 处理 ----
    def ingest(self, data: bytes) -> None:
        """处理一个数据报；解码错误只计数"""
        with self.lock:
            self.state.datagrams += 1
            if self._log is not None:
                self._log.write(len(data).to_bytes(4, 'little') + data)
            try:
                frame = decode_frame(data)
            except WireError as e:
                self.state.decode_errors += 1
                logger.debug(f"丢弃无法解码的数据报: {e}")
                return
            sensor = self.state.sensor(frame.sensor_id)
            if is_end_marker(frame):
                self._finish(frame.sensor_id, sensor, frame.seq)
            else:
                self._accept(frame, sensor)
            if self._since_flush >= _FLUSH_EVERY:
                self._flush_locked()

    def _accept(self, frame: CsiFrame, sensor: SensorState) -> None:
        seq = frame.seq
        if seq < sensor.next_expected:
            if seq in sensor.gap_seqs:
                sensor.late += 1
            else:
                sensor.duplicates += 1
            return
        if seq in sensor.buffer:
            sensor.duplicates += 1
            return
        sensor.buffer[seq] = frame
        self._drain(sensor)
        # 缓冲超出窗口时把最早的缺口记为丢失
        while sensor.buffer and max(sensor.buffer) - sensor.next_expected >= self.reorder_window:
            self._declare_gap(frame.sensor_id, sensor)
            self._drain(sensor)

    def _finish(self, sensor_id: int, sensor: SensorState, total: int) -> None:
        if sensor.final_count is not None:
            return
        sensor.final_count = total
        while sensor.next_expected < total:
            if sensor.next_expected in sensor.buffer:
                self._drain(sensor)
            else:
                self._declare_gap(sensor_id, sensor)
        logger.info(f"传感器 {sensor_id} 结束: 共 {total} 帧, 收到 {sensor.received}, 缺口 {sensor.gaps}")

    def _declare_gap(self, sensor_id: int, sensor: SensorState) -> None:
        sensor.gap_seqs.add(sensor.next_expected)
        sensor.gaps += 1
        sensor.next_expected += 1
        logger.debug(f"传感器 {sensor_id} 缺失 seq {sensor.next_expected - 1}")

    def _drain(self, sensor: SensorState) -> None:
        while sensor.next_expected in sensor.buffer:
            frame = sensor.buffer.pop(sensor.next_expected)
            self._persist(frame)
            sensor.received += 1
            sensor.next_expected += 1

    def _persist(self, frame: CsiFrame) -> None:
        try:
            self._out.write(dumps_line(frame_to_record(frame)))
            self._out.write('\n')
        except OSError as e:
            if e.errno == errno.ENOSPC:
                raise DiskFullError(e.errno, str(e))
            raise
        self.state.persisted += 1
        self._since_flush += 1

    def _flush_locked(self) -> None:
        try:
            self._out.flush()
            if self._log is not None:
                self._log.flush()
        except OSError as e:
            if e.errno == errno.ENOSPC:
                raise DiskFullError(e.errno, str(e))
            raise
        if self.store:
            self.store.save({sid: s.marks() for sid, s in self.state.sensors.items()})
        self._since_flush = 0

    def flush(self) -> None:
        with self.lock:
            self._flush_locked()

    # ---- 生命周期 ----
    def all_finished(self) -> bool:
        with self.lock:
            sensors = self.state.sensors
            if self.expected_sensors is not None and len(sensors) < self.expected_sensors:
                return False
            return bool(sensors) and all(s.finished for s in sensors.values())

    def wait(self, stop_when: Callable[[Collector], bool] | None = None, timeout_s: float | None = None) -> bool:
        """阻塞直到 stop_when 成立（默认：全部传感器结束且队列清空）或超时"""
        stop_when = stop_when or (lambda c: c.all_finished() and c.queue.unfinished_tasks == 0)
        deadline = None if timeout_s is None else time.monotonic() + timeout_s
        while not stop_when(self):
            if self.stop_event.is_set():
                return False
            if deadline is not None and time.monotonic() > deadline:
                logger.warning("等待采集结束超时")
                return False
            time.sleep(0.02)
        return True

    def stop(self) -> CollectorState:
        self.stop_event.set()
        self.queue.put(None)
        for thread in self.threads:
            thread.join(timeout=2.0)
        for sock in (self.sock, self.control_sock):
            if sock is not None:
                sock.close()
        self.close()
        if self.state.shutdown_reason is None:
            self.state.shutdown_reason = 'stopped'
        logger.info(f"采集端停止: {self.status_line()}")
        return self.state

    def close(self) -> None:
        """刷新并关闭输出文件；磁盘已满时仍写入高水位"""
        if self._out.closed:
            return
        try:
            self.flush()
        except DiskFullError:
            self.state.shutdown_reason = 'disk_full'
            logger.error("关闭时磁盘已满，输出可能不完整")
            if self.store:
                self.store.save({sid: s.marks() for sid, s in self.state.sensors.items()})
        finally:
            self._out.close()
            if self._log is not None:
                self._log.close()

    def __enter__(self) -> Collector:
        return self.start()

    def __exit__(self, *exc) -> None:
        if not self._out.closed:
            self.stop()


def collector_run(
    listen_addr: tuple[str, int],
    output_path: str | Path,
    expected_sensors: int,
    stop_when: Callable[[Collector], bool] | None = None,
    timeout_s: float | None = None,
    state_db: str | Path | None = None,
    control_addr: tuple[str, int] | None = None,
) -> CollectorState:
    """阻塞运行采集端；Ctrl-C 时刷新状态后重新抛出"""
    collector = Collector(output_path, listen_addr, expected_sensors, state_db, control_addr=control_addr)
    collector.start()
    try:
        collector.wait(stop_when, timeout_s)
    finally:
        collector.stop()
    return collector.state


def iter_datagram_log(path: str | Path):
    """读取采集端记录的原始数据报（4 字节小端长度 + 内容）"""
    with Path(path).open('rb') as f:
        while True:
            head = f.read(4)
            if len(head) < 4:
                return
            yield f.read(int.from_bytes(head, 'little'))


def replay(datagrams, output_path: str | Path, reorder_window: int = REORDER_WINDOW) -> CollectorState:
    """把数据报序列同步灌入一个新的采集端（不经网络）"""
    collector = Collector(output_path, reorder_window=reorder_window)
    try:
        for data in datagrams:
            collector.ingest(data)
    finally:
        collector.close()
    return collector.state
