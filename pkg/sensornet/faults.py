# sensornet/faults.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from pydantic import BaseModel, ConfigDict, field_validator

from utils.rng import substream

logger = logging.getLogger('faults')


class FaultProfile(BaseModel):
    model_config = ConfigDict(extra='forbid')

    drop_rate: float = 0.0
    reorder_rate: float = 0.0
    duplicate_rate: float = 0.0
    max_delay_ms: float = 50.0
    rng_seed: int = 0

    @field_validator('drop_rate', 'reorder_rate', 'duplicate_rate')
    @classmethod
    def _check_rate(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError("故障概率必须位于 [0, 1]")
        return value

    @field_validator('max_delay_ms')
    @classmethod
    def _check_delay(cls, value: float) -> float:
        if value < 0:
            raise ValueError("max_delay_ms 不能为负")
        return value

    @property
    def is_clean(self) -> bool:
        return self.drop_rate == 0 and self.reorder_rate == 0 and self.duplicate_rate == 0


@dataclass
class SendStats:
    """generated = sent + dropped + failed；duplicated 为额外发送的副本数"""
    sensor_id: int
    generated: int = 0
    sent: int = 0
    dropped: int = 0
    duplicated: int = 0
    reordered: int = 0
    failed: int = 0
    saturated: int = 0
    datagrams: int = 0
    unreachable: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class _Held:
    release_tick: int
    copies: list[bytes] = field(default_factory=list)


class FaultInjector:
    """每帧固定抽取三个均匀随机数（丢弃、复制、乱序），故障模式只取决于种子与帧序"""

    def __init__(self, profile: FaultProfile, stream: int | str = 0, rate_hz: float = 50.0):
        self.profile = profile
        self.rng = substream(profile.rng_seed, 'faults', stream)
        self.max_hold = max(1, int(round(profile.max_delay_ms / 1000.0 * rate_hz)))
        self.held: list[_Held] = []
        self.tick = 0

    def process(self, datagram: bytes, stats: SendStats) -> list[tuple[bytes, bool]]:
        """返回本 tick 需要发送的 (数据报, 是否副本)"""
        u_drop, u_dup, u_reorder = self.rng.random(3)
        hold_ticks = int(self.rng.integers(1, self.max_hold + 1))
        self.tick += 1
        out: list[tuple[bytes, bool]] = []

        if u_drop < self.profile.drop_rate:
            stats.dropped += 1
        else:
            copies = [(datagram, False)]
            if u_dup < self.profile.duplicate_rate:
                copies.append((datagram, True))
            if u_reorder < self.profile.reorder_rate:
                stats.reordered += 1
                self.held.append(_Held(self.tick + hold_ticks, [c for c, _ in copies]))
            else:
                out.extend(copies)

        # 到期的延迟帧排在当前帧之后发出
        due = [h for h in self.held if h.release_tick <= self.tick]
        self.held = [h for h in self.held if h.release_tick > self.tick]
        for held in due:
            out.extend((c, i > 0) for i, c in enumerate(held.copies))
        return out

    def flush(self) -> list[tuple[bytes, bool]]:
        out = []
        for held in self.held:
            out.extend((c, i > 0) for i, c in enumerate(held.copies))
        self.held = []
        return out
