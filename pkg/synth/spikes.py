# synth/spikes.py
"""向数据集注入幅度尖峰，并记录注入位置供滤波效果校验"""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from csi_core.errors import InputError
from csi_core.types import Dataset, LabeledSample
from utils.rng import substream


@dataclass
class SpikeInjection:
    dataset: Dataset
    log: list[dict]

    def cells(self) -> set[tuple[int, int, int]]:
        return {(r['sample'], r['sensor'], r['subcarrier']) for r in self.log}


def inject_spikes(dataset: Dataset, spike_rate: float, spike_gain: float, rng_seed: int) -> SpikeInjection:
    if not 0.0 <= spike_rate <= 1.0:
        raise InputError(f"spike_rate 必须位于 [0, 1]，实际为 {spike_rate}")
    if dataset.n == 0:
        return SpikeInjection(dataset, [])

    rng = substream(rng_seed, 'spikes')
    hits = rng.random((dataset.n, dataset.s, dataset.f)) < spike_rate
    log = []
    samples = []
    for i, sample in enumerate(dataset.samples):
        if not hits[i].any():
            samples.append(sample)
            continue
        frames = []
        for s, frame in enumerate(sample.frames):
            cells = np.flatnonzero(hits[i, s])
            if cells.size == 0:
                frames.append(frame)
                continue
            values = frame.subcarriers.copy()
            for k in cells:
                log.append({'sample': i, 'sensor': s, 'subcarrier': int(k),
                            'original_amp': float(abs(values[k]))})
            values[cells] = values[cells] * spike_gain
            frames.append(frame.with_subcarriers(values))
        samples.append(LabeledSample(frames=tuple(frames), truth=sample.truth,
                                     missing_sensors=sample.missing_sensors))
    return SpikeInjection(Dataset(samples, dict(dataset.meta, spikes=len(log))), log)


def write_injection_log(path: str | Path, log: list[dict]) -> Path:
    path = Path(path)
    with path.open('w', encoding='utf-8', newline='\n') as fh:
        for record in log:
            fh.write(json.dumps(record, separators=(',', ':')))
            fh.write('\n')
    return path
