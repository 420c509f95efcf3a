import json

import numpy as np
import pytest

from csi_core.dataset_io import read_dataset, read_frames, write_dataset, write_frames
from csi_core.errors import DomainError, InputError, InputShapeError
from csi_core.types import CsiFrame, Dataset, LabeledSample, Position3D
from synth.generator import generate_dataset


def _frame(sensor_id=0, seq=0, values=(1 + 2j, 3 - 4j)):
    return CsiFrame(sensor_id=sensor_id, seq=seq, timestamp_us=100, agc_gain_db=3.0, subcarriers=np.array(values))


def test_position_rejects_non_finite():
    with pytest.raises(DomainError):
        Position3D(float('nan'), 0, 0)


def test_frame_is_read_only():
    frame = _frame()
    with pytest.raises(ValueError):
        frame.subcarriers[0] = 0


def test_sample_requires_consistent_subcarriers():
    with pytest.raises(InputShapeError):
        LabeledSample(frames=(_frame(0), _frame(1, values=(1j,))), truth=Position3D(0, 0, 0))


def test_dataset_shape_consistency():
    a = LabeledSample(frames=(_frame(0), _frame(1)), truth=Position3D(1, 1, 1))
    b = LabeledSample(frames=(_frame(0),), truth=Position3D(1, 1, 1))
    with pytest.raises(InputShapeError):
        Dataset([a, b])


def test_write_read_dataset(tmp_path, small_scene, small_plan):
    dataset = generate_dataset(small_scene, small_plan)
    path = write_dataset(tmp_path / 'train.jsonl', dataset)
    restored = read_dataset(path)
    assert restored.n == dataset.n
    assert (restored.s, restored.f) == (dataset.s, dataset.f)
    for original, loaded in zip(dataset.samples, restored.samples):
        assert original.truth == loaded.truth
        assert all(x.same_values(y) for x, y in zip(original.frames, loaded.frames))


def test_missing_sensors_survive_io(tmp_path):
    sample = LabeledSample(frames=(_frame(0), _frame(1)), truth=Position3D(1, 2, 0.5), missing_sensors=(1,))
    path = write_dataset(tmp_path / 'd.jsonl', Dataset([sample]))
    assert read_dataset(path).samples[0].missing_sensors == (1,)


def test_read_dataset_reports_line(tmp_path):
    path = tmp_path / 'bad.jsonl'
    path.write_text('{"sensor_frames": [], "truth": [0, 0, 0]}\n{"truth": [0, 0, 0]}\n', encoding='utf-8')
    with pytest.raises(InputError) as info:
        read_dataset(path)
    assert ':1:' in str(info.value) or ':2:' in str(info.value)


@pytest.mark.parametrize('truth', [[1.0, 2.0], [1.0, 2.0, 3.0, 4.0], 'abc', [1.0, 'x', 2.0]])
def test_bad_truth_reports_line(tmp_path, truth):
    good = Dataset([LabeledSample(frames=(_frame(0),), truth=Position3D(1, 2, 0.5))])
    path = write_dataset(tmp_path / 'd.jsonl', good)
    record = json.loads(path.read_text(encoding='utf-8'))
    record['truth'] = truth
    with path.open('a', encoding='utf-8') as f:
        f.write(json.dumps(record) + '\n')
    with pytest.raises(InputError) as info:
        read_dataset(path)
    assert f'{path}:2:' in str(info.value)
    assert 'truth' in str(info.value)


def test_read_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_dataset(tmp_path / 'nope.jsonl')


def test_frames_io(tmp_path):
    frames = [_frame(0, 0), _frame(1, 5)]
    assert write_frames(tmp_path / 'f.jsonl', frames) == 2
    loaded = read_frames(tmp_path / 'f.jsonl')
    assert all(a.same_values(b) for a, b in zip(frames, loaded))
