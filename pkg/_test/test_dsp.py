import numpy as np
import pytest

from csi_core.errors import DomainError, InputError
from csi_core.types import CsiFrame, Dataset, LabeledSample, Position3D
from dsp.compensation import amplitude, compensate_frame, dac_scaling_factor
from dsp.hampel import HampelParams, hampel_filter, hampel_filter_matrix
from dsp.pipeline import (
    FLAG_DAC,
    FLAG_HAMPEL,
    AmplitudeMatrix,
    preprocess,
    read_amplitude_matrix,
    write_amplitude_matrix,
)
from synth.agc import apply_agc
from synth.channel import true_channel
from synth.generator import generate_dataset
from synth.scene import GridPlan, SceneConfig
from synth.spikes import inject_spikes


def _frame(values, gain_db=0.0):
    return CsiFrame(sensor_id=0, seq=0, timestamp_us=0, agc_gain_db=gain_db, subcarriers=np.asarray(values))


@pytest.mark.parametrize('gain_db, expected', [(0.0, 1.0), (20.0, 0.1), (-20.0, 10.0)])
def test_scaling_factor(gain_db, expected):
    assert dac_scaling_factor(gain_db) == pytest.approx(expected)


def test_scaling_factor_rejects_non_finite():
    with pytest.raises(DomainError):
        dac_scaling_factor(float('inf'))


def test_compensate_zero_gain_is_identity():
    frame = _frame([1 + 1j, 2 - 3j])
    np.testing.assert_array_equal(compensate_frame(frame).subcarriers, frame.subcarriers)


def test_compensate_twenty_db():
    compensated = compensate_frame(_frame([3 + 4j], gain_db=20.0))
    assert compensated.subcarriers[0] == pytest.approx(0.3 + 0.4j)
    assert amplitude(compensated)[0] == pytest.approx(0.5)
    assert compensated.agc_gain_db == 0.0


@pytest.mark.parametrize('value, expected', [(0j, 0.0), (3 + 4j, 5.0), (1 + 1j, np.sqrt(2))])
def test_amplitude(value, expected):
    assert amplitude(_frame([value]))[0] == pytest.approx(expected)


def test_compensation_recovers_true_channel():
    scene = SceneConfig(rng_seed=11, agc_jitter_db=2.0)
    rng = np.random.default_rng(0)
    for sensor in range(scene.sensor_count):
        channel = true_channel(scene, Position3D(1.5, 2.0, 1.0), sensor, rng)
        distorted, gain = apply_agc(channel, scene, rng)
        recovered = compensate_frame(_frame(distorted, gain)).subcarriers
        np.testing.assert_allclose(recovered, channel, rtol=1e-12)


def test_hampel_constant_series():
    filtered, mask = hampel_filter([2, 2, 2, 2, 2])
    np.testing.assert_array_equal(filtered, [2, 2, 2, 2, 2])
    assert not mask.any()


def test_hampel_single_spike():
    filtered, mask = hampel_filter([1, 1, 1, 100, 1, 1, 1], window_half=3, k_mad=3)
    np.testing.assert_array_equal(filtered, [1] * 7)
    assert mask.tolist() == [False, False, False, True, False, False, False]


def test_hampel_gaussian_false_flags():
    series = np.random.default_rng(42).normal(size=10_000)
    _, mask = hampel_filter(series, window_half=25, k_mad=3)
    assert mask.mean() < 0.02


def test_hampel_empty_series():
    with pytest.raises(InputError):
        hampel_filter([])


def test_hampel_columns_are_independent():
    values = np.ones((9, 2))
    values[4, 0] = 50.0
    filtered, mask = hampel_filter_matrix(values, HampelParams(window_half=2))
    assert mask[:, 1].sum() == 0
    assert mask[4, 0]
    assert filtered[4, 0] == 1.0


def _synthetic(agc_enabled=True, seed=3, frames=20):
    scene = SceneConfig(rng_seed=seed, agc_enabled=agc_enabled, subcarrier_count=16)
    plan = GridPlan.build(scene.room, grid_n=2, heights=(1.0,), frames_per_point=frames)
    return generate_dataset(scene, plan)


def test_pipeline_both_disabled_is_raw_amplitude():
    dataset = _synthetic(frames=3)
    matrix = preprocess(dataset, enable_dac=False, enable_hampel=False)
    np.testing.assert_allclose(matrix.values[2, 1], np.abs(dataset.samples[2].frames[1].subcarriers))
    assert matrix.provenance == ('raw',)
    np.testing.assert_allclose(matrix.labels, dataset.truths())


def test_dac_reduces_variance_at_fixed_point():
    dataset = _synthetic(frames=20)
    raw = preprocess(dataset, enable_dac=False, enable_hampel=False).values[:20]
    dac = preprocess(dataset, enable_dac=True, enable_hampel=False).values[:20]
    assert np.mean(np.var(dac, axis=0)) < np.mean(np.var(raw, axis=0))


def test_hampel_flags_injected_spikes():
    scene = SceneConfig(rng_seed=9, subcarrier_count=50)
    plan = GridPlan.build(scene.room, grid_n=2, heights=(1.0, 2.0), frames_per_point=20)
    injection = inject_spikes(generate_dataset(scene, plan), 0.01, 10.0, rng_seed=4)
    matrix = preprocess(injection.dataset, enable_dac=True, enable_hampel=True)
    flagged = sum(bool(matrix.outlier_mask[i, s, k]) for i, s, k in injection.cells())
    assert flagged >= 0.95 * len(injection.log)


def test_amplitude_matrix_rejects_negative():
    with pytest.raises(DomainError):
        AmplitudeMatrix(values=-np.ones((1, 1, 1)))


def test_amplitude_file_roundtrip(tmp_path):
    matrix = preprocess(_synthetic(frames=3), enable_dac=True, enable_hampel=True)
    path = write_amplitude_matrix(tmp_path / 'amp.bin', matrix)
    loaded = read_amplitude_matrix(path)
    assert loaded.flags & FLAG_DAC and loaded.flags & FLAG_HAMPEL
    assert loaded.provenance == ('raw', 'dac', 'hampel')
    np.testing.assert_allclose(loaded.values, matrix.values, rtol=1e-6)
    np.testing.assert_array_equal(loaded.labels, matrix.labels)


def test_amplitude_file_truncated(tmp_path):
    path = write_amplitude_matrix(tmp_path / 'amp.bin', preprocess(_synthetic(frames=3), False, False))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(InputError):
        read_amplitude_matrix(path)


def test_preprocess_empty_dataset():
    with pytest.raises(InputError):
        preprocess(Dataset([]))


def test_agc_then_dac_recovers_random_channels():
    scene = SceneConfig(agc_jitter_db=3.0)
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        channel = rng.normal(size=8) + 1j * rng.normal(size=8)
        channel *= 10.0 ** rng.uniform(-2.0, 2.0)
        distorted, gain = apply_agc(channel, scene, rng)
        assert -30.0 <= gain <= 30.0
        recovered = compensate_frame(_frame(distorted, gain)).subcarriers
        np.testing.assert_allclose(recovered, channel, rtol=1e-12)


def test_compensate_frame_is_linear():
    rng = np.random.default_rng(8)
    a = rng.normal(size=6) + 1j * rng.normal(size=6)
    b = rng.normal(size=6) + 1j * rng.normal(size=6)
    gain = 7.5
    combined = compensate_frame(_frame(2.0 * a - 3.0 * b, gain)).subcarriers
    separate = 2.0 * compensate_frame(_frame(a, gain)).subcarriers - 3.0 * compensate_frame(_frame(b, gain)).subcarriers
    np.testing.assert_allclose(combined, separate, rtol=1e-12, atol=1e-14)


def test_hampel_is_idempotent():
    series = np.random.default_rng(12).normal(size=400)
    series[::37] += 25.0
    once, _ = hampel_filter(series, window_half=5, k_mad=3.0)
    twice, flags = hampel_filter(once, window_half=5, k_mad=3.0)
    np.testing.assert_array_equal(twice, once)
    assert not flags.any()


def test_hampel_leaves_unflagged_points_unchanged():
    series = np.random.default_rng(13).normal(size=400)
    series[::29] -= 40.0
    filtered, flags = hampel_filter(series, window_half=4, k_mad=3.0)
    assert flags.any()
    np.testing.assert_array_equal(filtered[~flags], series[~flags])
