import numpy as np
import pytest

from csi_core.errors import InputError
from trainer.tasks import DEFAULT_FRACTIONS, DEFAULT_SENSOR_CONFIGS, ScheduleSettings, TrainSchedule, build_tasks


def test_single_task():
    tasks = build_tasks(['1-2-3'], [1.0])
    assert [task.name for task in tasks] == ['1-2-3@1.00']


def test_sensor_configuration_rows():
    tasks = build_tasks(DEFAULT_SENSOR_CONFIGS, [1.0])
    assert [task.mask.label for task in tasks] == ['3', '1', '1-3', '1-2-3']


def test_cartesian_product():
    tasks = build_tasks(DEFAULT_SENSOR_CONFIGS, DEFAULT_FRACTIONS)
    assert len(tasks) == 16
    assert len({task.name for task in tasks}) == 16


def test_empty_lists_rejected():
    with pytest.raises(InputError):
        build_tasks([], [1.0])
    with pytest.raises(InputError):
        build_tasks(['1'], [])


def test_duplicate_tasks_rejected():
    with pytest.raises(InputError):
        build_tasks(['1-3', '3-1'], [1.0])


def test_fraction_range():
    with pytest.raises(InputError):
        build_tasks(['1'], [0.0])
    with pytest.raises(InputError):
        build_tasks(['1'], [1.5])


def test_sample_subsets_are_nested():
    small, medium, full = build_tasks(['1-2-3'], [0.25, 0.5, 1.0], sample_seed=3)
    n = 41
    a, b, c = small.sample_indices(n), medium.sample_indices(n), full.sample_indices(n)
    assert len(a) == 11 and len(b) == 21 and len(c) == n
    assert set(a) <= set(b) <= set(c)
    np.testing.assert_array_equal(a, small.sample_indices(n))


def test_schedule_settings_build():
    settings = ScheduleSettings(sensor_configs=['1', 'all'], fractions=[0.5, 1.0], epochs=3,
                                task_sampling='proportional')
    schedule = settings.build(sensor_count=3)
    assert [task.name for task in schedule.tasks] == ['1@0.50', '1@1.00', '1-2-3@0.50', '1-2-3@1.00']
    assert schedule.task_sampling == 'proportional'
    assert schedule.describe()['epochs'] == 3


def test_round_robin_alias():
    schedule = TrainSchedule(tasks=build_tasks(['1'], [1.0]), task_sampling='round-robin')
    assert schedule.task_sampling == 'round_robin'


def test_schedule_requires_tasks():
    with pytest.raises(ValueError):
        TrainSchedule(tasks=[])
