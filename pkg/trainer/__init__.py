# trainer/__init__.py
from .evaluator import evaluate, mean_baseline
from .experiments import (
    AblationTable,
    SensorStudy,
    SweepResult,
    ablation_grid,
    sample_sweep,
    sensor_study,
    single_task_baseline,
    split_dataset,
)
from .tasks import ScheduleSettings, TaskSpec, TrainSchedule, build_tasks
from .trainer import ExperimentResult, fit_config, train

__all__ = [
    'TaskSpec', 'TrainSchedule', 'ScheduleSettings', 'ExperimentResult',
    'build_tasks', 'train', 'fit_config', 'evaluate', 'mean_baseline',
    'split_dataset', 'ablation_grid', 'sample_sweep', 'sensor_study', 'single_task_baseline',
    'AblationTable', 'SweepResult', 'SensorStudy',
]
