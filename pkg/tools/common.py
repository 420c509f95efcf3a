# tools/common.py
"""训练类命令共用的参数展开与结果输出"""
from collections.abc import Iterator
from typing import Any

from dsp.pipeline import AmplitudeMatrix, read_amplitude_matrix
from sis.config import SisConfig
from tools.base import Command, Output, parse_list
from trainer.experiments import split_dataset
from trainer.registry import RunRegistry
from trainer.report import render_report
from trainer.tasks import TrainSchedule

REGISTRY_FILE = 'runs.sqlite'


def model_config(command: Command, args: dict[str, Any]) -> SisConfig:
    updates = {k: args[k] for k in ('lambda_s', 'lambda_v', 'lambda_fuse', 'activation') if args.get(k) is not None}
    return command.config.model.model_copy(update=updates) if updates else command.config.model


def build_schedule(command: Command, args: dict[str, Any], sensor_count: int,
                   fractions: list[float] | None = None) -> TrainSchedule:
    settings = command.config.schedule
    updates = {k: args[k] for k in ('epochs', 'batch_size', 'lr', 'task_sampling') if args.get(k) is not None}
    if updates:
        settings = settings.model_copy(update=updates)
    return settings.build(
        sensor_count,
        sensor_configs=parse_list(args.get('sensor_configs')),
        fractions=fractions or parse_list(args.get('fractions'), float),
    )


def load_train_test(command: Command, args: dict[str, Any]) -> tuple[AmplitudeMatrix, AmplitudeMatrix | None]:
    """无 --test 时按种子从训练文件中划出测试集"""
    train = read_amplitude_matrix(args['train'])
    if args.get('test'):
        return train, read_amplitude_matrix(args['test'])
    test_fraction = args.get('test_fraction')
    if test_fraction:
        return split_dataset(train, test_fraction, command.seed)
    return train, None


def run_registry(command: Command) -> RunRegistry:
    return RunRegistry(command.out_dir / REGISTRY_FILE)


def publish(command: Command, kind: str, payload: dict[str, Any], fingerprint: str) -> Iterator[Output]:
    """结果 JSON、markdown 报告、指纹文件 + 登记表"""
    run_id = run_registry(command).record(kind, fingerprint, payload)
    yield command.fingerprint_artifact(kind, fingerprint)
    yield command.artifact(f"{kind}_result.json", payload)
    yield command.artifact(f"{kind}_report.md", render_report(kind, payload, fingerprint))
    yield command.text(f"{kind} 完成，登记编号 #{run_id}，指纹 {fingerprint[:12]}")
