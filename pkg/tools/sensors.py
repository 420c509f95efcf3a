from collections.abc import Iterator
from typing import Any

from csi_core.errors import InputError
from tools.base import Command, Output
from tools.common import build_schedule, load_train_test, model_config, publish
from trainer.experiments import sensor_study


class SensorsCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        train_matrix, test_matrix = load_train_test(self, args)
        if test_matrix is None:
            raise InputError("sensors 需要 --test 或 --test-fraction")
        schedule = build_schedule(self, args, train_matrix.shape[1], fractions=[1.0])
        study = sensor_study(train_matrix, test_matrix, model_config(self, args), schedule, self.seed,
                             with_single_task=args.get('single_task', True))
        yield from publish(self, 'sensors', study.to_dict(), study.joint.config_fingerprint)
