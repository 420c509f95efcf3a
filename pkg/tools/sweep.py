from collections.abc import Iterator
from typing import Any

from csi_core.errors import InputError
from tools.base import Command, Output, parse_list
from tools.common import build_schedule, load_train_test, model_config, publish
from trainer.experiments import sample_sweep
from trainer.export import sweep_rows, write_curve_csv
from trainer.tasks import DEFAULT_FRACTIONS


class SweepCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        train_matrix, test_matrix = load_train_test(self, args)
        if test_matrix is None:
            raise InputError("sweep 需要 --test 或 --test-fraction")
        fractions = parse_list(args.get('fractions'), float) or DEFAULT_FRACTIONS
        schedule = build_schedule(self, args, train_matrix.shape[1], fractions=[1.0])

        sweep = sample_sweep(train_matrix, test_matrix, model_config(self, args), schedule, fractions, self.seed)

        write_curve_csv(self.out_dir / 'sweep.csv', sweep_rows(sweep.points))
        yield from publish(self, 'sweep', sweep.to_dict(), sweep.result.config_fingerprint)
