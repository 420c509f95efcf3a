import csv
from collections.abc import Iterator
from io import StringIO
from typing import Any

from csi_core.dataset_io import read_dataset
from tools.base import Command, Output
from tools.common import build_schedule, model_config, publish
from trainer.experiments import ablation_grid
from utils.fingerprint import config_fingerprint

ABLATION_COLUMNS = ['dac', 'hampel', 'mae_m', 'lmse_m2', 'r2']


class AblateCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        raw = read_dataset(args['raw'])
        test_raw = read_dataset(args['test_raw']) if args.get('test_raw') else None
        schedule = build_schedule(self, args, raw.s)
        config = model_config(self, args)

        table = ablation_grid(raw, config, schedule, self.seed, test_raw=test_raw,
                              hampel_params=self.config.hampel,
                              test_fraction=args.get('test_fraction') or 0.2)

        output = StringIO()
        writer = csv.DictWriter(output, fieldnames=ABLATION_COLUMNS, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        writer.writerows(table.rows())

        payload = table.to_dict()
        fingerprint = config_fingerprint('ablate', payload['fingerprints'])
        yield self.artifact('ablation.csv', output.getvalue())
        yield from publish(self, 'ablate', payload, fingerprint)
