from collections.abc import Iterator
from typing import Any

from csi_core.dataset_io import write_metrics
from dsp.pipeline import read_amplitude_matrix
from sis.checkpoint import load_checkpoint
from sis.masks import SensorMask
from sis.model import resolve_head
from tools.base import Command, Output, parse_list
from trainer.evaluator import evaluate
from trainer.trainer import data_digest
from utils.fingerprint import config_fingerprint


class EvaluateCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        params, config = load_checkpoint(args['checkpoint'])
        data = read_amplitude_matrix(args['data'])
        labels = parse_list(args.get('mask')) or [SensorMask.full(config.S).label]
        task = args.get('task')

        summary = {}
        for label in labels:
            mask = SensorMask.from_label(label, config.S)
            head = resolve_head(params, mask, task)
            report = evaluate(params, data, mask, head)
            path = write_metrics(self.out_dir / f"metrics_{mask.label}.json", report)
            summary[mask.label] = {'mae_m': report.mae_m, 'lmse_m2': report.lmse_m2, 'r2': report.r2,
                                   'head': params.heads[head], 'file': str(path)}

        fingerprint = config_fingerprint('evaluate', config, labels, task, data_digest(data))
        yield self.fingerprint_artifact('evaluate', fingerprint)
        yield self.record(summary)
