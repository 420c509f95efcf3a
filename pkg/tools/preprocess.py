from collections.abc import Iterator
from pathlib import Path
from typing import Any

from csi_core.dataset_io import read_dataset
from dsp.pipeline import preprocess, write_amplitude_matrix
from tools.base import Command, Output


class PreprocessCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        dataset = read_dataset(args['input'])
        enable_dac = args.get('dac', 'on') == 'on'
        enable_hampel = args.get('hampel', 'on') == 'on'

        matrix = preprocess(dataset, enable_dac=enable_dac, enable_hampel=enable_hampel,
                            hampel_params=self.config.hampel)
        out = write_amplitude_matrix(Path(args['out']), matrix)

        outliers = 0 if matrix.outlier_mask is None else int(matrix.outlier_mask.sum())
        yield self.fingerprint_artifact('preprocess', self.fingerprint('preprocess', args))
        yield self.record({
            'shape': list(matrix.shape),
            'provenance': list(matrix.provenance),
            'outliers': outliers,
            'out': str(out),
        })
