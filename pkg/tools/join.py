from collections.abc import Iterator
from pathlib import Path
from typing import Any

from csi_core.dataset_io import write_dataset
from sensornet.join import join_labels
from sensornet.trajectory import read_trajectory_csv
from tools.base import Command, Output


class JoinCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        trajectory = read_trajectory_csv(args['trajectory'])
        sensor_count = args.get('sensors')
        result = join_labels(
            args['frames'],
            trajectory,
            sensor_ids=None if sensor_count is None else list(range(sensor_count)),
            tolerance_us=int(round((args.get('tolerance_ms') or 10.0) * 1000)),
            drop_incomplete=bool(args.get('drop_incomplete')),
        )
        out = write_dataset(Path(args['out']), result.dataset)
        yield self.record({**result.to_dict(), 'out': str(out)})
