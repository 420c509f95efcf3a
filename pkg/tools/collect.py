from collections.abc import Iterator
from typing import Any

from sensornet.collector import collector_run
from tools.base import Command, Output, parse_address


class CollectCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        control_port = args.get('control_port')
        state = collector_run(
            parse_address(args['listen']),
            args.get('output') or self.out_dir / 'frames.jsonl',
            args.get('expected_sensors') or self.config.scene.sensor_count,
            timeout_s=args.get('timeout_s'),
            state_db=self.out_dir / 'collector.sqlite',
            control_addr=None if control_port is None else ('127.0.0.1', control_port),
        )
        yield self.artifact('collector_state.json', state.snapshot())
        yield self.text(f"采集结束，落盘 {state.persisted} 帧")
