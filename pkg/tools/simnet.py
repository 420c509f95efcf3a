import json
import logging
from collections.abc import Iterator
from pathlib import Path
from typing import Any

from csi_core.errors import InputError
from sensornet.simulation import SimulationInterrupted, run_simulation
from sensornet.trajectory import hover_trajectory, read_trajectory_csv, write_trajectory_csv
from tools.base import Command, Output, parse_address

logger = logging.getLogger('tools.simnet')


class SimnetCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        scene = self.config.seeded_scene()
        faults = self.config.seeded_faults()
        updates = {name: args[key] for key, name in
                   (('drop', 'drop_rate'), ('reorder', 'reorder_rate'), ('duplicate', 'duplicate_rate'))
                   if args.get(key) is not None}
        if updates:
            faults = faults.model_copy(update=updates)

        out_dir = self.out_dir
        if args.get('trajectory'):
            trajectory = read_trajectory_csv(args['trajectory'])
        else:
            plan = self.config.plan.build(scene)
            trajectory = hover_trajectory(plan.grid_points, plan.frames_per_point, plan.frame_interval_us,
                                          plan.start_time_us)
            write_trajectory_csv(out_dir / 'trajectory.csv', trajectory)

        sensor_count = args.get('sensors') or scene.sensor_count
        if sensor_count > scene.sensor_count:
            raise InputError(f"场景只有 {scene.sensor_count} 个传感器，无法模拟 {sensor_count} 个")
        collector_addr = parse_address(args['collector_addr']) if args.get('collector_addr') else None
        control_port = args.get('control_port')
        output = Path(args.get('output') or out_dir / 'frames.jsonl')

        try:
            report = run_simulation(
                scene,
                trajectory,
                output,
                faults=faults,
                sensors=list(range(sensor_count)),
                rate_hz=args.get('rate_hz') or 50.0,
                ticks=args.get('ticks'),
                collector_addr=collector_addr,
                state_db=out_dir / 'collector.sqlite',
                control_addr=None if control_port is None else ('127.0.0.1', control_port),
                pace=bool(args.get('pace')),
            )
        except SimulationInterrupted as e:
            # 先把部分统计落盘，再交给运行时按中断处理
            stats_path = out_dir / 'simnet_stats.json'
            stats_path.parent.mkdir(parents=True, exist_ok=True)
            stats_path.write_text(json.dumps(e.report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True), encoding='utf-8')
            logger.warning(f"仿真中断，部分输出: {output}，统计: {stats_path}")
            raise

        fingerprint = self.fingerprint('simnet', args)
        yield self.fingerprint_artifact('simnet', fingerprint)
        yield self.artifact('simnet_stats.json', report.to_dict())
        persisted = report.collector.get('persisted', 0)
        yield self.text(
            f"{len(report.send_stats)} 个传感器，落盘 {persisted} 帧 -> {output}"
            + ('' if report.completed else '（未在超时前完成）')
        )
