import logging
from collections.abc import Iterator
from pathlib import Path
from typing import Any

from csi_core.dataset_io import write_dataset
from synth.generator import generate_dataset
from synth.spikes import inject_spikes, write_injection_log
from tools.base import Command, Output
from utils.rng import child_seed

logger = logging.getLogger('tools.generate')


class GenerateCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        config = self.config
        scene = config.seeded_scene()
        plan_settings = config.plan
        overrides = {k: args[k] for k in ('frames_per_point', 'grid_n') if args.get(k) is not None}
        if overrides:
            plan_settings = plan_settings.model_copy(update=overrides)
        plan = plan_settings.build(scene)

        split = args.get('split') or 'train'
        dataset = generate_dataset(scene, plan, split=split)

        spike_rate = args.get('spike_rate')
        spike_rate = config.spikes.rate if spike_rate is None else spike_rate
        log = []
        if spike_rate > 0:
            # train 与 test 的尖峰位置互相独立
            injection = inject_spikes(dataset, spike_rate, config.spikes.gain, child_seed(self.seed, 'spikes', split))
            dataset, log = injection.dataset, injection.log

        out = Path(args['out'])
        write_dataset(out, dataset)
        if log:
            write_injection_log(out.with_name(out.stem + '.spikes.jsonl'), log)

        fingerprint = self.fingerprint('generate', args)
        yield self.fingerprint_artifact('generate', fingerprint)
        yield self.text(f"N={dataset.n}, S={dataset.s}, f={dataset.f}, split={split}, spikes={len(log)} -> {out}")
