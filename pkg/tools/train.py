from collections.abc import Iterator
from pathlib import Path
from typing import Any

from sis.checkpoint import save_checkpoint
from tools.base import Command, Output
from tools.common import build_schedule, load_train_test, model_config, publish
from trainer.export import cdf_rows, loss_rows, write_curve_csv
from trainer.trainer import fit_config, train


class TrainCommand(Command):
    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        train_matrix, test_matrix = load_train_test(self, args)
        schedule = build_schedule(self, args, train_matrix.shape[1])
        config = fit_config(model_config(self, args), train_matrix, schedule)

        params, result = train(train_matrix, schedule, config, self.seed, test=test_matrix)

        checkpoint = Path(args.get('checkpoint') or self.out_dir / 'model.sism')
        save_checkpoint(str(checkpoint), params, config)
        write_curve_csv(self.out_dir / 'train_loss.csv', loss_rows(result.loss_curve))
        write_curve_csv(self.out_dir / 'train_cdf.csv', cdf_rows(result.per_task))

        yield from publish(self, 'train', result.to_dict(), result.config_fingerprint)
        yield self.text(f"检查点已保存: {checkpoint}")
