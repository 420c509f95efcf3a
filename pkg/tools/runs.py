from collections.abc import Iterator
from typing import Any

from csi_core.errors import InputError
from tools.base import Command, Output
from tools.common import run_registry


class RunsCommand(Command):
    """查询结果目录下的实验登记表：--id 取单条完整结果，否则按类型或指纹列出"""

    def execute(self, args: dict[str, Any]) -> Iterator[Output]:
        registry = run_registry(self)
        run_id = args.get('id')
        if run_id is not None:
            row = registry.get(run_id)
            if row is None:
                raise InputError(f"登记表中没有编号 #{run_id}")
            yield self.record(row)
            return

        if args.get('fingerprint'):
            rows = registry.find(args['fingerprint'])
        else:
            rows = registry.list_runs(args.get('kind'))
        yield self.record({'runs': rows})
