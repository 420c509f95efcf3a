# trainer/report.py
from __future__ import annotations

from typing import Any

from utils.report_loader import ReportLoader

_loader: ReportLoader | None = None


def render_report(kind: str, payload: dict[str, Any], fingerprint: str | None = None) -> str:
    global _loader
    if _loader is None:
        _loader = ReportLoader()
    return _loader.get_report(kind, {'result': payload, 'fingerprint': fingerprint})
