# utils/report_loader.py
from pathlib import Path
from jinja2 import Environment, FileSystemLoader, TemplateNotFound


class ReportLoader:
    """按实验类型加载 markdown 报告模板，缺省时回退到 base_report"""

    def __init__(self, template_dir: Path | None = None):
        self.env = Environment(
            loader=FileSystemLoader(template_dir or Path(__file__).parent.parent / 'report_templates'),
            trim_blocks=True,
            lstrip_blocks=True
        )
        self.env.filters['fmt'] = _format_number

    def get_report(self, kind: str, context: dict) -> str:
        try:
            template = self.env.get_template(f"{kind.lower()}_report.jinja")
        except TemplateNotFound:
            template = self.env.get_template("base_report.jinja")

        context = dict(context)
        context.setdefault('kind', kind)
        context.setdefault('title', _TITLES.get(kind.lower(), kind))
        return template.render(context)


_TITLES = {
    'train': '多任务训练',
    'ablate': '预处理消融实验',
    'sweep': '训练样本比例扫描',
    'sensors': '传感器配置对比',
}


def _format_number(value, digits: int = 4) -> str:
    if value is None:
        return 'n/a'
    return f"{value:.{digits}f}"
