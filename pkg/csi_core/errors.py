# csi_core/errors.py
"""全链路共享的异常类型，均继承 ValueError，便于上层统一捕获"""


class CiuavError(ValueError):
    """所有业务异常的基类"""


class InputError(CiuavError):
    """输入参数不合法"""


class InputShapeError(InputError):
    """张量/列表维度不匹配"""


class DomainError(CiuavError):
    """数值落在定义域之外（非有限值、位置越界等）"""


class NumericError(CiuavError):
    """计算过程中出现非有限中间量"""

    def __init__(self, tensor: str, message: str | None = None):
        self.tensor = tensor
        super().__init__(message or f"张量 {tensor} 出现非有限值")


class ConfigError(CiuavError):
    """配置文件解析或校验失败，携带行号"""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        location = ""
        if path:
            location = f"{path}:{line}: " if line else f"{path}: "
        super().__init__(f"{location}{message}")


class TrainingError(CiuavError):
    """训练过程中止，记录步数与任务名"""

    def __init__(self, step: int, task: str, cause: Exception):
        self.step = step
        self.task = task
        self.cause = cause
        super().__init__(f"训练在第 {step} 步（任务 {task}）中止: {cause}")
