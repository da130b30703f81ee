"""
异常定义

所有模块抛出的异常都继承自 GasVineError，上下文信息保存在实例属性中，
便于 CLI 输出单行错误原因。
"""

from typing import Any


class GasVineError(Exception):
    """项目异常基类"""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context
        for key, value in context.items():
            setattr(self, key, value)


class IngestError(GasVineError):
    """数据读取、对齐或变换错误"""


class DiagnosticsError(GasVineError):
    """描述统计或诊断检验无法计算"""


class MarginalFitError(GasVineError):
    """边缘模型拟合失败"""


class CopulaDomainError(GasVineError):
    """Copula 参数或参数超出定义域"""


class RootFindingError(GasVineError):
    """逆 h 函数求根不收敛"""


class PairFitError(GasVineError):
    """二元动态 Copula 估计失败"""


class VineStructureError(GasVineError):
    """Vine 结构非法或无法构造"""


class VineFitError(GasVineError):
    """Vine 逐层拟合失败"""


class SimulationError(GasVineError):
    """Vine 模拟失败"""


class BacktestError(GasVineError):
    """VaR 回测失败"""


class ArtifactError(GasVineError):
    """模型文件读写错误"""


class ConfigError(GasVineError):
    """配置项错误"""
