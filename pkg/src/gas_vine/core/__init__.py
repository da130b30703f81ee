"""核心模块"""

from .errors import GasVineError
from .models import (
    DescriptiveStats,
    IndicatorPanel,
    KupiecResult,
    RawPanel,
    UniformPanel,
    VaRSeries,
    WeightVector,
)

__all__ = [
    "GasVineError",
    "DescriptiveStats",
    "IndicatorPanel",
    "KupiecResult",
    "RawPanel",
    "UniformPanel",
    "VaRSeries",
    "WeightVector",
]
