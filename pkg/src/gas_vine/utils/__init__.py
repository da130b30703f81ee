"""工具函数模块"""

from .numeric import UNIT_EPS, clamp_unit
from .optimize import OptimizerConfig, OptimizeOutcome, minimize_with_restarts
from .rng import derive_seed, substream

__all__ = [
    "UNIT_EPS",
    "clamp_unit",
    "OptimizerConfig",
    "OptimizeOutcome",
    "minimize_with_restarts",
    "derive_seed",
    "substream",
]
