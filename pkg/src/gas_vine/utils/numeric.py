"""
数值辅助函数
"""

import numpy as np
from numpy.typing import ArrayLike

# 伪观测值的截断界限，避免 log(0)
UNIT_EPS = 1e-10


def clamp_unit(values: ArrayLike) -> np.ndarray:
    """将数值截断到 [UNIT_EPS, 1 - UNIT_EPS]"""
    return np.clip(np.asarray(values, dtype=float), UNIT_EPS, 1.0 - UNIT_EPS)
