"""
分数阶差分 (1 - L)^d
"""

import numpy as np
from numpy.typing import ArrayLike
from scipy.signal import lfilter

from ..core.errors import MarginalFitError

# 默认截断项数，|d| < 0.5 时更高阶系数小于 1e-6
DEFAULT_TRUNCATION = 1000


def frac_weights(d: float, truncation: int) -> np.ndarray:
    """
    分数差分系数 π_0..π_K

    π_0 = 1，π_k = π_{k-1} * (k - 1 - d) / k
    """
    k = np.arange(1, truncation + 1, dtype=float)
    weights = np.empty(truncation + 1)
    weights[0] = 1.0
    weights[1:] = np.cumprod((k - 1.0 - d) / k)
    return weights


def frac_diff(
    series: ArrayLike, d: float, truncation: int = DEFAULT_TRUNCATION
) -> np.ndarray:
    """
    对序列做截断的分数阶差分

    y_t = Σ_{k=0..min(t, K)} π_k x_{t-k}

    Args:
        series: 输入序列
        d: 差分阶数
        truncation: 截断项数 K

    Returns:
        与输入等长的差分序列

    Raises:
        MarginalFitError: 截断项数不是正整数
    """
    x = np.asarray(series, dtype=float)
    if truncation < 1:
        raise MarginalFitError(
            f"truncation must be a positive integer, got {truncation}",
            truncation=truncation,
        )
    if d == 0.0:
        return x.copy()
    k = min(truncation, max(len(x) - 1, 0))
    return lfilter(frac_weights(d, k), [1.0], x)
