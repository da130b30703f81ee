"""
描述统计与诊断检验

均值、标准差、偏度、Pearson 峰度，以及 Ljung-Box 与 ARCH-LM 检验。
"""

import numpy as np
from numpy.typing import ArrayLike
from scipy import stats
from statsmodels.stats.diagnostic import acorr_ljungbox, het_arch

from ..core.errors import DiagnosticsError
from ..core.models import DescriptiveStats

DEFAULT_LAGS = 10
MIN_DESCRIBE_LENGTH = 8


def _as_series(series: ArrayLike) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if not np.isfinite(x).all():
        raise DiagnosticsError("series contains non-finite values")
    return x


def _check_lags(x: np.ndarray, lags: int) -> None:
    if lags < 1:
        raise DiagnosticsError(f"lags must be positive, got {lags}")
    if lags >= len(x) / 2:
        raise DiagnosticsError(f"lags={lags} must be below half the length ({len(x)})")


def ljung_box(series: ArrayLike, lags: int = DEFAULT_LAGS) -> tuple[float, float]:
    """
    Ljung-Box 自相关检验

    Q = n(n+2) Σ_{k=1..lags} ρ̂_k² / (n-k)，p 值来自 χ²(lags)。

    Returns:
        (统计量, p 值)

    Raises:
        DiagnosticsError: 方差为零或滞后阶数过大
    """
    x = _as_series(series)
    _check_lags(x, lags)
    if np.var(x) == 0.0:
        raise DiagnosticsError("Ljung-Box undefined for a zero-variance series")

    result = acorr_ljungbox(x, lags=[lags], return_df=True)
    stat = float(result["lb_stat"].iloc[0])
    return stat, float(np.clip(result["lb_pvalue"].iloc[0], 0.0, 1.0))


def arch_lm_test(series: ArrayLike, lags: int = DEFAULT_LAGS) -> tuple[float, float]:
    """
    Engle ARCH-LM 检验

    以去均值序列的平方对自身滞后回归，LM = n·R²，p 值来自 χ²(lags)。

    Returns:
        (LM 统计量, p 值)

    Raises:
        DiagnosticsError: 平方序列为常数导致回归奇异
    """
    x = _as_series(series)
    _check_lags(x, lags)
    resid = x - x.mean()
    squared = resid**2
    if np.ptp(squared) == 0.0:
        raise DiagnosticsError(
            "ARCH-LM regression is singular for a constant squared series"
        )

    lm, lm_p, _, _ = het_arch(resid, nlags=lags)
    if not np.isfinite(lm):
        raise DiagnosticsError("ARCH-LM regression is singular")
    return max(float(lm), 0.0), float(np.clip(lm_p, 0.0, 1.0))


def describe(series: ArrayLike, lags: int = DEFAULT_LAGS) -> DescriptiveStats:
    """
    计算单个序列的描述统计

    峰度为非超额（Pearson）峰度，与 3 比较判断厚尾。短序列上诊断检验的滞后
    阶数取 min(lags, ⌊(n-1)/2⌋)。

    Args:
        series: 实数序列，长度至少 8
        lags: 诊断检验滞后阶数

    Returns:
        DescriptiveStats

    Raises:
        DiagnosticsError: 序列过短或为常数
    """
    x = _as_series(series)
    if len(x) < MIN_DESCRIBE_LENGTH:
        raise DiagnosticsError(
            f"describe needs at least {MIN_DESCRIBE_LENGTH} values, got {len(x)}"
        )
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise DiagnosticsError(
            "skewness and kurtosis are undefined for a constant series"
        )

    effective = max(1, min(lags, (len(x) - 1) // 2))
    _, lb_p = ljung_box(x, effective)
    try:
        _, arch_p = arch_lm_test(x, effective)
    except DiagnosticsError:
        # 平方序列为常数时（如 ±c 交替序列）不存在 ARCH 效应
        arch_p = 1.0

    return DescriptiveStats(
        mean=float(np.mean(x)),
        sd=sd,
        skewness=float(stats.skew(x, bias=True)),
        kurtosis=float(stats.kurtosis(x, fisher=False, bias=True)),
        ljung_box_p=lb_p,
        arch_lm_p=arch_p,
        lags=effective,
    )
