"""
组合聚合、蒙特卡洛 VaR 与 Kupiec 检验

VaR 取模拟组合值升序排列后右端的次序统计量；失败定义为实际值严格大于 VaR。
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import xlogy
from scipy.stats import chi2

from ..core.errors import BacktestError
from ..core.models import KupiecResult, VaRSeries, WeightVector

# 可选的损失与 MAD 定义，报告中原样输出公式
LOSS_DEFINITIONS = {
    "mean_excess": "loss = mean over exceedance dates of (realized - VaR)",
    "lopez": "loss = mean over all dates of exceed * (1 + (realized - VaR)^2)",
}
MAD_DEFINITIONS = {
    "relative": "mad = mean(|VaR - realized|) / mean(|realized|)",
    "absolute": "mad = mean(|VaR - realized|)",
}
DEFAULT_LOSS = "mean_excess"
DEFAULT_MAD = "relative"


@dataclass
class LossMetrics:
    """损失指标；no_exceedances 为 True 时 loss 按 0 报告"""

    loss: float
    mad: float
    no_exceedances: bool = False
    formulas: dict[str, str] = field(default_factory=dict)

    def to_summary(self) -> dict[str, Any]:
        return {
            "loss": self.loss, "mad": self.mad, "no_exceedances": self.no_exceedances
        }


def portfolio_aggregate(draws: ArrayLike, weights: WeightVector) -> np.ndarray:
    """
    组合聚合 L = Σ w_i L_i

    Args:
        draws: (M, n) 模拟值，每列一个序列
        weights: 组合权重

    Returns:
        (M,) 组合值

    Raises:
        BacktestError: 维度不一致
    """
    x = np.asarray(draws, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(weights):
        raise BacktestError(
            f"draw panel of shape {x.shape} does not match {len(weights)} weights"
        )
    return x @ weights.weights


def var_quantile(draws: ArrayLike, alpha: float) -> float:
    """
    蒙特卡洛 VaR：升序排序后第 ⌈alpha·M⌉ 个（1 起）值

    Raises:
        BacktestError: 样本为空或 alpha 不在 (0, 1)
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size == 0:
        raise BacktestError("cannot compute VaR from an empty draw set")
    if not 0.0 < alpha < 1.0:
        raise BacktestError(f"alpha must lie in (0, 1), got {alpha}")
    # 消除 alpha·M 的浮点误差，如 0.95 * 1000
    rank = max(1, math.ceil(round(alpha * x.size, 9)))
    return float(np.partition(x, rank - 1)[rank - 1])


def kupiec(n_fail: int, n_obs: int, alpha: float) -> KupiecResult:
    """
    Kupiec 失败比例似然比检验

    期望失败概率 p = 1 - alpha，观测失败率 f = N/T：
    LR = -2[(T-N)·ln((1-p)/(1-f)) + N·ln(p/f)]，N = 0 或 N = T 的项按极限取 0。

    Args:
        n_fail: 失败次数 N
        n_obs: 回测长度 T
        alpha: 置信水平

    Returns:
        KupiecResult，p 值来自自由度 1 的卡方分布

    Raises:
        BacktestError: N > T、N < 0 或 T < 1
    """
    if n_obs < 1:
        raise BacktestError(f"backtest length must be positive, got {n_obs}")
    if not 0 <= n_fail <= n_obs:
        raise BacktestError(f"failure count {n_fail} outside [0, {n_obs}]")
    if not 0.0 < alpha < 1.0:
        raise BacktestError(f"alpha must lie in (0, 1), got {alpha}")

    p = 1.0 - alpha
    f = n_fail / n_obs
    n_ok = n_obs - n_fail
    log_alt = xlogy(n_ok, 1.0 - f) + xlogy(n_fail, f)
    log_null = xlogy(n_ok, 1.0 - p) + xlogy(n_fail, p)
    lr = max(0.0, float(2.0 * (log_alt - log_null)))
    return KupiecResult(
        N=int(n_fail),
        T=int(n_obs),
        alpha=float(alpha),
        LR=lr,
        p_value=float(chi2.sf(lr, 1)),
    )


def loss_metrics(
    series: VaRSeries, loss: str = DEFAULT_LOSS, mad: str = DEFAULT_MAD
) -> LossMetrics:
    """
    VaR 序列的损失与 MAD

    Args:
        series: VaR 序列
        loss: 损失定义，取 LOSS_DEFINITIONS 的键
        mad: MAD 定义，取 MAD_DEFINITIONS 的键

    Raises:
        BacktestError: 序列为空或定义未知
    """
    if len(series) == 0:
        raise BacktestError("cannot compute loss metrics of an empty series")
    if loss not in LOSS_DEFINITIONS:
        raise BacktestError(f"unknown loss definition '{loss}'")
    if mad not in MAD_DEFINITIONS:
        raise BacktestError(f"unknown MAD definition '{mad}'")

    gap = series.realized - series.var
    exceed = series.exceed
    no_exceedances = not exceed.any()
    if loss == "mean_excess":
        loss_value = 0.0 if no_exceedances else float(gap[exceed].mean())
    else:
        loss_value = float(np.mean(exceed * (1.0 + gap**2)))

    abs_gap = float(np.mean(np.abs(gap)))
    if mad == "relative":
        scale = float(np.mean(np.abs(series.realized)))
        mad_value = abs_gap / scale if scale > 0 else float("nan")
    else:
        mad_value = abs_gap

    return LossMetrics(
        loss=loss_value,
        mad=mad_value,
        no_exceedances=no_exceedances,
        formulas={"loss": LOSS_DEFINITIONS[loss], "mad": MAD_DEFINITIONS[mad]},
    )


def gdp_weights(
    gdp_totals: ArrayLike, names: Sequence[str] | None = None
) -> WeightVector:
    """
    按 GDP 占比计算组合权重 w_i = g_i / Σ g_j

    Raises:
        BacktestError: 存在非正值或为空
    """
    g = np.asarray(gdp_totals, dtype=float)
    if g.size == 0 or not np.all(np.isfinite(g)) or (g <= 0).any():
        raise BacktestError("GDP totals must be finite and strictly positive")
    w = g / g.sum()
    # 把舍入误差并入最大权重，保证和为 1
    w[np.argmax(w)] += 1.0 - w.sum()
    return WeightVector(w, list(names) if names is not None else [])
