"""
概率积分变换及其逆过程

pit 把标准化残差映射为 (0,1) 上的伪观测值；inverse_pit 把模拟的均匀数
映回残差；reconstruct_returns 沿 ARFIMA-GARCH 递推把残差还原为指标值。
"""

from typing import Literal

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike
from scipy.stats import rankdata

from ..core.errors import MarginalFitError
from ..utils.numeric import clamp_unit
from . import skew_t
from .arfima_garch import MarginalFit, run_filter
from .fracdiff import frac_weights

PitMode = Literal["empirical", "parametric"]


def pit(fit: MarginalFit, mode: PitMode = "empirical") -> np.ndarray:
    """
    标准化残差的概率积分变换

    Args:
        fit: 边缘模型结果
        mode: empirical 使用秩 rank/(n+1)，parametric 使用偏斜 t 分布函数

    Returns:
        截断到 [1e-10, 1 - 1e-10] 的伪观测值
    """
    z = np.asarray(fit.z, dtype=float)
    if mode == "empirical":
        u = rankdata(z, method="average") / (len(z) + 1.0)
    elif mode == "parametric":
        u = skew_t.cdf(z, fit.nu, fit.xi_skew)
    else:
        raise MarginalFitError(f"unknown PIT mode '{mode}'", mode=mode)
    return clamp_unit(u)


def inverse_pit(
    u: ArrayLike, fit: MarginalFit, mode: PitMode = "empirical", warn: bool = True
) -> np.ndarray:
    """
    伪观测值还原为标准化残差

    empirical 模式在 (k/(n+1), z_(k)) 节点间线性插值，超出节点范围的值
    截断到最小/最大残差；warn 为 True 时给出警告。
    """
    u = np.asarray(u, dtype=float)
    if mode == "parametric":
        return skew_t.ppf(u, fit.nu, fit.xi_skew)
    if mode != "empirical":
        raise MarginalFitError(f"unknown PIT mode '{mode}'", mode=mode)

    z_sorted = np.sort(np.asarray(fit.z, dtype=float))
    n = len(z_sorted)
    grid = np.arange(1, n + 1) / (n + 1.0)
    outside = int(np.count_nonzero((u < grid[0]) | (u > grid[-1])))
    if outside and warn:
        logger.warning(f"{outside} 个伪观测值超出经验分位数范围，已截断到极端残差")
    return np.interp(u, grid, z_sorted)


def required_history(fit: MarginalFit) -> int:
    """还原所需的最短历史长度"""
    o = fit.order
    return max(o.p, o.q, o.a, o.b, 1) + 1


def reconstruct_returns(
    fit: MarginalFit, simulated_z: ArrayLike, history: ArrayLike
) -> np.ndarray:
    """
    把模拟的标准化残差还原为指标值

    从历史序列递推得到 σ²_{T+1}，令 ε = σ z，再反解 ARMA 与分数差分的
    均值方程。simulated_z 为一维时视为 M 个一步情景；为二维 (M, H) 时
    每行是一条 H 步路径，σ² 与均值方程沿路径逐步推进。

    Args:
        fit: 边缘模型结果
        simulated_z: 模拟残差，形状 (M,) 或 (M, H)
        history: 截至 T 的指标序列

    Returns:
        与 simulated_z 同形状的指标值

    Raises:
        MarginalFitError: 历史长度不足
    """
    z = np.asarray(simulated_z, dtype=float)
    one_step = z.ndim == 1
    paths = z[:, None] if one_step else z
    x_hist = np.asarray(history, dtype=float)
    need = required_history(fit)
    if len(x_hist) < need:
        raise MarginalFitError(
            f"history of {len(x_hist)} points is shorter than the required {need}",
            series=fit.name,
        )

    state = run_filter(fit, x_hist)
    m, horizon = paths.shape
    p, q, a, b = fit.order.p, fit.order.q, fit.order.a, fit.order.b

    # 各递推量的滞后窗口，最近的值在最后一列
    def window(values: np.ndarray, size: int) -> np.ndarray:
        tail = values[len(values) - size :] if size else values[:0]
        return np.tile(tail, (m, 1))

    w_lags = window(state.w, p)
    eps_lags = window(state.eps, max(q, a))
    s2_lags = window(state.sigma2, b)

    frac = fit.d != 0.0
    if frac:
        t_hist = len(x_hist)
        k_max = min(t_hist + horizon - 1, fit.truncation)
        pi = frac_weights(fit.d, k_max)
        y_hist = state.y
    y_sim = np.zeros((m, horizon))
    out = np.empty((m, horizon))

    for h in range(horizon):
        sigma2 = np.full(m, fit.omega)
        for i in range(1, a + 1):
            sigma2 += fit.alpha[i - 1] * eps_lags[:, -i] ** 2
        for j in range(1, b + 1):
            sigma2 += fit.beta[j - 1] * s2_lags[:, -j]
        sigma2 = np.maximum(sigma2, 1e-12)
        eps = np.sqrt(sigma2) * paths[:, h]

        w = eps.copy()
        for i in range(1, p + 1):
            w += fit.phi[i - 1] * w_lags[:, -i]
        for j in range(1, q + 1):
            w += fit.theta[j - 1] * eps_lags[:, -j]

        if frac:
            # y_{T+h} = w_{T+h} - Σ_{k≥1} π_k y_{T+h-k}
            t_now = t_hist + h
            k_lim = min(t_now, k_max)
            total = np.zeros(m)
            if h > 0:
                ks = np.arange(1, min(h, k_lim) + 1)
                total += y_sim[:, h - ks] @ pi[ks]
            if k_lim > h:
                ks = np.arange(h + 1, k_lim + 1)
                total += float(pi[ks] @ y_hist[t_hist + h - ks])
            y = w - total
        else:
            y = w
        y_sim[:, h] = y
        out[:, h] = fit.mu + y

        if p:
            w_lags = np.column_stack((w_lags[:, 1:], w))
        if eps_lags.shape[1]:
            eps_lags = np.column_stack((eps_lags[:, 1:], eps))
        if b:
            s2_lags = np.column_stack((s2_lags[:, 1:], sigma2))

    return out[:, 0] if one_step else out


def next_sigma(fit: MarginalFit, history: ArrayLike) -> float:
    """历史序列之后一步的条件标准差 σ_{T+1}"""
    sim = reconstruct_returns(fit, np.ones(1), history)
    zero = reconstruct_returns(fit, np.zeros(1), history)
    return float(sim[0] - zero[0])
