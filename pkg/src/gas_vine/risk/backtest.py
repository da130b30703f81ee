"""
滚动 VaR 回测

对回测窗口内的每个日期 t：时变参数只使用 t-1 及之前的数据，按 t 的参数
抽取联合伪观测，经逆 PIT 与 ARFIMA-GARCH 递推还原为各序列的指标值，
聚合成组合后取各置信水平的 VaR，并与实际组合值比较。
"""

from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from loguru import logger

from ..core.errors import BacktestError, GasVineError
from ..core.models import (
    IndicatorPanel,
    KupiecResult,
    UniformPanel,
    VaRSeries,
    WeightVector,
)
from ..marginals import (
    MarginalFit,
    inverse_pit,
    pit,
    reconstruct_returns,
    required_history,
)
from ..utils.optimize import OptimizerConfig
from ..utils.rng import derive_seed
from ..vine import FittedTVVine, filter_paths, fit_sequential, simulate
from .var import (
    DEFAULT_LOSS,
    DEFAULT_MAD,
    LossMetrics,
    kupiec,
    loss_metrics,
    portfolio_aggregate,
    var_quantile,
)

DEFAULT_ALPHAS = (0.90, 0.95, 0.99, 0.995)
DEFAULT_WINDOW = 400
DEFAULT_SIMS = 1000

# 巴塞尔框架建议的最短回测窗口
MIN_BASEL_WINDOW = 250
MIN_SIMS = 100


@dataclass
class BacktestReport:
    """回测汇总：每个置信水平的 VaR 序列、Kupiec 检验与损失指标"""

    series: list[VaRSeries]
    kupiec: list[KupiecResult]
    metrics: list[LossMetrics]
    weights: WeightVector
    settings: dict[str, Any] = field(default_factory=dict)

    @property
    def alphas(self) -> list[float]:
        return [s.alpha for s in self.series]

    def realized_summary(self) -> dict[str, float]:
        """实际组合值的最小、最大与均值"""
        if not self.series:
            return {}
        realized = self.series[0].realized
        return {
            "min": float(realized.min()),
            "max": float(realized.max()),
            "mean": float(realized.mean()),
        }

    def summary_rows(self) -> list[dict[str, Any]]:
        """按 alpha, fail_times, fail_rate, p_value, LR, loss, mad 排列的汇总表"""
        rows = []
        for result, metrics in zip(self.kupiec, self.metrics):
            row = result.to_summary()
            row["loss"] = metrics.loss
            row["mad"] = metrics.mad
            rows.append(row)
        return rows


@dataclass(frozen=True)
class _DateJob:
    fitted: FittedTVVine
    marginals: tuple[MarginalFit, ...]
    x: np.ndarray
    dates: tuple[str, ...]
    t_indices: tuple[int, ...]
    n_sims: int
    alphas: tuple[float, ...]
    weights: WeightVector
    seed: int


def _forecast(job: _DateJob, t: int) -> tuple[list[float], int]:
    """单个日期的各置信水平 VaR，以及被截断到经验分位数范围外的抽样数"""
    fitted = job.fitted
    u = simulate(fitted, t, job.n_sims, derive_seed(job.seed, t))
    draws = np.empty((job.n_sims, fitted.n))
    clamped = 0
    for i, fit in enumerate(job.marginals):
        column = u.column(i)
        if fitted.pit_mode == "empirical":
            m = fit.n_obs
            clamped += int(
                np.count_nonzero((column < 1 / (m + 1)) | (column > m / (m + 1)))
            )
        z = inverse_pit(column, fit, fitted.pit_mode, warn=False)
        draws[:, i] = reconstruct_returns(fit, z, job.x[:t, i])
    portfolio = portfolio_aggregate(draws, job.weights)
    return [var_quantile(portfolio, a) for a in job.alphas], clamped


def _run_dates(job: _DateJob) -> list[tuple[list[float], int]]:
    out = []
    for date, t in zip(job.dates, job.t_indices):
        try:
            out.append(_forecast(job, t))
        except GasVineError as e:
            raise BacktestError(
                f"backtest failed on {date}: {e.message}", date=date
            ) from e
    return out


def _split(job: _DateJob, parts: int) -> list[_DateJob]:
    chunks = np.array_split(np.arange(len(job.t_indices)), parts)
    return [
        _DateJob(
            job.fitted,
            job.marginals,
            job.x,
            tuple(job.dates[k] for k in chunk),
            tuple(job.t_indices[k] for k in chunk),
            job.n_sims,
            job.alphas,
            job.weights,
            job.seed,
        )
        for chunk in chunks
        if len(chunk)
    ]


def _run_segment(job: _DateJob, threads: int) -> list[tuple[list[float], int]]:
    if threads <= 1 or len(job.t_indices) <= 1:
        return _run_dates(job)
    chunks = _split(job, threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(_run_dates, chunks))
    return [item for chunk in results for item in chunk]


def uniform_panel(
    marginals: Sequence[MarginalFit], names: Sequence[str], mode: str
) -> UniformPanel:
    """由各序列的边缘模型得到伪观测面板"""
    data = np.column_stack([pit(fit, mode) for fit in marginals])
    return UniformPanel(data, list(names), mode)


def _check_inputs(
    fitted: FittedTVVine,
    marginals: Sequence[MarginalFit],
    data: IndicatorPanel,
    window: int,
) -> None:
    if list(fitted.names) != data.names:
        raise BacktestError(
            f"vine series {fitted.names} do not match data series {data.names}"
        )
    if len(marginals) != len(data.names):
        raise BacktestError(
            f"{len(marginals)} marginal fits for {len(data.names)} series"
        )
    for name, fit in zip(data.names, marginals):
        if fit.n_obs != len(data):
            raise BacktestError(
                f"marginal fit of '{name}' covers {fit.n_obs} points, data has "
                f"{len(data)}",
                series=name,
            )
    need = max(required_history(fit) for fit in marginals)
    if window < 1:
        raise BacktestError(f"window must be positive, got {window}")
    if window > len(data) - need:
        raise BacktestError(
            f"window {window} leaves less than {need} points of history in {len(data)} "
            "dates"
        )


def _has_paths(fitted: FittedTVVine, n_obs: int) -> bool:
    return fitted.n_obs == n_obs and all(
        e.dynamics is not None and e.dynamics.path is not None for e in fitted.edges
    )


def _refit(
    fitted: FittedTVVine,
    u_panel: UniformPanel,
    end: int,
    optimizer: OptimizerConfig | None,
    threads: int,
) -> FittedTVVine:
    """用 end 之前的伪观测重新估计 Vine，再在整段面板上滤波"""
    coef = fitted.edges[0].dynamics.coef
    refitted = fit_sequential(
        u_panel.head(end),
        mode=fitted.mode,
        families=fitted.families,
        driver=fitted.driver,
        criterion=fitted.criterion,
        optimizer=optimizer,
        gamma=getattr(coef, "gamma", 0.0),
        patton_q=getattr(coef, "q", 10),
        threads=threads,
    )
    return filter_paths(refitted, u_panel)


def run_backtest(
    fitted: FittedTVVine,
    marginals: Sequence[MarginalFit],
    data: IndicatorPanel,
    window: int = DEFAULT_WINDOW,
    n_sims: int = DEFAULT_SIMS,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    weights: WeightVector | None = None,
    seed: int = 0,
    refit_every: int = 0,
    optimizer: OptimizerConfig | None = None,
    threads: int = 1,
) -> list[VaRSeries]:
    """
    对数据最后 window 个日期做一步向前的 VaR 回测

    边缘模型使用全样本估计；refit_every 为 0 时 Vine 使用全样本估计并在整段
    伪观测上滤波（若 fitted 尚无对应路径会原地滤波），大于 0 时每隔
    refit_every 个日期用 t 之前的伪观测重新估计 Vine。每个日期的随机数来自
    derive_seed(seed, t)，结果与线程数无关。

    Args:
        fitted: 全样本估计的 Vine
        marginals: 与 data.names 顺序一致的边缘模型
        data: 指标面板
        window: 回测日期数
        n_sims: 每个日期的模拟次数
        alphas: 置信水平
        weights: 组合权重，默认等权
        seed: 主随机种子
        refit_every: Vine 重估间隔，0 表示不重估
        optimizer: 重估使用的优化器设置
        threads: 并行进程数

    Returns:
        每个置信水平一个 VaRSeries

    Raises:
        BacktestError: 输入不一致或某个日期模拟失败（错误信息包含日期）
    """
    _check_inputs(fitted, marginals, data, window)
    if n_sims < 1:
        raise BacktestError(f"n_sims must be positive, got {n_sims}")
    if window < MIN_BASEL_WINDOW:
        logger.warning(f"回测窗口 {window} < {MIN_BASEL_WINDOW}，Kupiec 检验功效有限")
    if n_sims < MIN_SIMS:
        logger.warning(f"每期模拟次数 {n_sims} < {MIN_SIMS}，VaR 分位数不稳定")
    weights = weights or WeightVector.equal(data.names)
    if len(weights) != len(data.names):
        raise BacktestError(f"{len(weights)} weights for {len(data.names)} series")
    alphas = tuple(float(a) for a in alphas)

    x = data.matrix()
    n_total = len(data)
    t_indices = list(range(n_total - window, n_total))
    dates = [str(d.date()) for d in data.dates]
    u_panel = uniform_panel(marginals, data.names, fitted.pit_mode)

    if refit_every > 0:
        starts = t_indices[::refit_every]
    else:
        starts = [t_indices[0]]
        if not _has_paths(fitted, n_total):
            filter_paths(fitted, u_panel)

    results: list[tuple[list[float], int]] = []
    for k, start in enumerate(starts):
        stop = starts[k + 1] if k + 1 < len(starts) else n_total
        vine = fitted
        if refit_every > 0:
            vine = _refit(fitted, u_panel, start, optimizer, threads)
        segment = list(range(start, stop))
        logger.info(
            f"回测 {dates[start]} .. {dates[stop - 1]}，共 {len(segment)} 个日期"
        )
        job = _DateJob(
            vine,
            tuple(marginals),
            x,
            tuple(dates[t] for t in segment),
            tuple(segment),
            n_sims,
            alphas,
            weights,
            seed,
        )
        results.extend(_run_segment(job, threads))

    clamped = sum(c for _, c in results)
    if clamped:
        logger.warning(f"{clamped} 个模拟伪观测值超出经验分位数范围，已截断到极端残差")

    var_matrix = np.array([v for v, _ in results]).reshape(len(t_indices), len(alphas))
    realized = x[t_indices] @ weights.weights
    return [
        VaRSeries(
            alpha=a,
            dates=data.dates[t_indices],
            var=var_matrix[:, k],
            realized=realized,
        )
        for k, a in enumerate(alphas)
    ]


def summarize(
    series: Sequence[VaRSeries],
    weights: WeightVector,
    loss: str = DEFAULT_LOSS,
    mad: str = DEFAULT_MAD,
    settings: dict[str, Any] | None = None,
) -> BacktestReport:
    """对每个 VaR 序列计算 Kupiec 检验与损失指标"""
    results = [kupiec(s.n_exceed, len(s), s.alpha) for s in series]
    metrics = [loss_metrics(s, loss, mad) for s in series]
    for s, m in zip(series, metrics):
        if m.no_exceedances:
            logger.info(f"alpha={s.alpha}: 回测窗口内没有失败，loss 记为 0")
    return BacktestReport(
        series=list(series),
        kupiec=results,
        metrics=metrics,
        weights=weights,
        settings=dict(settings or {}),
    )
