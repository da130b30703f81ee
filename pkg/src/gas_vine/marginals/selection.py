"""
边缘模型阶数选择

在阶数网格上逐一拟合，保留标准化残差通过 Ljung-Box 与 ARCH-LM 检验的候选，
取 AIC 最小者；若没有候选通过检验，退回全体中 AIC 最小者并给出警告。
"""

from collections.abc import Iterable
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike

from ..core.errors import DiagnosticsError, MarginalFitError
from ..data.diagnostics import DEFAULT_LAGS, arch_lm_test, ljung_box
from ..utils.optimize import OptimizerConfig
from .arfima_garch import MarginalFit, MarginalOrder, fit_marginal
from .fracdiff import DEFAULT_TRUNCATION

SIGNIFICANCE = 0.05


def default_grid(
    max_p: int = 2,
    max_q: int = 2,
    garch_orders: Iterable[tuple[int, int]] = ((1, 0), (0, 1), (1, 1)),
    frac_d: bool = False,
) -> list[MarginalOrder]:
    """
    默认阶数网格: p, q ∈ {0..max_p} × {0..max_q}，GARCH 阶数取自 garch_orders

    frac_d 为 True 时每个 ARMA 阶数再加一个带分数差分的版本。
    """
    flags = (False, True) if frac_d else (False,)
    return [
        MarginalOrder(p=p, q=q, use_frac_d=f, a=a, b=b)
        for f, (a, b), p, q in product(
            flags, garch_orders, range(max_p + 1), range(max_q + 1)
        )
    ]


@dataclass
class CandidateResult:
    """网格中单个阶数的拟合结果"""

    order: MarginalOrder
    fit: MarginalFit | None
    lb_p: float = float("nan")
    arch_p: float = float("nan")
    error: str = ""

    @property
    def passes(self) -> bool:
        if self.fit is None:
            return False
        return self.lb_p > SIGNIFICANCE and self.arch_p > SIGNIFICANCE


@dataclass
class OrderSelection:
    """阶数选择结果"""

    fit: MarginalFit
    candidates: list[CandidateResult] = field(default_factory=list)
    diagnostics_passed: bool = True

    @property
    def order(self) -> MarginalOrder:
        return self.fit.order


def residual_diagnostics(z: ArrayLike, lags: int = DEFAULT_LAGS) -> tuple[float, float]:
    """
    标准化残差的 Ljung-Box 与 ARCH-LM p 值

    滞后阶数不超过 (n - 1) // 2；检验无法计算时 p 值记为 0（视为未通过）。
    """
    z = np.asarray(z, dtype=float)
    eff = max(1, min(lags, (len(z) - 1) // 2))
    try:
        _, lb_p = ljung_box(z, eff)
    except DiagnosticsError:
        lb_p = 0.0
    try:
        _, arch_p = arch_lm_test(z, eff)
    except DiagnosticsError:
        arch_p = 0.0
    return lb_p, arch_p


def select_marginal(
    series: ArrayLike,
    grid: Iterable[MarginalOrder] | None = None,
    optimizer: OptimizerConfig | None = None,
    truncation: int = DEFAULT_TRUNCATION,
    seed: int = 0,
    name: str = "",
    lags: int = DEFAULT_LAGS,
) -> OrderSelection:
    """
    在网格上拟合并选择边缘模型

    Returns:
        OrderSelection，包含选中的拟合与每个候选的诊断结果

    Raises:
        MarginalFitError: 网格为空或所有候选都拟合失败
    """
    orders = list(grid) if grid is not None else default_grid()
    if not orders:
        raise MarginalFitError("order grid is empty", series=name)

    candidates: list[CandidateResult] = []
    for order in orders:
        try:
            fit = fit_marginal(series, order, optimizer, truncation, seed, name)
        except MarginalFitError as e:
            logger.debug(f"{name} {order.label} 拟合失败: {e.message}")
            candidates.append(CandidateResult(order=order, fit=None, error=e.message))
            continue
        lb_p, arch_p = residual_diagnostics(fit.z, lags)
        fit.diagnostics = {"ljung_box_p": lb_p, "arch_lm_p": arch_p}
        candidates.append(
            CandidateResult(order=order, fit=fit, lb_p=lb_p, arch_p=arch_p)
        )
        logger.debug(
            f"{name} {order.label}: AIC={fit.aic:.4f} LB p={lb_p:.4f} ARCH "
            f"p={arch_p:.4f}"
        )

    fitted = [c for c in candidates if c.fit is not None]
    if not fitted:
        causes = "; ".join(f"{c.order.label}: {c.error}" for c in candidates)
        raise MarginalFitError(
            f"no order in the grid converged for series '{name}': {causes}", series=name
        )

    passing = [c for c in fitted if c.passes]
    pool = passing or fitted
    if not passing:
        logger.warning(
            f"序列 {name or '<unnamed>'} 没有候选阶数通过 Ljung-Box/ARCH-LM 检验，"
            "按 AIC 最小选择"
        )
    # 稳定排序，AIC 相同时保留网格中的先后顺序
    best = min(pool, key=lambda c: c.fit.aic)
    return OrderSelection(
        fit=best.fit, candidates=candidates, diagnostics_passed=bool(passing)
    )


def select_order(
    series: ArrayLike,
    grid: Iterable[MarginalOrder] | None = None,
    optimizer: OptimizerConfig | None = None,
    truncation: int = DEFAULT_TRUNCATION,
    seed: int = 0,
    name: str = "",
) -> MarginalOrder:
    """
    按 AIC 与残差诊断选择边缘模型阶数

    Args:
        series: 指标序列
        grid: 候选阶数，默认 default_grid()

    Returns:
        选中的 MarginalOrder
    """
    return select_marginal(series, grid, optimizer, truncation, seed, name).order
