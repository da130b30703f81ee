"""
多起点 Nelder-Mead 极大似然优化

边缘模型与二元 Copula 估计共用的优化器：无导数单纯形法，多个起点，
可选的拟牛顿数值梯度精修。
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from scipy.optimize import minimize

# 目标函数无法计算时返回的惩罚值
PENALTY = 1e10


@dataclass
class OptimizerConfig:
    """优化器设置"""

    max_iter: int = 600
    restarts: int = 3
    tol: float = 1e-7
    polish: bool = False


@dataclass
class OptimizeOutcome:
    """
    单次多起点优化的结果

    converged 只反映选中起点自身是否收敛；n_success 为收敛的起点数。
    """

    x: np.ndarray
    fun: float
    converged: bool
    n_success: int
    failures: list[str] = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.fun) and self.fun < PENALTY)


def safe_objective(
    func: Callable[[np.ndarray], float]
) -> Callable[[np.ndarray], float]:
    """包装目标函数：数值异常或非有限值一律返回惩罚值"""

    def wrapped(x: np.ndarray) -> float:
        try:
            with np.errstate(all="ignore"):
                value = float(func(x))
        except (ArithmeticError, ValueError):
            return PENALTY
        if not np.isfinite(value):
            return PENALTY
        return value

    return wrapped


def minimize_with_restarts(
    objective: Callable[[np.ndarray], float],
    starts: Sequence[np.ndarray],
    config: OptimizerConfig,
    accept: Callable[[np.ndarray], str | None] | None = None,
) -> OptimizeOutcome:
    """
    从多个起点运行 Nelder-Mead，返回目标值最小的可接受结果

    Args:
        objective: 待最小化的目标函数（负对数似然）
        starts: 起点列表，使用前 config.restarts 个
        config: 优化器设置
        accept: 可选的结果检查函数，返回 None 表示接受，否则返回拒绝原因

    Returns:
        OptimizeOutcome；若所有起点都失败，fun 为 inf
    """
    func = safe_objective(objective)
    best: OptimizeOutcome | None = None
    failures: list[str] = []
    n_success = 0

    for i, x0 in enumerate(list(starts)[: max(1, config.restarts)]):
        x0 = np.asarray(x0, dtype=float)
        res = minimize(
            func,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": config.max_iter,
                "xatol": config.tol,
                "fatol": config.tol,
                "adaptive": x0.size > 5,
            },
        )
        x, fun, ok = np.asarray(res.x, dtype=float), float(res.fun), bool(res.success)

        if config.polish and fun < PENALTY:
            polished = minimize(func, x, method="L-BFGS-B")
            if polished.fun < fun:
                x, fun = np.asarray(polished.x, dtype=float), float(polished.fun)

        if fun >= PENALTY:
            failures.append(f"start {i}: objective not finite")
            continue
        if accept is not None:
            reason = accept(x)
            if reason is not None:
                failures.append(f"start {i}: {reason}")
                continue
        if not ok:
            failures.append(f"start {i}: {res.message}")
        n_success += int(ok)
        if best is None or fun < best.fun:
            best = OptimizeOutcome(x=x, fun=fun, converged=ok, n_success=0)

    if best is None:
        return OptimizeOutcome(
            x=np.asarray(starts[0], dtype=float),
            fun=float("inf"),
            converged=False,
            n_success=0,
            failures=failures,
        )

    best.n_success = n_success
    best.failures = failures
    if not best.converged:
        logger.debug(f"优化未在 {config.max_iter} 次迭代内收敛，使用最优可行点")
    return best
