"""
边缘模型：ARFIMA-GARCH-sstd 拟合、阶数选择与概率积分变换
"""

from .arfima_garch import MarginalFit, MarginalOrder, fit_marginal, run_filter
from .fracdiff import frac_diff, frac_weights
from .selection import OrderSelection, default_grid, select_marginal, select_order
from .transforms import (
    inverse_pit,
    next_sigma,
    pit,
    reconstruct_returns,
    required_history,
)

__all__ = [
    "MarginalFit",
    "MarginalOrder",
    "OrderSelection",
    "default_grid",
    "fit_marginal",
    "frac_diff",
    "frac_weights",
    "inverse_pit",
    "next_sigma",
    "pit",
    "reconstruct_returns",
    "required_history",
    "run_filter",
    "select_marginal",
    "select_order",
]
