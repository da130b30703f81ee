"""
风险度量：组合聚合、蒙特卡洛 VaR、Kupiec 回测与报告
"""

from .backtest import (
    DEFAULT_ALPHAS,
    DEFAULT_SIMS,
    DEFAULT_WINDOW,
    BacktestReport,
    run_backtest,
    summarize,
    uniform_panel,
)
from .report import emit_report, read_var_csv
from .var import (
    LOSS_DEFINITIONS,
    MAD_DEFINITIONS,
    LossMetrics,
    gdp_weights,
    kupiec,
    loss_metrics,
    portfolio_aggregate,
    var_quantile,
)

__all__ = [
    "DEFAULT_ALPHAS",
    "DEFAULT_SIMS",
    "DEFAULT_WINDOW",
    "LOSS_DEFINITIONS",
    "MAD_DEFINITIONS",
    "BacktestReport",
    "LossMetrics",
    "emit_report",
    "gdp_weights",
    "kupiec",
    "loss_metrics",
    "portfolio_aggregate",
    "read_var_csv",
    "run_backtest",
    "summarize",
    "uniform_panel",
    "var_quantile",
]
