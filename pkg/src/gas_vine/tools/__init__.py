"""流水线工具：每个函数返回带 success 字段的字典"""

from .data_tools import load_indicators, run_stats, run_synth
from .model_tools import fit_marginals, run_compare, run_filter, run_fit, run_simulate
from .risk_tools import run_backtest_report

__all__ = [
    "fit_marginals",
    "load_indicators",
    "run_backtest_report",
    "run_compare",
    "run_filter",
    "run_fit",
    "run_simulate",
    "run_stats",
    "run_synth",
]
