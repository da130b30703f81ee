"""数据读取、诊断与合成数据模块"""

from .diagnostics import arch_lm_test, describe, ljung_box
from .ingest import ColumnSchema, align_common_dates, compute_indicator, load_panel

__all__ = [
    "ColumnSchema",
    "align_common_dates",
    "arch_lm_test",
    "compute_indicator",
    "describe",
    "ljung_box",
    "load_panel",
]
