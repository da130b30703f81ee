"""
面板数据读取与变换

读取 CSV 面板（首列为 ISO-8601 日期，其余为数值列），按公共日期对齐，
并计算对数差分风险指标。
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from ..core.errors import IngestError
from ..core.models import IndicatorPanel, RawPanel


@dataclass
class ColumnSchema:
    """
    列映射

    date_column 为空时使用第一列；columns 为空时读取全部数值列，
    否则按 {源列名: 序列名} 读取并重命名。
    """

    date_column: str | None = None
    columns: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_names(
        cls, names: Sequence[str], date_column: str | None = None
    ) -> "ColumnSchema":
        return cls(date_column=date_column, columns={name: name for name in names})


def load_panel(path: Path | str, schema: ColumnSchema | None = None) -> RawPanel:
    """
    读取 CSV 面板

    Args:
        path: CSV 文件路径，必须含表头
        schema: 列映射，默认读取全部列

    Returns:
        RawPanel，按日期升序排列

    Raises:
        IngestError: 文件不存在、单元格无法解析（包含行号与列名）、日期重复
    """
    schema = schema or ColumnSchema()
    path = Path(path)
    if not path.exists():
        raise IngestError(f"input file not found: {path}", path=str(path))

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise IngestError(f"input file is empty: {path}", path=str(path)) from None

    if frame.shape[1] < 2 or frame.shape[0] == 0:
        raise IngestError(
            "input file needs a header, a date column and at least one value column: "
            f"{path}",
            path=str(path),
        )

    date_column = schema.date_column or frame.columns[0]
    if date_column not in frame.columns:
        raise IngestError(f"date column '{date_column}' not found", column=date_column)

    if schema.columns:
        missing = [c for c in schema.columns if c not in frame.columns]
        if missing:
            raise IngestError(
                f"columns not found in {path.name}: {missing}", column=missing[0]
            )
        mapping = dict(schema.columns)
    else:
        mapping = {c: c for c in frame.columns if c != date_column}

    dates = _parse_dates(frame[date_column], date_column)
    series = {
        target: _parse_numeric(frame[source], source)
        for source, target in mapping.items()
    }

    duplicated = dates.duplicated()
    if duplicated.any():
        first = int(np.flatnonzero(duplicated)[0])
        raise IngestError(
            f"duplicate date {dates[first].date()} at row {first + 1}",
            row=first + 1,
            date=str(dates[first].date()),
        )

    order = np.argsort(dates.values, kind="stable")
    if (order != np.arange(len(order))).any():
        logger.debug(f"{path.name}: 日期未按升序排列，已重新排序")

    return RawPanel(
        dates=dates[order],
        series={name: values[order] for name, values in series.items()},
    )


def _parse_dates(column: pd.Series, name: str) -> pd.DatetimeIndex:
    """逐行解析日期，失败时报告行号"""
    parsed = pd.to_datetime(column.str.strip(), format="ISO8601", errors="coerce")
    bad = parsed.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise IngestError(
            f"unparseable date '{column.iloc[row]}' at row {row + 1}, column '{name}'",
            row=row + 1,
            column=name,
        )
    return pd.DatetimeIndex(parsed).normalize()


def _parse_numeric(column: pd.Series, name: str) -> np.ndarray:
    """逐行解析数值（小数点固定为 '.'），失败时报告行号"""
    parsed = pd.to_numeric(column.str.strip(), errors="coerce")
    bad = parsed.isna().to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise IngestError(
            f"unparseable value '{column.iloc[row]}' at row {row + 1}, column '{name}'",
            row=row + 1,
            column=name,
        )
    return parsed.to_numpy(dtype=float)


def align_common_dates(panels: Sequence[RawPanel]) -> RawPanel:
    """
    将多个面板限制在公共日期上合并

    Args:
        panels: 至少两个面板

    Returns:
        合并后的面板，日期为各面板日期的交集

    Raises:
        IngestError: 面板不足两个、交集少于两个日期、序列名重复
    """
    if len(panels) < 2:
        raise IngestError("align_common_dates needs at least 2 panels")

    common = reduce(
        lambda acc, p: acc.intersection(p.dates), panels[1:], panels[0].dates
    )
    common = common.sort_values()
    if len(common) == 0:
        raise IngestError("panels share no common dates")
    if len(common) < 2:
        raise IngestError(f"panels share only {len(common)} common date")

    series: dict[str, np.ndarray] = {}
    for panel in panels:
        positions = panel.dates.get_indexer(common)
        for name, values in panel.series.items():
            if name in series:
                raise IngestError(
                    f"series name '{name}' appears in more than one panel", series=name
                )
            series[name] = values[positions]

    dropped = max(len(p) for p in panels) - len(common)
    if dropped:
        logger.info(f"按公共日期对齐: 保留 {len(common)} 个日期，剔除 {dropped} 个")
    return RawPanel(dates=common, series=series)


def compute_indicator(panel: RawPanel) -> IndicatorPanel:
    """
    计算对数差分指标 Lr_t = ln L_t - ln L_{t-1}

    Raises:
        IngestError: 存在非正值（报告日期与序列名）
    """
    series: dict[str, np.ndarray] = {}
    for name, values in panel.series.items():
        bad = values <= 0
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise IngestError(
                f"non-positive value {values[i]!r} in series '{name}' "
                f"on {panel.dates[i].date()}",
                series=name,
                date=str(panel.dates[i].date()),
            )
        series[name] = np.diff(np.log(values))
    return IndicatorPanel(dates=panel.dates[1:], series=series)
