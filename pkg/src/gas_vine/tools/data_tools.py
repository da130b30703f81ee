"""
数据工具

合成数据生成、面板读取与描述统计。
"""

from pathlib import Path
from typing import Any

import pandas as pd

from ..core.config import RunConfig
from ..core.errors import ConfigError, GasVineError
from ..core.models import IndicatorPanel
from ..data import ColumnSchema, compute_indicator, describe, load_panel
from ..data.synth import generate, write_dataset


def load_indicators(config: RunConfig) -> IndicatorPanel:
    """
    按配置读取面板并计算指标

    Raises:
        ConfigError: 未指定输入文件
        IngestError: 读取或变换失败
    """
    if not config.input:
        raise ConfigError(
            "no input file given (use --input or 'input = ...')", key="input"
        )
    if config.columns:
        schema = ColumnSchema.from_names(config.columns, config.date_column)
    else:
        schema = ColumnSchema(date_column=config.date_column)
    return compute_indicator(load_panel(config.input, schema))


def run_synth(out: Path | str, seed: int = 0) -> dict[str, Any]:
    """
    生成并写出合成数据集

    Args:
        out: 输出目录
        seed: 随机种子

    Returns:
        包含面板路径与 GDP 文件路径的字典
    """
    try:
        dataset = generate(seed=seed)
        panel_path, gdp_path = write_dataset(dataset, out)
        return {
            "success": True,
            "panel": str(panel_path),
            "gdp": str(gdp_path),
            "n_series": len(dataset.panel.names),
            "length": len(dataset.panel),
        }
    except GasVineError as e:
        return {"success": False, "message": e.message}


def run_stats(config: RunConfig) -> dict[str, Any]:
    """
    计算每个指标序列的描述统计并写出 stats.csv

    Returns:
        包含逐序列统计行与文件路径的字典
    """
    try:
        data = load_indicators(config)
        rows = []
        for name in data.names:
            stats = describe(data.series[name], config.lags)
            rows.append({"series": name, **stats.to_summary()})

        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "stats.csv"
        pd.DataFrame(rows).to_csv(path, index=False, float_format="%.17g")
        return {"success": True, "rows": rows, "path": str(path), "length": len(data)}
    except GasVineError as e:
        return {"success": False, "message": e.message}
    except OSError as e:
        return {"success": False, "message": f"cannot write stats: {e}"}
