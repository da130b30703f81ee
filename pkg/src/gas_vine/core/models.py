"""
数据模型定义

面板数据、伪观测值、组合权重与回测结果等跨模块共享的数据结构。
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from .errors import GasVineError, IngestError


@dataclass
class RawPanel:
    """
    按日期对齐的原始多元序列

    所有序列共享 dates 轴，对齐后无缺失值。
    """

    dates: pd.DatetimeIndex
    series: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        self.dates = pd.DatetimeIndex(self.dates)
        self.series = {
            name: np.asarray(v, dtype=float) for name, v in self.series.items()
        }
        if len(self.dates) < 2:
            raise IngestError("panel needs at least 2 dates", length=len(self.dates))
        for name, values in self.series.items():
            if len(values) != len(self.dates):
                raise IngestError(
                    f"series '{name}' has {len(values)} values for {len(self.dates)} "
                    "dates",
                    series=name,
                )
            if np.isnan(values).any():
                raise IngestError(
                    f"series '{name}' contains missing values", series=name
                )

    @property
    def names(self) -> list[str]:
        return list(self.series)

    def __len__(self) -> int:
        return len(self.dates)

    def to_frame(self) -> pd.DataFrame:
        """转换为以日期为索引的 DataFrame"""
        return pd.DataFrame(self.series, index=self.dates)


@dataclass
class IndicatorPanel:
    """
    风险指标面板 Lr_t = ln L_t - ln L_{t-1}

    长度比原始面板少 1，所有值有限。
    """

    dates: pd.DatetimeIndex
    series: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        self.dates = pd.DatetimeIndex(self.dates)
        self.series = {
            name: np.asarray(v, dtype=float) for name, v in self.series.items()
        }
        for name, values in self.series.items():
            if len(values) != len(self.dates):
                raise IngestError(f"series '{name}' length mismatch", series=name)
            if not np.isfinite(values).all():
                raise IngestError(f"series '{name}' has non-finite values", series=name)

    @property
    def names(self) -> list[str]:
        return list(self.series)

    def __len__(self) -> int:
        return len(self.dates)

    def matrix(self) -> np.ndarray:
        """T x n 矩阵，列顺序与 names 一致"""
        return np.column_stack([self.series[name] for name in self.names])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.series, index=self.dates)


@dataclass
class DescriptiveStats:
    """单个序列的描述统计（峰度为 Pearson 非超额峰度）"""

    mean: float
    sd: float
    skewness: float
    kurtosis: float
    ljung_box_p: float
    arch_lm_p: float
    lags: int = 10

    def to_summary(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "sd": self.sd,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "ljung_box_p": self.ljung_box_p,
            "arch_lm_p": self.arch_lm_p,
        }


@dataclass
class UniformPanel:
    """
    (0,1) 上的伪观测值矩阵

    每列对应一个序列；mode 标记由经验秩还是参数分布变换得到。
    """

    data: np.ndarray
    names: list[str]
    mode: str = "empirical"

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] != len(self.names):
            raise GasVineError(
                f"uniform panel shape {self.data.shape} does not match "
                f"{len(self.names)} names"
            )
        if not ((self.data > 0.0) & (self.data < 1.0)).all():
            raise GasVineError("uniform panel values must lie strictly inside (0, 1)")
        if self.mode not in ("empirical", "parametric"):
            raise GasVineError(f"unknown PIT mode: {self.mode}")

    @property
    def n_vars(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, index: int) -> np.ndarray:
        return self.data[:, index]

    def head(self, length: int) -> "UniformPanel":
        """前 length 行（用于滚动重估）"""
        return UniformPanel(self.data[:length], list(self.names), self.mode)


@dataclass
class WeightVector:
    """组合权重，非负且和为 1"""

    weights: np.ndarray
    names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        if (self.weights < 0).any():
            raise GasVineError("weights must be non-negative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise GasVineError(f"weights sum to {self.weights.sum()!r}, expected 1")

    @classmethod
    def equal(cls, names: list[str]) -> "WeightVector":
        n = len(names)
        return cls(np.full(n, 1.0 / n), list(names))

    def __len__(self) -> int:
        return len(self.weights)


@dataclass
class VaRSeries:
    """
    单一置信水平下的 VaR 序列

    exceed_t 定义为 realized 严格大于 VaR。
    """

    alpha: float
    dates: pd.DatetimeIndex
    var: np.ndarray
    realized: np.ndarray

    def __post_init__(self) -> None:
        self.dates = pd.DatetimeIndex(self.dates)
        self.var = np.asarray(self.var, dtype=float)
        self.realized = np.asarray(self.realized, dtype=float)
        if not (len(self.dates) == len(self.var) == len(self.realized)):
            raise GasVineError("VaR series lengths differ")

    @property
    def exceed(self) -> np.ndarray:
        return self.realized > self.var

    @property
    def n_exceed(self) -> int:
        return int(self.exceed.sum())

    def __len__(self) -> int:
        return len(self.var)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "date": self.dates.strftime("%Y-%m-%d"),
                "var": self.var,
                "realized": self.realized,
                "exceed": self.exceed.astype(int),
            }
        )


@dataclass
class KupiecResult:
    """Kupiec 失败比例检验结果"""

    N: int
    T: int
    alpha: float
    LR: float
    p_value: float

    @property
    def fail_rate(self) -> float:
        return self.N / self.T

    def to_summary(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "fail_times": self.N,
            "fail_rate": self.fail_rate,
            "p_value": self.p_value,
            "LR": self.LR,
        }
