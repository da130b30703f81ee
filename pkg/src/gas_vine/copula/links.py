"""
连接函数 Λ：把无约束的动态状态 θ̃ 映射到 Copula 参数的自然取值范围

Gaussian / Student-t:  Λ(x) = (1 - e^{-x}) / (1 + e^{-x}) = tanh(x / 2) ∈ (-1, 1)
Gumbel / RotGumbel:    Λ(x) = 1 + e^{x} ∈ (1, ∞)
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

# 自然参数的截断界限
RHO_MAX = 1.0 - 1e-6
GUMBEL_MIN = 1.0 + 1e-10
GUMBEL_MAX = 50.0

# |θ̃| 超过该值视为饱和
LINK_SATURATION = 50.0

_LOG_GUMBEL_SPAN = math.log(GUMBEL_MAX - 1.0)


@dataclass(frozen=True)
class LinkFn:
    """
    单个族的连接函数

    kind 为 "correlation"（取值 (-1,1)）或 "gumbel"（取值 [1, ∞)）。
    forward 的结果截断到 [-RHO_MAX, RHO_MAX] 或 [GUMBEL_MIN, GUMBEL_MAX]。
    """

    kind: str

    @property
    def lower(self) -> float:
        return -RHO_MAX if self.kind == "correlation" else GUMBEL_MIN

    @property
    def upper(self) -> float:
        return RHO_MAX if self.kind == "correlation" else GUMBEL_MAX

    def forward(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "correlation":
            return np.clip(np.tanh(x / 2.0), -RHO_MAX, RHO_MAX)
        return np.clip(
            1.0 + np.exp(np.minimum(x, _LOG_GUMBEL_SPAN)), GUMBEL_MIN, GUMBEL_MAX
        )

    def inverse(self, theta: ArrayLike) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "correlation":
            return 2.0 * np.arctanh(np.clip(theta, -RHO_MAX, RHO_MAX))
        return np.log(np.clip(theta, GUMBEL_MIN, GUMBEL_MAX) - 1.0)

    def derivative(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "correlation":
            return (1.0 - np.tanh(x / 2.0) ** 2) / 2.0
        return np.exp(np.minimum(x, _LOG_GUMBEL_SPAN))

    def saturated(self, x: ArrayLike) -> np.ndarray:
        """|θ̃| 超过饱和阈值或上界截断生效"""
        x = np.asarray(x, dtype=float)
        if self.kind == "correlation":
            clamp = np.abs(np.tanh(x / 2.0)) >= RHO_MAX
        else:
            clamp = x >= _LOG_GUMBEL_SPAN
        return (np.abs(x) > LINK_SATURATION) | clamp

    # 动态递推逐步调用的标量版本

    def forward_scalar(self, x: float) -> tuple[float, bool]:
        """返回 (Λ(x), 是否饱和)"""
        if self.kind == "correlation":
            rho = math.tanh(x / 2.0)
            if rho > RHO_MAX:
                return RHO_MAX, True
            if rho < -RHO_MAX:
                return -RHO_MAX, True
            return rho, abs(x) > LINK_SATURATION
        if x >= _LOG_GUMBEL_SPAN:
            return GUMBEL_MAX, True
        return max(1.0 + math.exp(x), GUMBEL_MIN), x < -LINK_SATURATION

    def derivative_scalar(self, x: float) -> float:
        if self.kind == "correlation":
            t = math.tanh(x / 2.0)
            return (1.0 - t * t) / 2.0
        return math.exp(min(x, _LOG_GUMBEL_SPAN))


CORRELATION_LINK = LinkFn("correlation")
GUMBEL_LINK = LinkFn("gumbel")
