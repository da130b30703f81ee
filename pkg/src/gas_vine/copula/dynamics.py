"""
时变参数驱动

GAS(1,1):   θ̃_{t+1} = k + A s̃_t + B θ̃_t，θ̃_1 = k / (1 - B)，θ_t = Λ(θ̃_t)
Patton:     θ_t = Λ(ω + β θ_{t-1} + α · (1/q) Σ_{i=1..q} g(u_{t-i}, v_{t-i}))
Static:     θ_t ≡ θ

s̃_t 为 ln c 对 θ̃ 的得分（经 Λ 链式求导），按 γ 用 Fisher 信息缩放。
"""

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike
from scipy import stats

from ..core.errors import CopulaDomainError
from ..utils.numeric import clamp_unit
from .families import CopulaParam, Family, PairKernel

PATTON_MAX_Q = 10

# θ̃ 的数值上限，防止发散路径溢出
_STATE_CAP = 1e6


class Driver(str, Enum):
    """参数驱动方式"""

    GAS = "gas"
    PATTON = "patton"
    STATIC = "static"

    @classmethod
    def parse(cls, name: str) -> "Driver":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise CopulaDomainError(f"unknown driver '{name}'") from None


@dataclass(frozen=True)
class GasCoef:
    """GAS(1,1) 系数，nu 仅用于 Student-t（静态）"""

    k: float
    A: float
    B: float
    nu: float | None = None
    gamma: float = 0.0

    @property
    def n_params(self) -> int:
        return 3 + int(self.nu is not None)

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k, "A": self.A, "B": self.B, "nu": self.nu, "gamma": self.gamma
        }


@dataclass(frozen=True)
class PattonCoef:
    """Patton 型 ARMA(1, q) 驱动系数"""

    omega: float
    alpha: float
    beta: float
    q: int = PATTON_MAX_Q
    nu: float | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.q <= PATTON_MAX_Q:
            raise CopulaDomainError(
                f"Patton window q must be in 1..{PATTON_MAX_Q}, got {self.q}"
            )

    @property
    def n_params(self) -> int:
        return 3 + int(self.nu is not None)

    def to_dict(self) -> dict[str, Any]:
        return {
            "omega": self.omega,
            "alpha": self.alpha,
            "beta": self.beta,
            "q": self.q,
            "nu": self.nu,
        }


@dataclass(frozen=True)
class StaticCoef:
    """常参数 Copula，theta 为自然参数"""

    theta: float
    nu: float | None = None

    @property
    def n_params(self) -> int:
        return 1 + int(self.nu is not None)

    def to_dict(self) -> dict[str, Any]:
        return {"theta": self.theta, "nu": self.nu}


DriverCoef = Union[GasCoef, PattonCoef, StaticCoef]

_COEF_TYPES: dict[Driver, type] = {
    Driver.GAS: GasCoef,
    Driver.PATTON: PattonCoef,
    Driver.STATIC: StaticCoef,
}


def coef_from_dict(driver: Driver, data: dict[str, Any]) -> DriverCoef:
    """从 to_dict 的结果还原驱动系数"""
    return _COEF_TYPES[driver](**data)


@dataclass
class GasPath:
    """
    滤波得到的参数路径

    theta_tilde、theta 与数据等长；theta_tilde_next 是最后一个观测之后
    一步的状态，用于样本外模拟。
    """

    theta_tilde: np.ndarray
    theta: np.ndarray
    loglik: float
    theta_tilde_next: float
    theta_next: float
    n_saturated: int = 0

    def __len__(self) -> int:
        return len(self.theta)

    @property
    def saturation_fraction(self) -> float:
        return self.n_saturated / max(len(self.theta), 1)

    def theta_at(self, t_index: int) -> float:
        """第 t_index 步（0 起）的自然参数，t_index == 长度时返回一步预测"""
        if t_index == len(self.theta):
            return self.theta_next
        if not 0 <= t_index < len(self.theta):
            raise IndexError(
                f"t_index {t_index} outside path of length {len(self.theta)}"
            )
        return float(self.theta[t_index])


@dataclass
class PairDynamics:
    """单条边的族、驱动与估计结果"""

    family: Family
    driver: Driver
    coef: DriverCoef
    loglik: float = 0.0
    aic: float = 0.0
    converged: bool = True
    path: GasPath | None = field(default=None, repr=False)
    # 无路径时（从文件载入）保存的一步预测参数
    theta_next: float | None = None

    @property
    def n_params(self) -> int:
        return self.coef.n_params

    @property
    def nu(self) -> float | None:
        return self.coef.nu

    def param_at(self, t_index: int, n_obs: int | None = None) -> CopulaParam:
        """
        第 t_index 步的参数

        没有滤波路径时只能取样本外第一步（t_index == n_obs），使用保存的 theta_next。
        """
        if self.path is not None:
            return CopulaParam(self.path.theta_at(t_index), self.nu)
        if self.theta_next is not None and n_obs is not None and t_index == n_obs:
            return CopulaParam(self.theta_next, self.nu)
        raise CopulaDomainError(
            f"no filtered path for t_index={t_index}; re-run the filters on the data "
            "first"
        )

    def to_dict(self) -> dict[str, Any]:
        data = {
            "family": self.family.value,
            "driver": self.driver.value,
            "coef": self.coef.to_dict(),
            "loglik": self.loglik,
            "aic": self.aic,
            "converged": self.converged,
        }
        if self.path is not None:
            data["theta_tilde_next"] = self.path.theta_tilde_next
            data["theta_next"] = self.path.theta_next
        elif self.theta_next is not None:
            data["theta_next"] = self.theta_next
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PairDynamics":
        driver = Driver(data["driver"])
        return cls(
            family=Family(data["family"]),
            driver=driver,
            coef=coef_from_dict(driver, data["coef"]),
            loglik=float(data["loglik"]),
            aic=float(data["aic"]),
            converged=bool(data.get("converged", True)),
            theta_next=data.get("theta_next"),
        )


def as_pair_columns(u: ArrayLike, v: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    u = clamp_unit(u)
    v = clamp_unit(v)
    if u.shape != v.shape or u.ndim != 1 or len(u) == 0:
        raise CopulaDomainError("u and v must be non-empty 1-D columns of equal length")
    return u, v


def scaled_score(grad: float, value: float, d_link: float, gamma: float) -> float:
    """
    链接空间中的缩放得分 s̃ = ∇ · Λ' · Ĩ^{-γ}

    γ 非 0 时使用 Gaussian 的 Fisher 信息 I(ρ) = (1 + ρ²) / (1 - ρ²)²，
    换算到链接空间为 I · Λ'²。
    """
    scaled = grad * d_link
    if gamma:
        info = (1.0 + value * value) / (1.0 - value * value) ** 2 * d_link * d_link
        scaled *= max(info, 1e-300) ** (-gamma)
    return scaled


def check_gas_coef(family: Family, coef: GasCoef) -> None:
    """检查 |B| < 1 以及 γ 与族是否兼容"""
    if not abs(coef.B) < 1.0:
        raise CopulaDomainError(f"GAS persistence must satisfy |B| < 1, got {coef.B}")
    if coef.gamma not in (0.0, 0.5, 1.0):
        raise CopulaDomainError(
            f"GAS scaling gamma must be 0, 0.5 or 1, got {coef.gamma}"
        )
    if coef.gamma != 0.0 and family is not Family.GAUSSIAN:
        raise CopulaDomainError(
            "information scaling is only available for the Gaussian family",
            family=family.value,
        )


def _warn_saturation(family: Family, n_saturated: int, n: int) -> None:
    if n_saturated:
        logger.warning(f"{family.short_name} 参数路径饱和: {n_saturated}/{n} 步")


def gas_filter(
    family: Family,
    coef: GasCoef,
    u: ArrayLike,
    v: ArrayLike,
    warn: bool = True,
    kernel: PairKernel | None = None,
) -> GasPath:
    """
    GAS(1,1) 滤波

    Args:
        family: Copula 族
        coef: GAS 系数
        u, v: 伪观测值列
        warn: 路径饱和时是否输出警告（估计过程中关闭）
        kernel: 可复用的标量内核

    Returns:
        GasPath

    Raises:
        CopulaDomainError: |B| >= 1、γ 与族不兼容或得分非有限
    """
    u, v = as_pair_columns(u, v)
    check_gas_coef(family, coef)
    if kernel is None:
        kernel = PairKernel(family, u, v, coef.nu)
    link = family.link
    forward, slope = link.forward_scalar, link.derivative_scalar
    step = kernel.value_and_score
    k, a_coef, b_coef, gamma = coef.k, coef.A, coef.B, coef.gamma

    n = kernel.n
    theta_tilde = np.empty(n)
    theta = np.empty(n)
    state = k / (1.0 - b_coef)
    loglik = 0.0
    n_saturated = 0
    for i in range(n):
        value, sat = forward(state)
        theta_tilde[i] = state
        theta[i] = value
        n_saturated += sat
        ll, grad = step(i, value)
        if not (math.isfinite(grad) and math.isfinite(ll)):
            raise CopulaDomainError(
                f"non-finite score at t={i + 1}", t=i + 1, family=family.value
            )
        loglik += ll
        scaled = scaled_score(grad, value, slope(state), gamma)
        state = min(max(k + a_coef * scaled + b_coef * state, -_STATE_CAP), _STATE_CAP)

    if warn:
        _warn_saturation(family, n_saturated, n)
    return GasPath(
        theta_tilde=theta_tilde,
        theta=theta,
        loglik=loglik,
        theta_tilde_next=state,
        theta_next=forward(state)[0],
        n_saturated=n_saturated,
    )


def patton_forcing(family: Family, u: ArrayLike, v: ArrayLike) -> np.ndarray:
    """
    Patton 驱动的逐点强迫项

    Gaussian/Student-t 用 Φ⁻¹(u)Φ⁻¹(v)，Gumbel 族用 |u - v|。
    """
    u = clamp_unit(u)
    v = clamp_unit(v)
    if family.is_gumbel:
        return np.abs(u - v)
    return stats.norm.ppf(u) * stats.norm.ppf(v)


def patton_filter(
    family: Family,
    coef: PattonCoef,
    u: ArrayLike,
    v: ArrayLike,
    warn: bool = True,
    kernel: PairKernel | None = None,
) -> GasPath:
    """
    Patton 型 ARMA(1, q) 滤波，前 q 步只平均已有的历史

    θ_1 = Λ(ω)；之后 θ_t = Λ(ω + β θ_{t-1} + α · 窗口均值)。
    """
    u, v = as_pair_columns(u, v)
    if kernel is None:
        kernel = PairKernel(family, u, v, coef.nu)
    link = family.link
    g = patton_forcing(family, u, v)
    n = len(g)
    csum = np.concatenate(([0.0], np.cumsum(g)))
    # 第 t 步（0 起）的窗口为 [max(0, t - q), t)
    idx = np.arange(n + 1)
    start = np.maximum(idx - coef.q, 0)
    count = idx - start
    with np.errstate(invalid="ignore", divide="ignore"):
        window_mean = np.where(
            count > 0, (csum[idx] - csum[start]) / np.maximum(count, 1), 0.0
        )
    window_mean = window_mean.tolist()

    forward = link.forward_scalar
    theta_tilde = np.empty(n + 1)
    theta = np.empty(n + 1)
    n_saturated = 0
    prev = 0.0
    for t in range(n + 1):
        if t == 0:
            state = coef.omega
        else:
            state = coef.omega + coef.beta * prev + coef.alpha * window_mean[t]
        state = min(max(state, -_STATE_CAP), _STATE_CAP)
        value, sat = forward(state)
        theta_tilde[t] = state
        theta[t] = value
        if t < n:
            n_saturated += sat
        prev = value

    loglik = kernel.total(theta[:n])
    if not np.isfinite(loglik):
        raise CopulaDomainError("non-finite Patton log-likelihood", family=family.value)
    if warn:
        _warn_saturation(family, n_saturated, n)
    return GasPath(
        theta_tilde=theta_tilde[:n],
        theta=theta[:n],
        loglik=loglik,
        theta_tilde_next=float(theta_tilde[n]),
        theta_next=float(theta[n]),
        n_saturated=n_saturated,
    )


def static_filter(
    family: Family,
    coef: StaticCoef,
    u: ArrayLike,
    v: ArrayLike,
    warn: bool = True,
    kernel: PairKernel | None = None,
) -> GasPath:
    """常参数路径 θ_t ≡ θ"""
    u, v = as_pair_columns(u, v)
    if kernel is None:
        kernel = PairKernel(family, u, v, coef.nu)
    link = family.link
    state = float(link.inverse(coef.theta))
    value, sat = link.forward_scalar(state)
    n = kernel.n
    theta = np.full(n, value)
    loglik = kernel.total(theta)
    if not np.isfinite(loglik):
        raise CopulaDomainError("non-finite static log-likelihood", family=family.value)
    n_saturated = n if sat else 0
    if warn:
        _warn_saturation(family, n_saturated, n)
    return GasPath(
        theta_tilde=np.full(n, state),
        theta=theta,
        loglik=loglik,
        theta_tilde_next=state,
        theta_next=value,
        n_saturated=n_saturated,
    )


_FILTERS = {
    Driver.GAS: gas_filter,
    Driver.PATTON: patton_filter,
    Driver.STATIC: static_filter,
}


def filter_pair(
    driver: Driver,
    family: Family,
    coef: DriverCoef,
    u: ArrayLike,
    v: ArrayLike,
    warn: bool = True,
    kernel: PairKernel | None = None,
) -> GasPath:
    """按驱动方式分派滤波"""
    expected = _COEF_TYPES[driver]
    if not isinstance(coef, expected):
        raise CopulaDomainError(
            f"driver '{driver.value}' expects {expected.__name__}, got "
            f"{type(coef).__name__}"
        )
    return _FILTERS[driver](family, coef, u, v, warn=warn, kernel=kernel)


def pair_loglik(
    driver: Driver, family: Family, coef: DriverCoef, u: ArrayLike, v: ArrayLike
) -> float:
    """滤波路径上的对数似然 Σ_t ln c(u_t, v_t; θ_t)"""
    return filter_pair(driver, family, coef, u, v, warn=False).loglik


class DriverStepper:
    """
    逐步推进的驱动状态

    递推模拟时每一步先用 theta 抽样，再用该步边上的伪观测调用 update。
    """

    def __init__(self, family: Family, driver: Driver, coef: DriverCoef):
        self.family = family
        self.driver = driver
        self.coef = coef
        self.link = family.link
        self._window: deque[float] = deque(maxlen=getattr(coef, "q", 1))
        if driver is Driver.GAS:
            check_gas_coef(family, coef)
            self.state = coef.k / (1.0 - coef.B)
        elif driver is Driver.PATTON:
            self.state = coef.omega
        else:
            self.state = float(self.link.inverse(coef.theta))
        self.theta = self.link.forward_scalar(self.state)[0]

    def update(self, u: float, v: float) -> float:
        """吸收一步观测 (u, v)，返回下一步的自然参数"""
        if self.driver is Driver.GAS:
            kernel = PairKernel(self.family, [u], [v], self.coef.nu)
            _, grad = kernel.value_and_score(0, self.theta)
            scaled = scaled_score(
                grad,
                self.theta,
                self.link.derivative_scalar(self.state),
                self.coef.gamma,
            )
            state = self.coef.k + self.coef.A * scaled + self.coef.B * self.state
        elif self.driver is Driver.PATTON:
            self._window.append(float(patton_forcing(self.family, [u], [v])[0]))
            state = (
                self.coef.omega
                + self.coef.beta * self.theta
                + self.coef.alpha * sum(self._window) / len(self._window)
            )
        else:
            return self.theta
        self.state = min(max(state, -_STATE_CAP), _STATE_CAP)
        self.theta = self.link.forward_scalar(self.state)[0]
        return self.theta
