"""
二元动态 Copula 的极大似然估计与族选择
"""

from collections.abc import Iterable, Sequence

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike

from ..core.errors import CopulaDomainError, PairFitError
from ..utils.optimize import PENALTY, OptimizerConfig, minimize_with_restarts
from .dynamics import (
    Driver,
    DriverCoef,
    GasCoef,
    GasPath,
    PairDynamics,
    PattonCoef,
    StaticCoef,
    as_pair_columns,
    filter_pair,
    patton_forcing,
)
from .families import (
    ALL_FAMILIES,
    DEFAULT_T_NU,
    Family,
    PairKernel,
    kendall_tau,
    tau_to_param,
)

MIN_PAIR_LENGTH = 100

# 路径饱和步数占比超过该值的候选被拒绝
MAX_SATURATION = 0.10

# GAS 初值：B0 依次取 0.95、0.8、0.99
GAS_B_STARTS = (0.95, 0.8, 0.99)
GAS_A0 = 0.05

# Patton 初值 (α0, β0)
PATTON_STARTS = ((0.0, 0.0), (0.1, 0.5), (0.3, 0.8))

_B_RAW_CAP = 10.0


def _decode_nu(raw: float) -> float:
    return 2.0 + float(np.exp(np.clip(raw, -3.0, 5.3)))


def _static_estimate(family: Family, u: np.ndarray, v: np.ndarray) -> float:
    """由样本 Kendall τ 得到的静态参数（用作初值）"""
    try:
        tau = kendall_tau(u, v)
    except CopulaDomainError:
        tau = 0.0
    tau = float(np.clip(tau, -0.95, 0.95))
    if family.is_gumbel:
        tau = max(abs(tau) if family is Family.ROT_GUMBEL else tau, 0.01)
    return float(tau_to_param(family, tau).theta)


class _Problem:
    """把优化向量映射为驱动系数并计算负对数似然"""

    def __init__(
        self,
        family: Family,
        driver: Driver,
        u: np.ndarray,
        v: np.ndarray,
        gamma: float,
        patton_q: int,
    ):
        self.family = family
        self.driver = driver
        self.u = u
        self.v = v
        self.gamma = gamma
        self.patton_q = patton_q
        self.has_nu = family is Family.STUDENT_T
        self._kernel = None if self.has_nu else PairKernel(family, u, v)

    def coef(self, x: np.ndarray) -> DriverCoef:
        nu = _decode_nu(x[-1]) if self.has_nu else None
        if self.driver is Driver.GAS:
            b = float(np.tanh(np.clip(x[2], -_B_RAW_CAP, _B_RAW_CAP)))
            return GasCoef(k=float(x[0]), A=float(x[1]), B=b, nu=nu, gamma=self.gamma)
        if self.driver is Driver.PATTON:
            return PattonCoef(
                omega=float(x[0]),
                alpha=float(x[1]),
                beta=float(x[2]),
                q=self.patton_q,
                nu=nu,
            )
        theta = float(self.family.link.forward(x[0]))
        return StaticCoef(theta=theta, nu=nu)

    def kernel(self, coef: DriverCoef) -> PairKernel:
        if self._kernel is not None:
            return self._kernel
        return PairKernel(self.family, self.u, self.v, coef.nu)

    def path(self, x: np.ndarray, warn: bool = False) -> GasPath:
        coef = self.coef(x)
        return filter_pair(
            self.driver,
            self.family,
            coef,
            self.u,
            self.v,
            warn=warn,
            kernel=self.kernel(coef),
        )

    def objective(self, x: np.ndarray) -> float:
        try:
            return -self.path(x).loglik
        except CopulaDomainError:
            return PENALTY

    def accept(self, x: np.ndarray) -> str | None:
        try:
            path = self.path(x)
        except CopulaDomainError as e:
            return e.message
        if path.saturation_fraction > MAX_SATURATION:
            return f"path saturated on {path.saturation_fraction:.1%} of steps"
        return None

    def starts(self) -> list[np.ndarray]:
        theta0 = _static_estimate(self.family, self.u, self.v)
        x_static = float(self.family.link.inverse(theta0))
        nu_part = [np.log(DEFAULT_T_NU - 2.0)] if self.has_nu else []
        if self.driver is Driver.GAS:
            rows = [
                [(1.0 - b0) * x_static, GAS_A0, np.arctanh(b0)] for b0 in GAS_B_STARTS
            ]
        elif self.driver is Driver.PATTON:
            mean_forcing = float(np.mean(patton_forcing(self.family, self.u, self.v)))
            rows = [
                [x_static - b0 * theta0 - a0 * mean_forcing, a0, b0]
                for a0, b0 in PATTON_STARTS
            ]
        else:
            rows = [[x_static], [x_static + 0.1], [x_static - 0.1]]
        return [np.array(row + nu_part, dtype=float) for row in rows]


def fit_pair(
    family: Family,
    driver: Driver,
    u: ArrayLike,
    v: ArrayLike,
    optimizer: OptimizerConfig | None = None,
    gamma: float = 0.0,
    patton_q: int = 10,
) -> PairDynamics:
    """
    估计单个族在给定驱动下的系数

    GAS 估计 (k, A, B)，B = tanh(b̃) 保证 |B| < 1；Patton 估计 (ω, α, β)；
    Student-t 另外估计静态 ν。路径饱和步数超过 10% 的候选被拒绝。

    Args:
        family: Copula 族
        driver: 驱动方式
        u, v: 伪观测值列
        optimizer: 优化器设置
        gamma: GAS 得分缩放指数（非 0 仅限 Gaussian）
        patton_q: Patton 平均窗口

    Returns:
        PairDynamics，含滤波路径、loglik 与 AIC = 2k - 2·loglik

    Raises:
        PairFitError: 所有起点都失败
    """
    optimizer = optimizer or OptimizerConfig()
    u, v = as_pair_columns(u, v)
    if len(u) < MIN_PAIR_LENGTH:
        logger.warning(
            f"{family.short_name} 样本长度 {len(u)} < {MIN_PAIR_LENGTH}，估计可能不可靠"
        )
    if gamma != 0.0 and family is not Family.GAUSSIAN:
        raise PairFitError(
            f"gamma={gamma} scaling is only supported for the Gaussian family",
            family=family.value,
        )

    problem = _Problem(family, driver, u, v, gamma, patton_q)
    outcome = minimize_with_restarts(
        problem.objective, problem.starts(), optimizer, accept=problem.accept
    )
    if not outcome.finite:
        raise PairFitError(
            f"{family.short_name}/{driver.value} fit failed: "
            + "; ".join(outcome.failures),
            family=family.value,
            causes=outcome.failures,
        )
    if not outcome.converged:
        logger.warning(f"{family.short_name}/{driver.value} 优化未收敛，使用最优可行点")

    coef = problem.coef(outcome.x)
    path = problem.path(outcome.x, warn=True)
    return PairDynamics(
        family=family,
        driver=driver,
        coef=coef,
        loglik=path.loglik,
        aic=2.0 * coef.n_params - 2.0 * path.loglik,
        converged=outcome.converged,
        path=path,
    )


def select_family(
    u: ArrayLike,
    v: ArrayLike,
    families: Iterable[Family] | None = None,
    driver: Driver = Driver.GAS,
    optimizer: OptimizerConfig | None = None,
    gamma: float = 0.0,
    patton_q: int = 10,
) -> PairDynamics:
    """
    对每个候选族调用 fit_pair，选择 AIC 最小者

    AIC 相同时按 Gaussian < StudentT < Gumbel < RotGumbel 的顺序取前者。

    Raises:
        PairFitError: 候选列表为空或全部失败（消息列出各族失败原因）
    """
    candidates: Sequence[Family] = (
        list(families) if families is not None else ALL_FAMILIES
    )
    if not candidates:
        raise PairFitError("family list is empty")

    fits: list[PairDynamics] = []
    causes: dict[str, str] = {}
    for family in candidates:
        try:
            fit = fit_pair(family, driver, u, v, optimizer, gamma, patton_q)
        except PairFitError as e:
            causes[family.short_name] = e.message
            logger.debug(f"{family.short_name} 拟合失败: {e.message}")
            continue
        logger.debug(
            f"{family.short_name}/{driver.value}: loglik={fit.loglik:.4f} "
            f"AIC={fit.aic:.4f}"
        )
        fits.append(fit)

    if not fits:
        detail = "; ".join(f"{name}: {msg}" for name, msg in causes.items())
        raise PairFitError(f"all candidate families failed ({detail})", causes=causes)
    return min(fits, key=lambda f: (f.aic, f.family.rank))
