"""
二元 Copula 族

Gaussian、Student-t、Gumbel 与旋转 180° 的 Gumbel（下尾相依）。
提供对数密度、h 函数 ∂C(x,v)/∂v、逆 h 函数、参数得分与 Kendall τ。

对数密度的核心公式只写一次，通过 xp 参数同时服务于 numpy 向量化路径
和动态递推中的 math 标量路径。
"""

import math
from dataclasses import dataclass
from enum import Enum
from types import SimpleNamespace
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy import stats
from scipy.special import gammaln

from ..core.errors import CopulaDomainError, RootFindingError
from ..utils.numeric import UNIT_EPS, clamp_unit
from .links import CORRELATION_LINK, GUMBEL_LINK, LinkFn

DEFAULT_T_NU = 8.0

# 逆 h 函数求根设置
BRACKET_WIDTH = 1e-6
MAX_ROOT_ITER = 200
ROOT_TOL = 1e-12


class Family(str, Enum):
    """Copula 族，定义顺序即 AIC 相同时的优先顺序"""

    GAUSSIAN = "Gaussian"
    STUDENT_T = "StudentT"
    GUMBEL = "Gumbel"
    ROT_GUMBEL = "RotGumbel180"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip().lower().replace("-", "").replace("_", "").replace("'", "")
        aliases = {
            "gaussian": cls.GAUSSIAN,
            "normal": cls.GAUSSIAN,
            "studentt": cls.STUDENT_T,
            "t": cls.STUDENT_T,
            "studentst": cls.STUDENT_T,
            "gumbel": cls.GUMBEL,
            "rotgumbel": cls.ROT_GUMBEL,
            "rotgumbel180": cls.ROT_GUMBEL,
        }
        if key not in aliases:
            raise CopulaDomainError(f"unknown copula family '{name}'", family=name)
        return aliases[key]

    @property
    def rank(self) -> int:
        return list(Family).index(self)

    @property
    def link(self) -> LinkFn:
        if self in (Family.GAUSSIAN, Family.STUDENT_T):
            return CORRELATION_LINK
        return GUMBEL_LINK

    @property
    def is_gumbel(self) -> bool:
        return self in (Family.GUMBEL, Family.ROT_GUMBEL)

    @property
    def bounds(self) -> tuple[float, float]:
        """自然参数的开/闭区间端点（Gumbel 下界 1 可取到）"""
        return (1.0, math.inf) if self.is_gumbel else (-1.0, 1.0)

    @property
    def short_name(self) -> str:
        return "RotGumbel" if self is Family.ROT_GUMBEL else self.value


ALL_FAMILIES: tuple[Family, ...] = tuple(Family)


@dataclass(frozen=True)
class CopulaParam:
    """
    Copula 参数

    theta 为自然参数（Gaussian/Student-t 的 ρ，Gumbel 族的 θ），
    可以是标量，也可以是与数据等长的时变路径；nu 仅用于 Student-t。
    """

    theta: Any
    nu: float | None = None


def check_param(family: Family, param: CopulaParam) -> None:
    """检查参数是否在族的定义域内"""
    theta = np.asarray(param.theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise CopulaDomainError(
            f"{family.value} parameter is not finite", family=family.value
        )
    if family.is_gumbel:
        if np.any(theta < 1.0):
            raise CopulaDomainError(
                f"{family.value} requires theta >= 1, got {theta.min():g}",
                family=family.value,
            )
    elif np.any(np.abs(theta) >= 1.0):
        raise CopulaDomainError(
            f"{family.value} requires |rho| < 1, got {np.abs(theta).max():g}",
            family=family.value,
        )
    if family is Family.STUDENT_T:
        if param.nu is None or not param.nu > 2.0:
            raise CopulaDomainError("StudentT requires nu > 2", family=family.value)
    elif param.nu is not None:
        raise CopulaDomainError(
            f"{family.value} takes no nu parameter", family=family.value
        )


# ---------------------------------------------------------------------------
# 对数密度核心
# ---------------------------------------------------------------------------


def _logaddexp(a: float, b: float) -> float:
    m = max(a, b)
    return m + math.log1p(math.exp(-abs(a - b)))


_SCALAR = SimpleNamespace(
    log=math.log, log1p=math.log1p, exp=math.exp, sqrt=math.sqrt, logaddexp=_logaddexp
)


def _gauss_core(rho: Any, s: Any, p: Any, xp: Any = np) -> Any:
    """s = x² + y²，p = xy，x、y 为正态分位数"""
    r2 = rho * rho
    return -0.5 * xp.log1p(-r2) - (r2 * s - 2.0 * rho * p) / (2.0 * (1.0 - r2))


def _t_core(rho: Any, s: Any, p: Any, margin: Any, nu: float, xp: Any = np) -> Any:
    """margin 已包含 ν 相关的常数项与两个边缘 t 密度的修正"""
    r2 = rho * rho
    quad = (s - 2.0 * rho * p) / (nu * (1.0 - r2))
    return margin - 0.5 * xp.log1p(-r2) - 0.5 * (nu + 2.0) * xp.log1p(quad)


def _gumbel_core(theta: Any, la: Any, lb: Any, base: Any, xp: Any = np) -> Any:
    """la = ln(-ln u)，lb = ln(-ln v)，base = -ln u - ln v"""
    ln_a = xp.logaddexp(theta * la, theta * lb)
    a_inv = xp.exp(ln_a / theta)
    return (
        -a_inv
        + (theta - 1.0) * (la + lb)
        + base
        + (2.0 / theta - 2.0) * ln_a
        + xp.log1p((theta - 1.0) / a_inv)
    )


def _t_margin(x: np.ndarray, y: np.ndarray, nu: float) -> np.ndarray:
    const = (
        gammaln((nu + 2.0) / 2.0) + gammaln(nu / 2.0) - 2.0 * gammaln((nu + 1.0) / 2.0)
    )
    return const + 0.5 * (nu + 1.0) * (np.log1p(x * x / nu) + np.log1p(y * y / nu))


def _gumbel_obs(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, ...]:
    a = -np.log(u)
    b = -np.log(v)
    return np.log(a), np.log(b), a + b


def prepare_observations(
    family: Family, u: ArrayLike, v: ArrayLike, nu: float | None = None
) -> tuple[np.ndarray, ...]:
    """把 (u, v) 变换为对数密度核心所需的逐点量"""
    u = clamp_unit(u)
    v = clamp_unit(v)
    if family is Family.GAUSSIAN:
        x, y = stats.norm.ppf(u), stats.norm.ppf(v)
        return x * x + y * y, x * y
    if family is Family.STUDENT_T:
        x, y = stats.t.ppf(u, df=nu), stats.t.ppf(v, df=nu)
        return x * x + y * y, x * y, _t_margin(x, y, nu)
    if family is Family.GUMBEL:
        return _gumbel_obs(u, v)
    return _gumbel_obs(1.0 - u, 1.0 - v)


def _core(family: Family, theta: Any, obs: tuple, nu: float | None, xp: Any) -> Any:
    if family is Family.GAUSSIAN:
        return _gauss_core(theta, *obs, xp=xp)
    if family is Family.STUDENT_T:
        return _t_core(theta, *obs, nu=nu, xp=xp)
    return _gumbel_core(theta, *obs, xp=xp)


def _as_output(values: np.ndarray) -> np.ndarray | float:
    return float(values) if np.ndim(values) == 0 else values


def log_density(
    family: Family, param: CopulaParam, u: ArrayLike, v: ArrayLike
) -> np.ndarray | float:
    """
    Copula 对数密度 ln c(u, v; θ)

    Args:
        family: Copula 族
        param: 参数，theta 可以是与 u、v 等长的时变路径
        u, v: 伪观测值，截断到 [1e-10, 1 - 1e-10]

    Raises:
        CopulaDomainError: 参数超出定义域
    """
    check_param(family, param)
    obs = prepare_observations(family, u, v, param.nu)
    theta = np.asarray(param.theta, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return _as_output(_core(family, theta, obs, param.nu, np))


# ---------------------------------------------------------------------------
# h 函数及其逆
# ---------------------------------------------------------------------------


def _gumbel_log_h(theta: np.ndarray, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    a = -np.log(x)
    b = -np.log(v)
    ln_a = np.logaddexp(theta * np.log(a), theta * np.log(b))
    return (
        -np.exp(ln_a / theta)
        + (1.0 / theta - 1.0) * ln_a
        + (theta - 1.0) * np.log(b)
        - np.log(v)
    )


def _gumbel_h(theta: np.ndarray, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.exp(_gumbel_log_h(theta, x, v))


def h_function(
    family: Family, param: CopulaParam, x: ArrayLike, v: ArrayLike
) -> np.ndarray | float:
    """
    条件分布函数 h(x | v) = ∂C(x, v) / ∂v

    对 x 严格递增，结果截断到 [1e-10, 1 - 1e-10]。
    """
    check_param(family, param)
    x = clamp_unit(x)
    v = clamp_unit(v)
    theta = np.asarray(param.theta, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        if family is Family.GAUSSIAN:
            zx, zv = stats.norm.ppf(x), stats.norm.ppf(v)
            h = stats.norm.cdf((zx - theta * zv) / np.sqrt(1.0 - theta * theta))
        elif family is Family.STUDENT_T:
            nu = float(param.nu)
            tx, tv = stats.t.ppf(x, df=nu), stats.t.ppf(v, df=nu)
            scale = np.sqrt((nu + tv * tv) * (1.0 - theta * theta) / (nu + 1.0))
            h = stats.t.cdf((tx - theta * tv) / scale, df=nu + 1.0)
        elif family is Family.GUMBEL:
            h = _gumbel_h(theta, x, v)
        else:
            h = 1.0 - _gumbel_h(theta, 1.0 - x, 1.0 - v)
    return _as_output(clamp_unit(h))


def _gumbel_h_inverse(theta: np.ndarray, w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Gumbel 逆 h 函数：二分到 1e-6 的区间后用 Newton 精修

    Newton 步落在区间外时退回二分；导数 dh/dx 即 Copula 密度。

    Raises:
        RootFindingError: MAX_ROOT_ITER 次迭代内未收敛
    """
    theta, w, v = np.broadcast_arrays(theta, w, v)
    theta, w, v = theta.astype(float), w.astype(float), v.astype(float)
    lo = np.full(w.shape, UNIT_EPS)
    hi = np.full(w.shape, 1.0 - UNIT_EPS)
    obs_v = np.log(-np.log(v))

    iterations = 0
    while np.any(hi - lo > BRACKET_WIDTH):
        iterations += 1
        mid = 0.5 * (lo + hi)
        below = _gumbel_h(theta, mid, v) < w
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)

    x = 0.5 * (lo + hi)
    while True:
        h = _gumbel_h(theta, x, v)
        err = h - w
        done = (np.abs(err) <= ROOT_TOL) | (hi - lo <= 1e-15)
        if np.all(done):
            return x
        iterations += 1
        if iterations > MAX_ROOT_ITER:
            raise RootFindingError(
                f"Gumbel h-inverse did not converge in {MAX_ROOT_ITER} iterations",
                max_error=float(np.max(np.abs(err))),
            )
        lo = np.where(err < 0.0, x, lo)
        hi = np.where(err > 0.0, x, hi)
        a = -np.log(x)
        la = np.log(a)
        dens = np.exp(_gumbel_core(theta, la, obs_v, a - np.log(v)))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - err / dens
        inside = np.isfinite(step) & (step > lo) & (step < hi)
        x = np.where(done, x, np.where(inside, step, 0.5 * (lo + hi)))


def h_inverse(
    family: Family, param: CopulaParam, w: ArrayLike, v: ArrayLike
) -> np.ndarray | float:
    """
    逆 h 函数：求 x 使 h(x | v) = w

    Gaussian、Student-t 为闭式解，Gumbel 族数值求根。
    """
    check_param(family, param)
    w = clamp_unit(w)
    v = clamp_unit(v)
    theta = np.asarray(param.theta, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        if family is Family.GAUSSIAN:
            scale = np.sqrt(1.0 - theta * theta)
            x = stats.norm.cdf(stats.norm.ppf(w) * scale + theta * stats.norm.ppf(v))
        elif family is Family.STUDENT_T:
            nu = float(param.nu)
            tv = stats.t.ppf(v, df=nu)
            scale = np.sqrt((nu + tv * tv) * (1.0 - theta * theta) / (nu + 1.0))
            x = stats.t.cdf(stats.t.ppf(w, df=nu + 1.0) * scale + theta * tv, df=nu)
        elif family is Family.GUMBEL:
            x = _gumbel_h_inverse(theta, w, v)
        else:
            x = 1.0 - _gumbel_h_inverse(theta, 1.0 - w, 1.0 - v)
    return _as_output(clamp_unit(x))


# ---------------------------------------------------------------------------
# 得分
# ---------------------------------------------------------------------------


def score_step(theta: float) -> float:
    """有限差分步长 h = max(1e-6, 1e-6 |θ|)"""
    return max(1e-6, 1e-6 * abs(theta))


def _difference_points(
    family: Family, theta: float, h: float
) -> tuple[float, float, float]:
    """返回 (θ_low, θ_high, 分母)，靠近边界 2h 以内改用单侧差分"""
    lower, upper = family.bounds
    if theta - 2.0 * h < lower:
        return theta, theta + h, h
    if theta + 2.0 * h > upper:
        return theta - h, theta, h
    return theta - h, theta + h, 2.0 * h


def score(
    family: Family,
    param: CopulaParam,
    u: ArrayLike,
    v: ArrayLike,
    step: float | None = None,
) -> np.ndarray | float:
    """
    对数密度对自然参数的导数 ∂ ln c / ∂θ（有限差分）

    Args:
        step: 差分步长，默认 score_step(θ)

    Returns:
        与 u、v 同形状的得分
    """
    check_param(family, param)
    theta = float(param.theta)
    h = step if step is not None else score_step(theta)
    lo, hi, denom = _difference_points(family, theta, h)
    f_hi = log_density(family, CopulaParam(hi, param.nu), u, v)
    f_lo = log_density(family, CopulaParam(lo, param.nu), u, v)
    return _as_output((np.asarray(f_hi) - np.asarray(f_lo)) / denom)


# ---------------------------------------------------------------------------
# 标量内核
# ---------------------------------------------------------------------------


class PairKernel:
    """
    固定 (u, v) 与 ν 上的标量对数密度/得分内核

    逐点变换在构造时一次算好，动态递推中每一步只做 math 标量运算。
    """

    def __init__(
        self, family: Family, u: ArrayLike, v: ArrayLike, nu: float | None = None
    ):
        if family is Family.STUDENT_T and (nu is None or not nu > 2.0):
            raise CopulaDomainError("StudentT requires nu > 2", family=family.value)
        self.family = family
        self.nu = nu if family is Family.STUDENT_T else None
        self.arrays = prepare_observations(family, u, v, self.nu)
        self.n = len(self.arrays[0])
        self.obs: list[tuple[float, ...]] = list(
            zip(*(a.tolist() for a in self.arrays))
        )
        self.lower, self.upper = family.bounds

    def logc(self, i: int, theta: float) -> float:
        return _core(self.family, theta, self.obs[i], self.nu, _SCALAR)

    def value_and_score(self, i: int, theta: float) -> tuple[float, float]:
        """第 i 个观测的 ln c 与有限差分得分"""
        obs = self.obs[i]
        family, nu = self.family, self.nu
        value = _core(family, theta, obs, nu, _SCALAR)
        h = max(1e-6, 1e-6 * abs(theta))
        if theta - 2.0 * h < self.lower:
            grad = (_core(family, theta + h, obs, nu, _SCALAR) - value) / h
        elif theta + 2.0 * h > self.upper:
            grad = (value - _core(family, theta - h, obs, nu, _SCALAR)) / h
        else:
            grad = (
                _core(family, theta + h, obs, nu, _SCALAR)
                - _core(family, theta - h, obs, nu, _SCALAR)
            ) / (2.0 * h)
        return value, grad

    def total(self, theta: ArrayLike) -> float:
        """向量化求和 Σ ln c(u_t, v_t; θ_t)"""
        with np.errstate(divide="ignore", over="ignore"):
            values = _core(
                self.family, np.asarray(theta, dtype=float), self.arrays, self.nu, np
            )
        return float(np.sum(values))


# ---------------------------------------------------------------------------
# Kendall τ
# ---------------------------------------------------------------------------


def kendall_tau(x: ArrayLike, y: ArrayLike) -> float:
    """
    Kendall τ_b（含结值修正）

    Raises:
        CopulaDomainError: 长度不等、少于 2 个点或全部为结值
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise CopulaDomainError("kendall_tau needs two 1-D sequences of equal length")
    if len(x) < 2:
        raise CopulaDomainError("kendall_tau needs at least 2 observations")
    tau = stats.kendalltau(x, y)[0]
    if not np.isfinite(tau):
        raise CopulaDomainError("kendall_tau is undefined: all values tied")
    return float(tau)


def tau_to_param(family: Family, tau: float, nu: float | None = None) -> CopulaParam:
    """
    由 Kendall τ 换算 Copula 参数（估计初值）

    Gaussian/Student-t: ρ = sin(πτ/2)；Gumbel: θ = 1/(1-τ)，τ < 0 拒绝；
    RotGumbel: θ = 1/(1-|τ|)。
    """
    if not abs(tau) < 1.0:
        raise CopulaDomainError(
            f"tau must satisfy |tau| < 1, got {tau}", family=family.value
        )
    if family in (Family.GAUSSIAN, Family.STUDENT_T):
        rho = math.sin(math.pi * tau / 2.0)
        return CopulaParam(
            rho, (nu or DEFAULT_T_NU) if family is Family.STUDENT_T else None
        )
    if family is Family.GUMBEL:
        if tau < 0.0:
            raise CopulaDomainError(
                "Gumbel cannot represent negative tau; use RotGumbel",
                family=family.value,
            )
        return CopulaParam(1.0 / (1.0 - tau))
    return CopulaParam(1.0 / (1.0 - abs(tau)))
