"""
ARFIMA(p,d,q)-GARCH(a,b) 边缘模型，新息服从标准化偏斜 t 分布

均值方程:  Φ(L)(1 - L)^d (x_t - μ) = Θ(L) ε_t
方差方程:  σ²_t = ω + Σ α_i ε²_{t-i} + Σ β_j σ²_{t-j}
新息:      ε_t = σ_t z_t,  z_t ~ sstd(ν, ξ)

所有系数通过变换后的无约束参数做联合极大似然估计。
"""

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from loguru import logger
from numpy.typing import ArrayLike
from scipy.signal import lfilter, lfiltic

from ..core.errors import MarginalFitError
from ..utils.optimize import OptimizerConfig, minimize_with_restarts
from ..utils.rng import substream
from . import skew_t
from .fracdiff import DEFAULT_TRUNCATION, frac_diff

# 低于该长度时估计不可靠
MIN_RELIABLE_LENGTH = 200

# σ² 下界
VARIANCE_FLOOR = 1e-12

# 方差目标初值
ALPHA0 = 0.05
BETA0 = 0.90

NU0 = 8.0
MAX_P = 5
MAX_GARCH = 2

# 边缘模型参数较多，迭代上限高于二元 Copula
MARGINAL_OPTIMIZER = OptimizerConfig(max_iter=3000, restarts=3, tol=1e-7, polish=True)


@dataclass(frozen=True)
class MarginalOrder:
    """ARFIMA-GARCH 阶数"""

    p: int = 0
    q: int = 0
    use_frac_d: bool = False
    a: int = 1
    b: int = 1

    def __post_init__(self) -> None:
        for name in ("p", "q", "a", "b"):
            if getattr(self, name) < 0:
                raise MarginalFitError(
                    f"order {name} must be non-negative", order=str(self)
                )
        if self.p > MAX_P or self.q > MAX_P:
            raise MarginalFitError("ARMA orders must not exceed 5", order=str(self))
        if self.a > MAX_GARCH or self.b > MAX_GARCH:
            raise MarginalFitError("GARCH orders must not exceed 2", order=str(self))
        if self.a + self.b < 1:
            raise MarginalFitError("GARCH needs a + b >= 1", order=str(self))

    @property
    def n_params(self) -> int:
        """μ, φ, θ, d, ω, α, β, ν, ξ 的参数总数"""
        return 1 + self.p + self.q + int(self.use_frac_d) + 1 + self.a + self.b + 2

    @property
    def label(self) -> str:
        if self.use_frac_d:
            mean = f"ARFIMA({self.p},d,{self.q})"
        else:
            mean = f"ARMA({self.p},{self.q})"
        return f"{mean}-GARCH({self.a},{self.b})"

    def __str__(self) -> str:
        return self.label

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class MarginalFit:
    """
    边缘模型估计结果

    sigma 与 z 为拟合样本上的条件标准差和标准化残差路径。
    """

    order: MarginalOrder
    mu: float
    phi: np.ndarray
    theta: np.ndarray
    d: float
    omega: float
    alpha: np.ndarray
    beta: np.ndarray
    nu: float
    xi_skew: float
    loglik: float
    aic: float
    sigma: np.ndarray
    z: np.ndarray
    truncation: int = DEFAULT_TRUNCATION
    converged: bool = True
    name: str = ""
    diagnostics: dict[str, float] = field(default_factory=dict)

    @property
    def n_obs(self) -> int:
        return len(self.z)

    @property
    def persistence(self) -> float:
        return float(np.sum(self.alpha) + np.sum(self.beta))

    @property
    def unconditional_variance(self) -> float:
        return float(self.omega / (1.0 - self.persistence))

    def to_dict(self) -> dict[str, Any]:
        """转换为可 JSON 序列化的字典"""
        return {
            "name": self.name,
            "order": self.order.to_dict(),
            "mu": self.mu,
            "phi": self.phi.tolist(),
            "theta": self.theta.tolist(),
            "d": self.d,
            "omega": self.omega,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "nu": self.nu,
            "xi_skew": self.xi_skew,
            "loglik": self.loglik,
            "aic": self.aic,
            "truncation": self.truncation,
            "converged": self.converged,
            "diagnostics": dict(self.diagnostics),
            "sigma": self.sigma.tolist(),
            "z": self.z.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MarginalFit":
        """从 to_dict 的结果还原"""
        return cls(
            order=MarginalOrder(**data["order"]),
            mu=float(data["mu"]),
            phi=np.asarray(data["phi"], dtype=float),
            theta=np.asarray(data["theta"], dtype=float),
            d=float(data["d"]),
            omega=float(data["omega"]),
            alpha=np.asarray(data["alpha"], dtype=float),
            beta=np.asarray(data["beta"], dtype=float),
            nu=float(data["nu"]),
            xi_skew=float(data["xi_skew"]),
            loglik=float(data["loglik"]),
            aic=float(data["aic"]),
            sigma=np.asarray(data["sigma"], dtype=float),
            z=np.asarray(data["z"], dtype=float),
            truncation=int(data.get("truncation", DEFAULT_TRUNCATION)),
            converged=bool(data.get("converged", True)),
            name=str(data.get("name", "")),
            diagnostics={k: float(v) for k, v in data.get("diagnostics", {}).items()},
        )


@dataclass
class FilterState:
    """在一段序列上运行模型递推得到的中间量"""

    y: np.ndarray  # x - μ
    w: np.ndarray  # 分数差分后的 y
    eps: np.ndarray
    sigma2: np.ndarray


# ---------------------------------------------------------------------------
# 递推
# ---------------------------------------------------------------------------


def arma_residuals(w: np.ndarray, phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Φ(L) w_t = Θ(L) ε_t 求 ε，样本前值取 0"""
    b = np.concatenate(([1.0], -np.asarray(phi, dtype=float)))
    a = np.concatenate(([1.0], np.asarray(theta, dtype=float)))
    return lfilter(b, a, w)


def garch_variance(
    eps: np.ndarray, omega: float, alpha: np.ndarray, beta: np.ndarray
) -> np.ndarray:
    """
    GARCH 条件方差路径，样本前的 ε² 与 σ² 取 ε² 的样本均值
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    e2 = eps**2
    backcast = float(np.mean(e2)) if len(e2) else omega
    level = omega / (1.0 - np.sum(beta))
    # 对 s_t = σ²_t - level 做线性滤波
    b = np.concatenate(([0.0], alpha)) if len(alpha) else np.array([0.0])
    a = np.concatenate(([1.0], -beta))
    zi = lfiltic(
        b,
        a,
        y=np.full(len(beta), backcast - level),
        x=np.full(len(alpha), backcast) if len(alpha) else None,
    )
    if len(zi) == 0:
        s = lfilter(b, a, e2)
    else:
        s, _ = lfilter(b, a, e2, zi=zi)
    return np.maximum(s + level, VARIANCE_FLOOR)


def run_filter(fit: MarginalFit, series: ArrayLike) -> FilterState:
    """用已估计的系数在给定序列上运行均值与方差递推"""
    return _run_filter(
        np.asarray(series, dtype=float),
        fit.mu,
        fit.phi,
        fit.theta,
        fit.d,
        fit.omega,
        fit.alpha,
        fit.beta,
        fit.truncation,
    )


def _run_filter(
    x: np.ndarray,
    mu: float,
    phi: np.ndarray,
    theta: np.ndarray,
    d: float,
    omega: float,
    alpha: np.ndarray,
    beta: np.ndarray,
    truncation: int,
) -> FilterState:
    y = x - mu
    w = frac_diff(y, d, truncation) if d != 0.0 else y
    eps = arma_residuals(w, phi, theta)
    sigma2 = garch_variance(eps, omega, alpha, beta)
    return FilterState(y=y, w=w, eps=eps, sigma2=sigma2)


# ---------------------------------------------------------------------------
# 参数变换
# ---------------------------------------------------------------------------


class _ParamCodec:
    """无约束向量与模型系数之间的映射"""

    def __init__(self, order: MarginalOrder):
        self.order = order

    def decode(self, raw: np.ndarray) -> dict[str, Any]:
        o = self.order
        i = 0
        mu = float(raw[i])
        i += 1
        phi = np.tanh(raw[i : i + o.p])
        i += o.p
        theta = np.tanh(raw[i : i + o.q])
        i += o.q
        d = 0.0
        if o.use_frac_d:
            d = 0.5 * float(np.tanh(raw[i]))
            i += 1
        omega = float(np.exp(np.clip(raw[i], -50.0, 50.0)))
        i += 1
        # α、β 联合映射，保证和小于 1
        g = np.exp(np.clip(raw[i : i + o.a + o.b], -30.0, 30.0))
        garch = g / (1.0 + np.sum(g))
        alpha, beta = garch[: o.a], garch[o.a :]
        i += o.a + o.b
        nu = 2.0 + float(np.exp(np.clip(raw[i], -5.0, 6.0)))
        xi = float(np.exp(np.clip(raw[i + 1], -2.5, 2.5)))
        return {
            "mu": mu,
            "phi": phi,
            "theta": theta,
            "d": d,
            "omega": omega,
            "alpha": alpha,
            "beta": beta,
            "nu": nu,
            "xi_skew": xi,
        }

    def encode(self, values: dict[str, Any]) -> np.ndarray:
        o = self.order
        parts: list[np.ndarray] = [np.array([values["mu"]])]
        parts.append(np.arctanh(np.clip(values["phi"], -0.99, 0.99)))
        parts.append(np.arctanh(np.clip(values["theta"], -0.99, 0.99)))
        if o.use_frac_d:
            parts.append(
                np.array([np.arctanh(np.clip(2.0 * values["d"], -0.99, 0.99))])
            )
        parts.append(np.array([np.log(values["omega"])]))
        garch = np.concatenate((values["alpha"], values["beta"]))
        parts.append(np.log(garch / (1.0 - np.sum(garch))))
        parts.append(np.array([np.log(values["nu"] - 2.0), np.log(values["xi_skew"])]))
        return np.concatenate(parts)


def _starting_values(x: np.ndarray, order: MarginalOrder) -> dict[str, Any]:
    """矩估计起点，ω 用方差目标法"""
    var = float(np.var(x))
    alpha_total = ALPHA0 if order.b > 0 else 0.5
    beta_total = BETA0 if order.a > 0 else 0.5
    alpha = np.full(order.a, alpha_total / max(order.a, 1))
    beta = np.full(order.b, beta_total / max(order.b, 1))
    persistence = float(np.sum(alpha) + np.sum(beta))
    return {
        "mu": float(np.mean(x)),
        "phi": np.zeros(order.p),
        "theta": np.zeros(order.q),
        "d": 0.0,
        "omega": max(var * (1.0 - persistence), 1e-8),
        "alpha": alpha,
        "beta": beta,
        "nu": NU0,
        "xi_skew": 1.0,
    }


def _loglik(
    values: dict[str, Any], x: np.ndarray, truncation: int
) -> tuple[float, FilterState]:
    state = _run_filter(
        x,
        values["mu"],
        values["phi"],
        values["theta"],
        values["d"],
        values["omega"],
        values["alpha"],
        values["beta"],
        truncation,
    )
    z = state.eps / np.sqrt(state.sigma2)
    ll = skew_t.logpdf(z, values["nu"], values["xi_skew"]) - 0.5 * np.log(state.sigma2)
    return float(np.sum(ll)), state


# ---------------------------------------------------------------------------
# 估计
# ---------------------------------------------------------------------------


def fit_marginal(
    series: ArrayLike,
    order: MarginalOrder,
    optimizer: OptimizerConfig | None = None,
    truncation: int = DEFAULT_TRUNCATION,
    seed: int = 0,
    name: str = "",
) -> MarginalFit:
    """
    联合极大似然估计 ARFIMA-GARCH-sstd 模型

    Args:
        series: 指标序列
        order: 模型阶数
        optimizer: 优化器设置，默认 MARGINAL_OPTIMIZER
        truncation: 分数差分截断项数
        seed: 重启扰动的随机种子
        name: 序列名，仅用于日志和错误信息

    Returns:
        MarginalFit

    Raises:
        MarginalFitError: 所有起点都无法得到有限似然
    """
    x = np.asarray(series, dtype=float)
    optimizer = optimizer or MARGINAL_OPTIMIZER
    if len(x) < MIN_RELIABLE_LENGTH:
        logger.warning(
            f"序列 {name or '<unnamed>'} 长度 {len(x)} < "
            f"{MIN_RELIABLE_LENGTH}，估计可能不可靠"
        )
    if len(x) <= order.n_params or not np.all(np.isfinite(x)):
        raise MarginalFitError(
            f"cannot fit {order.label}: {len(x)} observations for {order.n_params} "
            "parameters",
            series=name,
        )

    codec = _ParamCodec(order)
    x0 = codec.encode(_starting_values(x, order))
    rng = substream(seed, order.p, order.q, int(order.use_frac_d), order.a, order.b)
    n_restarts = max(optimizer.restarts, 1) - 1
    starts = [x0] + [
        x0 + rng.normal(scale=0.3, size=x0.size) for _ in range(n_restarts)
    ]

    def objective(raw: np.ndarray) -> float:
        return -_loglik(codec.decode(raw), x, truncation)[0]

    outcome = minimize_with_restarts(objective, starts, optimizer)
    if not outcome.finite:
        raise MarginalFitError(
            f"{order.label} did not converge for series '{name}' after "
            f"{optimizer.restarts} restarts: " + "; ".join(outcome.failures),
            series=name,
        )
    if not outcome.converged:
        logger.warning(
            f"{name or '<unnamed>'} {order.label} 优化未收敛，使用最优可行点"
        )

    values = codec.decode(outcome.x)
    if np.sum(values["alpha"]) + np.sum(values["beta"]) >= 1.0:
        raise MarginalFitError(
            f"{order.label} violates covariance stationarity for series '{name}'",
            series=name,
        )
    loglik, state = _loglik(values, x, truncation)
    sigma = np.sqrt(state.sigma2)
    return MarginalFit(
        order=order,
        mu=values["mu"],
        phi=np.asarray(values["phi"], dtype=float),
        theta=np.asarray(values["theta"], dtype=float),
        d=values["d"],
        omega=values["omega"],
        alpha=np.asarray(values["alpha"], dtype=float),
        beta=np.asarray(values["beta"], dtype=float),
        nu=values["nu"],
        xi_skew=values["xi_skew"],
        loglik=loglik,
        aic=2.0 * order.n_params - 2.0 * loglik,
        sigma=sigma,
        z=state.eps / sigma,
        truncation=truncation,
        converged=outcome.converged,
        name=name,
    )
