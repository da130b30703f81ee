"""测试公共夹具"""

from contextlib import suppress
from pathlib import Path

import numpy as np
import pytest
from loguru import logger
from scipy import stats

from gas_vine.copula import Driver, Family, PairDynamics, StaticCoef
from gas_vine.marginals import MarginalFit, MarginalOrder, run_filter
from gas_vine.vine import FittedTVVine, structure_from_edges


@pytest.fixture
def log_messages():
    """收集 loguru 输出的消息列表"""
    messages: list[str] = []
    handler_id = logger.add(
        lambda m: messages.append(m.record["message"]), level="DEBUG"
    )
    yield messages
    # CLI 的 setup_logging 会调用 logger.remove()，此时 handler 可能已不存在
    with suppress(ValueError):
        logger.remove(handler_id)


def gaussian_pair(rho: float, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """相关系数为 rho 的 Gaussian Copula 样本"""
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + np.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
    return stats.norm.cdf(z1), stats.norm.cdf(z2)


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> Path:
    """写出简单 CSV 文件"""
    lines = [",".join(header)] + [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def simulate_garch(n: int = 800, seed: int = 7) -> np.ndarray:
    """GARCH(1,1) 模拟序列（t 分布新息）"""
    rng = np.random.default_rng(seed)
    omega, alpha, beta = 2e-6, 0.08, 0.9
    sigma2 = omega / (1.0 - alpha - beta)
    eps = 0.0
    out = np.empty(n)
    z = rng.standard_t(6, size=n) / np.sqrt(1.5)
    for t in range(n):
        sigma2 = omega + alpha * eps**2 + beta * sigma2
        eps = np.sqrt(sigma2) * z[t]
        out[t] = 2e-4 + eps
    return out


@pytest.fixture
def garch_series():
    """长度 800 的 GARCH 序列"""
    return simulate_garch()


def static_gaussian_vine(
    n: int,
    edges: list[tuple[int, int, tuple[int, ...], float]],
    names: list[str] | None = None,
):
    """
    由 (i, j, 条件集, ρ) 构造静态 Gaussian Vine

    各边没有滤波路径，theta_next 取 ρ，可直接在 t_index = 0 处抽样。
    """
    structure = structure_from_edges(n, [(i, j, cond) for i, j, cond, _ in edges])
    for i, j, cond, rho in edges:
        structure.edge(i, j, cond).dynamics = PairDynamics(
            Family.GAUSSIAN, Driver.STATIC, StaticCoef(rho), theta_next=rho
        )
    return FittedTVVine(
        structure=structure,
        names=names or [f"V{k + 1}" for k in range(n)],
        driver=Driver.STATIC,
        families=(Family.GAUSSIAN,),
        pit_mode="parametric",
        n_obs=0,
    )


def make_fit(
    x: np.ndarray,
    order: MarginalOrder,
    mu: float = 1e-4,
    phi=(),
    theta=(),
    d: float = 0.0,
    omega: float = 2e-6,
    alpha=(0.08,),
    beta=(0.9,),
    name: str = "X",
) -> MarginalFit:
    """用给定系数构造边缘模型，残差路径由递推计算"""
    n = len(x)
    fit = MarginalFit(
        order=order,
        mu=mu,
        phi=np.array(phi, dtype=float),
        theta=np.array(theta, dtype=float),
        d=d,
        omega=omega,
        alpha=np.array(alpha, dtype=float),
        beta=np.array(beta, dtype=float),
        nu=6.0,
        xi_skew=1.0,
        loglik=0.0,
        aic=0.0,
        sigma=np.ones(n),
        z=np.zeros(n),
        name=name,
    )
    state = run_filter(fit, x)
    fit.sigma = np.sqrt(state.sigma2)
    fit.z = state.eps / fit.sigma
    return fit
