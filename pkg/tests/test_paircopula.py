"""二元 Copula 族与连接函数测试"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from gas_vine.copula import (
    CORRELATION_LINK,
    GUMBEL_LINK,
    CopulaParam,
    Family,
    PairKernel,
    h_function,
    h_inverse,
    kendall_tau,
    log_density,
    score,
    tau_to_param,
)
from gas_vine.copula.families import score_step
from gas_vine.copula.links import GUMBEL_MAX, GUMBEL_MIN, RHO_MAX
from gas_vine.core.errors import CopulaDomainError

PARAMS = [
    (Family.GAUSSIAN, CopulaParam(0.6)),
    (Family.GAUSSIAN, CopulaParam(-0.4)),
    (Family.STUDENT_T, CopulaParam(0.5, 5.0)),
    (Family.GUMBEL, CopulaParam(1.8)),
    (Family.ROT_GUMBEL, CopulaParam(2.5)),
]
GRID = [(0.2, 0.3), (0.5, 0.7), (0.8, 0.4), (0.9, 0.9)]


def gumbel_cdf(u: float, v: float, theta: float) -> float:
    a = (-math.log(u)) ** theta + (-math.log(v)) ** theta
    return math.exp(-(a ** (1.0 / theta)))


def pairwise_tau_b(x: np.ndarray, y: np.ndarray) -> float:
    """逐对比较的 τ_b：(同序 - 异序) / sqrt((n0 - n1)(n0 - n2))"""
    upper = np.triu_indices(len(x), k=1)
    dx = np.sign(x[:, None] - x[None, :])[upper].astype(np.int64)
    dy = np.sign(y[:, None] - y[None, :])[upper].astype(np.int64)
    n0 = len(dx)
    x_ties = int(np.sum(dx == 0))
    y_ties = int(np.sum(dy == 0))
    return int(np.sum(dx * dy)) / math.sqrt(n0 - x_ties) / math.sqrt(n0 - y_ties)


class TestFamily:
    """族定义测试"""

    def test_parse_aliases(self):
        """名称解析忽略大小写与分隔符"""
        assert Family.parse("gaussian") is Family.GAUSSIAN
        assert Family.parse("Student-t") is Family.STUDENT_T
        assert Family.parse("GUMBEL") is Family.GUMBEL
        assert Family.parse("RotGumbel180") is Family.ROT_GUMBEL

    def test_parse_unknown(self):
        """未知族名报错"""
        with pytest.raises(CopulaDomainError):
            Family.parse("Clayton")

    def test_rank_order(self):
        """优先顺序 Gaussian < StudentT < Gumbel < RotGumbel"""
        order = (Family.GAUSSIAN, Family.STUDENT_T, Family.GUMBEL, Family.ROT_GUMBEL)
        ranks = [f.rank for f in order]
        assert ranks == [0, 1, 2, 3]


class TestLogDensity:
    """对数密度测试"""

    def test_gaussian_center(self):
        """ρ = 0.5 在 (0.5, 0.5) 处为 -½ ln(1 - ρ²)"""
        value = log_density(Family.GAUSSIAN, CopulaParam(0.5), 0.5, 0.5)
        assert value == pytest.approx(0.143841, abs=1e-6)

    def test_gaussian_independence(self):
        """ρ = 0 时密度恒为 1"""
        u = np.array([0.1, 0.4, 0.9])
        np.testing.assert_allclose(
            log_density(Family.GAUSSIAN, CopulaParam(0.0), u, u[::-1]), 0.0
        )

    def test_student_t_matches_bivariate_t(self):
        """Student-t 密度等于二元 t 密度除以边缘密度"""
        rho, nu = 0.5, 5.0
        u, v = np.array([0.2, 0.5, 0.9]), np.array([0.3, 0.7, 0.95])
        x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
        joint = stats.multivariate_t(loc=[0, 0], shape=[[1, rho], [rho, 1]], df=nu)
        expected = (
            joint.logpdf(np.column_stack((x, y)))
            - stats.t.logpdf(x, nu)
            - stats.t.logpdf(y, nu)
        )
        np.testing.assert_allclose(
            log_density(Family.STUDENT_T, CopulaParam(rho, nu), u, v),
            expected,
            rtol=1e-9,
        )

    @pytest.mark.parametrize("u, v", GRID)
    def test_gumbel_mixed_partial(self, u, v):
        """Gumbel 密度等于 Copula 函数的混合偏导"""
        theta, h = 1.8, 1e-4
        numeric = (
            gumbel_cdf(u + h, v + h, theta)
            - gumbel_cdf(u + h, v - h, theta)
            - gumbel_cdf(u - h, v + h, theta)
            + gumbel_cdf(u - h, v - h, theta)
        ) / (4 * h * h)
        value = log_density(Family.GUMBEL, CopulaParam(theta), u, v)
        assert math.exp(value) == pytest.approx(numeric, rel=1e-4)

    def test_rotation(self):
        """旋转 180° 的 Gumbel 在 (u, v) 处等于 Gumbel 在 (1-u, 1-v) 处"""
        u, v = np.array([0.1, 0.6]), np.array([0.2, 0.3])
        rot = log_density(Family.ROT_GUMBEL, CopulaParam(2.0), u, v)
        base = log_density(Family.GUMBEL, CopulaParam(2.0), 1 - u, 1 - v)
        np.testing.assert_allclose(rot, base, rtol=1e-12)

    def test_time_varying_theta(self):
        """theta 可以是与数据等长的路径"""
        u, v = np.array([0.3, 0.6]), np.array([0.4, 0.8])
        path = log_density(Family.GAUSSIAN, CopulaParam(np.array([0.2, 0.7])), u, v)
        assert path[0] == pytest.approx(
            log_density(Family.GAUSSIAN, CopulaParam(0.2), 0.3, 0.4)
        )
        assert path[1] == pytest.approx(
            log_density(Family.GAUSSIAN, CopulaParam(0.7), 0.6, 0.8)
        )

    def test_boundary_values_are_finite(self):
        """边界上的伪观测截断后密度有限"""
        value = log_density(
            Family.GUMBEL, CopulaParam(3.0), np.array([0.0, 1.0]), np.array([1.0, 0.0])
        )
        assert np.all(np.isfinite(value))

    @pytest.mark.parametrize(
        "family, param",
        [
            (Family.GAUSSIAN, CopulaParam(1.0)),
            (Family.GUMBEL, CopulaParam(0.9)),
            (Family.STUDENT_T, CopulaParam(0.3)),
            (Family.STUDENT_T, CopulaParam(0.3, 2.0)),
            (Family.GAUSSIAN, CopulaParam(0.3, 5.0)),
        ],
    )
    def test_domain_errors(self, family, param):
        """参数越界报错"""
        with pytest.raises(CopulaDomainError):
            log_density(family, param, 0.5, 0.5)


class TestHFunction:
    """h 函数及其逆测试"""

    @pytest.mark.parametrize("family, param", PARAMS)
    @pytest.mark.parametrize("x, v", GRID)
    def test_derivative_is_density(self, family, param, x, v):
        """∂h(x | v)/∂x 等于 Copula 密度"""
        step = 1e-6
        upper = h_function(family, param, x + step, v)
        lower = h_function(family, param, x - step, v)
        slope = (upper - lower) / (2 * step)
        assert slope == pytest.approx(
            math.exp(log_density(family, param, x, v)), rel=1e-4
        )

    @pytest.mark.parametrize("family, param", PARAMS)
    def test_monotone(self, family, param):
        """h 对 x 严格递增"""
        x = np.linspace(0.01, 0.99, 50)
        h = h_function(family, param, x, np.full(50, 0.4))
        assert np.all(np.diff(h) > 0)

    def test_gumbel_h_matches_partial(self):
        """Gumbel h 函数等于 ∂C/∂v"""
        x, v, theta, step = 0.35, 0.6, 2.2, 1e-6
        upper = gumbel_cdf(x, v + step, theta)
        lower = gumbel_cdf(x, v - step, theta)
        numeric = (upper - lower) / (2 * step)
        assert h_function(Family.GUMBEL, CopulaParam(theta), x, v) == pytest.approx(
            numeric, rel=1e-6
        )

    @pytest.mark.parametrize("family, param", PARAMS)
    def test_inverse(self, family, param):
        """h_inverse(h(x | v) | v) = x"""
        rng = np.random.default_rng(5)
        x = rng.uniform(0.01, 0.99, 200)
        v = rng.uniform(0.01, 0.99, 200)
        w = h_function(family, param, x, v)
        np.testing.assert_allclose(h_inverse(family, param, w, v), x, atol=1e-8)

    @pytest.mark.parametrize("family, param", PARAMS)
    @pytest.mark.parametrize("v", [0.1, 0.5, 0.9])
    def test_density_integrates_to_one(self, family, param, v):
        """固定 v 时 ∫ c(u, v) du = 1，且 h(x → 1 | v) → 1"""
        total, _ = integrate.quad(
            lambda u: math.exp(log_density(family, param, u, v)),
            0.0,
            1.0,
            points=[v],
            limit=200,
        )
        assert total == pytest.approx(1.0, abs=2e-3)
        assert h_function(family, param, 1.0 - 1e-9, v) > 1.0 - 1e-5
        assert h_function(family, param, 1e-9, v) < 1e-5

    def test_gumbel_inverse_extreme(self):
        """极端 w 与大 θ 时仍收敛"""
        w = np.array([1e-8, 1e-6, 0.5, 1 - 1e-6])
        v = np.array([0.5, 0.01, 0.99, 0.3])
        x = h_inverse(Family.GUMBEL, CopulaParam(15.0), w, v)
        assert np.all((x > 0) & (x < 1))
        np.testing.assert_allclose(
            h_function(Family.GUMBEL, CopulaParam(15.0), x, v), w, atol=1e-7
        )


class TestScore:
    """参数得分测试"""

    @pytest.mark.parametrize("rho", [-0.7, 0.0, 0.4, 0.9])
    def test_gaussian_analytic(self, rho):
        """Gaussian 得分与解析导数一致"""
        u, v = np.array([0.2, 0.6, 0.95]), np.array([0.4, 0.1, 0.9])
        x, y = stats.norm.ppf(u), stats.norm.ppf(v)
        s, p = x * x + y * y, x * y
        r2 = 1 - rho * rho
        expected = rho / r2 - (rho * s - p * (1 + rho * rho)) / r2**2
        np.testing.assert_allclose(
            score(Family.GAUSSIAN, CopulaParam(rho), u, v), expected, rtol=1e-5
        )

    def test_one_sided_at_gumbel_boundary(self):
        """θ = 1 处使用单侧差分"""
        value = score(
            Family.GUMBEL, CopulaParam(1.0), np.array([0.3, 0.8]), np.array([0.4, 0.7])
        )
        assert np.all(np.isfinite(value))

    @pytest.mark.parametrize("family, param", PARAMS)
    def test_stable_under_finer_step(self, family, param):
        """默认步长的得分与 10 倍细步长的结果相差不超过 1e-4"""
        rng = np.random.default_rng(21)
        u = rng.uniform(0.01, 0.99, 100)
        v = rng.uniform(0.01, 0.99, 100)
        fine = score_step(param.theta) / 10
        np.testing.assert_allclose(
            score(family, param, u, v),
            score(family, param, u, v, step=fine),
            rtol=0,
            atol=1e-4,
        )

    def test_kernel_matches_vector_functions(self):
        """标量内核与向量化函数一致"""
        u, v = np.array([0.2, 0.6, 0.95]), np.array([0.4, 0.1, 0.9])
        for family, param in PARAMS:
            kernel = PairKernel(family, u, v, param.nu)
            values = log_density(family, param, u, v)
            grads = score(family, param, u, v)
            for i in range(3):
                ll, grad = kernel.value_and_score(i, param.theta)
                assert ll == pytest.approx(values[i], rel=1e-10)
                assert grad == pytest.approx(grads[i], rel=1e-6, abs=1e-7)
            assert kernel.total(np.full(3, param.theta)) == pytest.approx(
                float(np.sum(values))
            )


class TestKendallTau:
    """Kendall τ 与参数换算测试"""

    def test_matches_scipy(self):
        """与 scipy τ_b 一致"""
        rng = np.random.default_rng(0)
        x = rng.standard_normal(100)
        y = x + rng.standard_normal(100)
        assert kendall_tau(x, y) == pytest.approx(stats.kendalltau(x, y)[0])

    def test_matches_pairwise_count_with_ties(self):
        """含结值的样本上与逐对计数的 τ_b 一致"""
        rng = np.random.default_rng(22)
        for _ in range(50):
            x = np.round(rng.standard_normal(200), 1)
            y = np.round(0.5 * x + rng.standard_normal(200), 1)
            assert kendall_tau(x, y) == pytest.approx(
                pairwise_tau_b(x, y), rel=0, abs=1e-12
            )

    def test_all_tied(self):
        """全部为结值时报错"""
        with pytest.raises(CopulaDomainError):
            kendall_tau(np.ones(10), np.arange(10.0))

    def test_tau_to_param(self):
        """τ = 0.5 时 ρ = sin(π/4)，Gumbel θ = 2"""
        assert tau_to_param(Family.GAUSSIAN, 0.5).theta == pytest.approx(
            0.70711, abs=1e-5
        )
        assert tau_to_param(Family.GUMBEL, 0.5).theta == pytest.approx(2.0)
        assert tau_to_param(Family.ROT_GUMBEL, -0.5).theta == pytest.approx(2.0)
        assert tau_to_param(Family.STUDENT_T, 0.2).nu == 8.0
        assert tau_to_param(Family.STUDENT_T, 0.2, nu=4.0).nu == 4.0

    def test_gumbel_negative_tau(self):
        """Gumbel 不能表示负相关"""
        with pytest.raises(CopulaDomainError):
            tau_to_param(Family.GUMBEL, -0.3)


class TestLinks:
    """连接函数测试"""

    def test_correlation_link(self):
        """Λ(x) = tanh(x/2)，逆映射还原"""
        x = np.array([-3.0, 0.0, 1.5])
        np.testing.assert_allclose(CORRELATION_LINK.forward(x), np.tanh(x / 2))
        np.testing.assert_allclose(
            CORRELATION_LINK.inverse(CORRELATION_LINK.forward(x)), x
        )

    def test_gumbel_link(self):
        """Λ(x) = 1 + eˣ，逆映射还原"""
        x = np.array([-2.0, 0.0, 1.0])
        np.testing.assert_allclose(GUMBEL_LINK.forward(x), 1 + np.exp(x))
        np.testing.assert_allclose(GUMBEL_LINK.inverse(GUMBEL_LINK.forward(x)), x)

    def test_clamping(self):
        """结果截断在界内"""
        assert float(CORRELATION_LINK.forward(200.0)) == RHO_MAX
        assert float(CORRELATION_LINK.forward(-200.0)) == -RHO_MAX
        assert float(GUMBEL_LINK.forward(100.0)) == GUMBEL_MAX
        assert float(GUMBEL_LINK.forward(-100.0)) == GUMBEL_MIN

    def test_derivative(self):
        """导数与差分一致"""
        for link in (CORRELATION_LINK, GUMBEL_LINK):
            x, h = 0.7, 1e-6
            upper = float(link.forward(x + h))
            lower = float(link.forward(x - h))
            numeric = (upper - lower) / (2 * h)
            assert float(link.derivative(x)) == pytest.approx(numeric, rel=1e-6)
            assert link.derivative_scalar(x) == pytest.approx(numeric, rel=1e-6)

    def test_saturation_flag(self):
        """超出饱和阈值时标记"""
        assert CORRELATION_LINK.forward_scalar(200.0) == (RHO_MAX, True)
        value, sat = CORRELATION_LINK.forward_scalar(1.0)
        assert not sat and value == pytest.approx(math.tanh(0.5))
        assert GUMBEL_LINK.forward_scalar(100.0)[1]
        assert bool(CORRELATION_LINK.saturated(60.0))
        assert not bool(GUMBEL_LINK.saturated(0.0))
