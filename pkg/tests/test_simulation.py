"""时变 Vine 模拟测试"""

import numpy as np
import pytest
from scipy import stats

from gas_vine.copula import Driver, Family, GasCoef, PairDynamics
from gas_vine.core.errors import SimulationError
from gas_vine.vine import draw_uniforms, filter_paths, simulate, simulate_path

from .conftest import static_gaussian_vine

DVINE3 = [(0, 1, (), 0.8), (1, 2, (), 0.7), (0, 2, (1,), 0.3)]

REFERENCE5 = [
    (0, 1, (), 0.7),
    (1, 2, (), 0.6),
    (2, 3, (), -0.5),
    (2, 4, (), 0.4),
    (0, 2, (1,), 0.3),
    (1, 3, (2,), 0.2),
    (3, 4, (2,), -0.2),
    (0, 3, (1, 2), 0.1),
    (1, 4, (2, 3), 0.15),
    (0, 4, (1, 2, 3), 0.05),
]


def normal_corr(data: np.ndarray) -> np.ndarray:
    return np.corrcoef(stats.norm.ppf(data), rowvar=False)


class TestDrawUniforms:
    """独立均匀数生成测试"""

    def test_shape_and_range(self):
        """形状与取值范围"""
        w = draw_uniforms(3000, 4, seed=1)
        assert w.shape == (3000, 4)
        assert ((w > 0) & (w < 1)).all()

    def test_prefix_stable(self):
        """同一种子下少量抽样是大量抽样的前缀"""
        small = draw_uniforms(10, 3, seed=5)
        large = draw_uniforms(2000, 3, seed=5)
        np.testing.assert_array_equal(small, large[:10])

    def test_seed_changes_draws(self):
        """不同种子得到不同的数"""
        assert not np.array_equal(
            draw_uniforms(50, 2, seed=1), draw_uniforms(50, 2, seed=2)
        )


class TestSimulate:
    """单步联合抽样测试"""

    def test_independence_vine_passes_uniforms_through(self):
        """全部 ρ = 0 时样本等于输入的独立均匀数"""
        fitted = static_gaussian_vine(3, [(i, j, c, 0.0) for i, j, c, _ in DVINE3])
        sample = simulate(fitted, 0, 500, seed=9)
        np.testing.assert_allclose(
            sample.data, draw_uniforms(500, 3, seed=9), atol=1e-9
        )

    def test_bivariate_kendall_tau(self):
        """二元 Gaussian 样本的 τ = 2/π · arcsin ρ"""
        fitted = static_gaussian_vine(2, [(0, 1, (), 0.7)])
        sample = simulate(fitted, 0, 20000, seed=3)
        tau = stats.kendalltau(sample.column(0), sample.column(1))[0]
        assert tau == pytest.approx(2.0 / np.pi * np.arcsin(0.7), abs=0.02)

    def test_dvine_implied_correlation(self):
        """3 维 D-Vine 的正态得分相关由偏相关递推给出"""
        sample = simulate(static_gaussian_vine(3, DVINE3), 0, 20000, seed=4)
        corr = normal_corr(sample.data)
        implied = 0.3 * np.sqrt((1 - 0.8**2) * (1 - 0.7**2)) + 0.8 * 0.7
        assert corr[0, 1] == pytest.approx(0.8, abs=0.02)
        assert corr[1, 2] == pytest.approx(0.7, abs=0.02)
        assert corr[0, 2] == pytest.approx(implied, abs=0.02)

    def test_five_dimensional_marginals(self):
        """5 维结构的边缘分布为均匀分布，第一层相关符合设定"""
        names = ["a", "b", "c", "d", "e"]
        sample = simulate(static_gaussian_vine(5, REFERENCE5, names), 0, 5000, seed=11)
        assert sample.names == names
        assert sample.mode == "parametric"
        assert np.abs(sample.data.mean(axis=0) - 0.5).max() < 0.02
        corr = normal_corr(sample.data)
        for i, j, cond, rho in REFERENCE5:
            if not cond:
                assert corr[i, j] == pytest.approx(rho, abs=0.04)

    def test_reproducible(self):
        """同一种子结果相同"""
        fitted = static_gaussian_vine(3, DVINE3)
        first = simulate(fitted, 0, 100, seed=2).data
        np.testing.assert_array_equal(first, simulate(fitted, 0, 100, seed=2).data)
        assert not np.array_equal(first, simulate(fitted, 0, 100, seed=3).data)

    def test_path_parameters(self):
        """有滤波路径时静态 Vine 在任意时点的抽样相同"""
        fitted = static_gaussian_vine(3, DVINE3)
        filter_paths(fitted, simulate_path(fitted, 200, seed=1))
        inside = simulate(fitted, 10, 200, seed=6).data
        ahead = simulate(fitted, 200, 200, seed=6).data
        np.testing.assert_allclose(inside, ahead, rtol=1e-12)

    def test_invalid_draw_count(self):
        """抽样数非正时报错"""
        with pytest.raises(SimulationError):
            simulate(static_gaussian_vine(2, [(0, 1, (), 0.5)]), 0, 0, seed=1)

    def test_missing_parameters(self):
        """没有滤波路径时只能在样本外一步抽样"""
        with pytest.raises(SimulationError):
            simulate(static_gaussian_vine(2, [(0, 1, (), 0.5)]), 5, 10, seed=1)


class TestSimulatePath:
    """时变路径模拟测试"""

    def test_static_path_dependence(self):
        """静态 Vine 路径的 τ 符合设定"""
        panel = simulate_path(static_gaussian_vine(2, [(0, 1, (), 0.7)]), 3000, seed=8)
        assert panel.data.shape == (3000, 2)
        tau = stats.kendalltau(panel.column(0), panel.column(1))[0]
        assert tau == pytest.approx(2.0 / np.pi * np.arcsin(0.7), abs=0.04)

    def test_reproducible(self):
        """同一种子得到相同路径"""
        fitted = static_gaussian_vine(3, DVINE3)
        np.testing.assert_array_equal(
            simulate_path(fitted, 50, seed=4).data,
            simulate_path(fitted, 50, seed=4).data,
        )

    def test_gas_path_varies(self):
        """GAS 驱动的路径在重新滤波后参数随时间变化"""
        fitted = static_gaussian_vine(2, [(0, 1, (), 0.5)])
        edge = fitted.edges[0]
        state = float(Family.GAUSSIAN.link.inverse(0.5))
        edge.dynamics = PairDynamics(
            Family.GAUSSIAN, Driver.GAS, GasCoef(k=0.05 * state, A=0.1, B=0.95)
        )
        fitted.driver = Driver.GAS
        filter_paths(fitted, simulate_path(fitted, 500, seed=3))
        theta = edge.dynamics.path.theta
        assert np.ptp(theta) > 0.05
        assert np.all(np.abs(theta) < 1)
