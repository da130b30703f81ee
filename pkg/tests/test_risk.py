"""VaR、Kupiec 检验与滚动回测测试"""

import numpy as np
import pandas as pd
import pytest

from gas_vine.core.errors import BacktestError, SimulationError
from gas_vine.core.models import IndicatorPanel, VaRSeries, WeightVector
from gas_vine.marginals import MarginalOrder, inverse_pit, reconstruct_returns
from gas_vine.risk import (
    gdp_weights,
    kupiec,
    loss_metrics,
    portfolio_aggregate,
    run_backtest,
    summarize,
    var_quantile,
)
from gas_vine.utils.rng import derive_seed
from gas_vine.vine import simulate

from .conftest import make_fit, simulate_garch, static_gaussian_vine

LENGTH = 300


def var_series(var, realized, alpha=0.95) -> VaRSeries:
    dates = pd.bdate_range("2020-01-01", periods=len(var))
    return VaRSeries(alpha=alpha, dates=dates, var=var, realized=realized)


@pytest.fixture
def backtest_inputs():
    """两个 GARCH 序列、按真实系数构造的边缘模型与静态 Gaussian Vine"""
    x = np.column_stack(
        [simulate_garch(LENGTH, seed=1), simulate_garch(LENGTH, seed=2)]
    )
    data = IndicatorPanel(
        dates=pd.bdate_range("2019-01-01", periods=LENGTH),
        series={"A": x[:, 0], "B": x[:, 1]},
    )
    marginals = [
        make_fit(x[:, 0], MarginalOrder(0, 0), mu=2e-4, name="A"),
        make_fit(x[:, 1], MarginalOrder(0, 0), mu=2e-4, name="B"),
    ]
    fitted = static_gaussian_vine(2, [(0, 1, (), 0.5)], names=["A", "B"])
    return fitted, marginals, data


class TestVarQuantile:
    """蒙特卡洛 VaR 分位数测试"""

    def test_order_statistic(self):
        """1..1000 的 95% VaR 为第 950 个值"""
        draws = np.random.default_rng(0).permutation(np.arange(1, 1001, dtype=float))
        assert var_quantile(draws, 0.95) == 950.0
        assert var_quantile(draws, 0.999) == 999.0
        assert var_quantile(draws, 0.0001) == 1.0

    def test_invalid_inputs(self):
        """空样本或 alpha 越界时报错"""
        with pytest.raises(BacktestError):
            var_quantile([], 0.95)
        with pytest.raises(BacktestError):
            var_quantile([1.0, 2.0], 1.0)


class TestKupiec:
    """Kupiec 检验测试"""

    def test_known_values(self):
        """已知的似然比统计量"""
        assert kupiec(8, 400, 0.95).LR == pytest.approx(9.7144, abs=1e-3)
        result = kupiec(2, 400, 0.99)
        assert result.LR == pytest.approx(1.2375, abs=1e-3)
        assert result.p_value == pytest.approx(0.266, abs=1e-3)
        assert kupiec(2, 400, 0.995).LR == pytest.approx(0.0, abs=1e-12)

    def test_boundary_counts(self):
        """N = 0 与 N = T 时统计量有限"""
        zero = kupiec(0, 400, 0.95)
        assert zero.LR == pytest.approx(-2 * 400 * np.log(0.95))
        assert np.isfinite(kupiec(400, 400, 0.95).LR)

    def test_summary(self):
        """汇总字段"""
        row = kupiec(8, 400, 0.95).to_summary()
        assert row["fail_times"] == 8
        assert row["fail_rate"] == pytest.approx(0.02)

    def test_invalid_counts(self):
        """失败次数越界时报错"""
        with pytest.raises(BacktestError):
            kupiec(5, 4, 0.95)
        with pytest.raises(BacktestError):
            kupiec(0, 0, 0.95)


class TestLossMetrics:
    """损失指标测试"""

    def test_definitions(self):
        """mean_excess、lopez 与两种 MAD"""
        series = var_series([2.0, 2.0, 2.0, 2.0], [1.0, 2.0, 3.0, 4.0])
        assert series.n_exceed == 2
        default = loss_metrics(series)
        assert default.loss == pytest.approx(1.5)
        assert default.mad == pytest.approx(0.4)
        assert default.formulas["loss"].startswith("loss =")
        lopez = loss_metrics(series, loss="lopez", mad="absolute")
        assert lopez.loss == pytest.approx(1.75)
        assert lopez.mad == pytest.approx(1.0)

    def test_no_exceedances(self):
        """没有失败时 loss 为 0 并标记"""
        metrics = loss_metrics(var_series([5.0, 5.0], [1.0, 2.0]))
        assert metrics.loss == 0.0
        assert metrics.no_exceedances

    def test_unknown_definition(self):
        """未知定义报错"""
        with pytest.raises(BacktestError):
            loss_metrics(var_series([1.0], [1.0]), loss="median")


class TestWeights:
    """组合权重与聚合测试"""

    def test_gdp_weights(self):
        """按 GDP 占比分配"""
        weights = gdp_weights([1.0, 3.0], ["A", "B"])
        np.testing.assert_allclose(weights.weights, [0.25, 0.75])
        assert weights.names == ["A", "B"]

    def test_weights_sum_to_one(self):
        """舍入误差不影响和为 1"""
        weights = gdp_weights([0.1, 0.2, 0.3, 0.7, 1.1, 2.9])
        assert abs(weights.weights.sum() - 1.0) <= 1e-12

    @pytest.mark.parametrize("gdp", [[], [1.0, 0.0], [2.0, -1.0], [np.nan, 1.0]])
    def test_invalid_gdp(self, gdp):
        """非正或缺失的 GDP 报错"""
        with pytest.raises(BacktestError):
            gdp_weights(gdp)

    def test_portfolio_aggregate(self):
        """组合值为加权和"""
        draws = np.array([[1.0, 3.0], [2.0, -2.0]])
        out = portfolio_aggregate(draws, WeightVector(np.array([0.25, 0.75])))
        np.testing.assert_allclose(out, [2.5, -1.0])
        with pytest.raises(BacktestError):
            portfolio_aggregate(np.ones((3, 3)), WeightVector.equal(["A", "B"]))


class TestRunBacktest:
    """滚动回测测试"""

    def test_series_layout(self, backtest_inputs):
        """每个置信水平一个序列，日期与实际值取自窗口"""
        fitted, marginals, data = backtest_inputs
        series = run_backtest(
            fitted, marginals, data, window=40, n_sims=200, alphas=(0.9, 0.99), seed=3
        )
        assert [s.alpha for s in series] == [0.9, 0.99]
        for s in series:
            assert len(s) == 40
            assert s.dates.equals(data.dates[-40:])
            np.testing.assert_allclose(s.realized, data.matrix()[-40:].mean(axis=1))
        assert np.all(series[1].var >= series[0].var)
        assert fitted.n_obs == LENGTH

    def test_single_date_forecast(self, backtest_inputs):
        """最后一个日期的 VaR 与逐步手工计算一致"""
        fitted, marginals, data = backtest_inputs
        series = run_backtest(
            fitted, marginals, data, window=5, n_sims=300, alphas=(0.95,), seed=7
        )
        t = LENGTH - 1
        x = data.matrix()
        u = simulate(fitted, t, 300, derive_seed(7, t))
        draws = np.column_stack(
            [
                reconstruct_returns(
                    fit, inverse_pit(u.column(i), fit, "parametric"), x[:t, i]
                )
                for i, fit in enumerate(marginals)
            ]
        )
        expected = var_quantile(draws.mean(axis=1), 0.95)
        assert series[0].var[-1] == pytest.approx(expected, rel=1e-12)

    def test_reproducible(self, backtest_inputs):
        """同一种子结果相同"""
        fitted, marginals, data = backtest_inputs
        args = dict(window=20, n_sims=150, alphas=(0.95,), seed=11)
        first = run_backtest(fitted, marginals, data, **args)[0].var
        second = run_backtest(fitted, marginals, data, **args)[0].var
        np.testing.assert_array_equal(first, second)

    def test_gdp_weighted_realized(self, backtest_inputs):
        """实际组合值使用给定权重"""
        fitted, marginals, data = backtest_inputs
        weights = gdp_weights([1.0, 3.0], data.names)
        series = run_backtest(
            fitted,
            marginals,
            data,
            window=10,
            n_sims=100,
            alphas=(0.95,),
            weights=weights,
        )
        np.testing.assert_allclose(
            series[0].realized, data.matrix()[-10:] @ [0.25, 0.75]
        )

    def test_refit(self, backtest_inputs):
        """按间隔重估 Vine 时仍输出完整序列"""
        fitted, marginals, data = backtest_inputs
        series = run_backtest(
            fitted,
            marginals,
            data,
            window=30,
            n_sims=100,
            alphas=(0.95,),
            refit_every=15,
        )
        assert len(series[0]) == 30
        assert np.isfinite(series[0].var).all()

    def test_short_window_warns(self, backtest_inputs, log_messages):
        """窗口短于 250 时警告"""
        fitted, marginals, data = backtest_inputs
        run_backtest(fitted, marginals, data, window=5, n_sims=100, alphas=(0.95,))
        assert any("250" in m for m in log_messages)

    def test_window_too_long(self, backtest_inputs):
        """窗口没有留出历史时报错"""
        fitted, marginals, data = backtest_inputs
        with pytest.raises(BacktestError):
            run_backtest(fitted, marginals, data, window=LENGTH, n_sims=100)

    def test_series_mismatch(self, backtest_inputs):
        """Vine 与数据的序列名不一致时报错"""
        fitted, marginals, data = backtest_inputs
        fitted.names = ["A", "C"]
        with pytest.raises(BacktestError):
            run_backtest(fitted, marginals, data, window=10, n_sims=100)

    def test_failure_reports_date(self, backtest_inputs, monkeypatch):
        """某个日期模拟失败时错误信息包含日期"""
        fitted, marginals, data = backtest_inputs

        def broken(*args, **kwargs):
            raise SimulationError("inverse h-function failed")

        monkeypatch.setattr("gas_vine.risk.backtest.simulate", broken)
        with pytest.raises(BacktestError) as info:
            run_backtest(fitted, marginals, data, window=10, n_sims=100)
        first_date = str(data.dates[-10].date())
        assert first_date in str(info.value)
        assert info.value.context["date"] == first_date

    @pytest.mark.slow
    def test_threads_do_not_change_results(self, backtest_inputs):
        """并行回测与串行结果相同"""
        fitted, marginals, data = backtest_inputs
        args = dict(window=20, n_sims=150, alphas=(0.95, 0.99), seed=5)
        serial = run_backtest(fitted, marginals, data, threads=1, **args)
        parallel = run_backtest(fitted, marginals, data, threads=2, **args)
        for a, b in zip(serial, parallel):
            np.testing.assert_array_equal(a.var, b.var)


class TestSummarize:
    """回测汇总测试"""

    def test_rows(self):
        """汇总表包含 Kupiec 与损失指标"""
        series = [
            var_series([2.0] * 4, [1.0, 2.0, 3.0, 4.0], alpha=0.9),
            var_series([5.0] * 4, [1.0, 2.0, 3.0, 4.0], alpha=0.99),
        ]
        report = summarize(series, WeightVector.equal(["A", "B"]), settings={"seed": 1})
        rows = report.summary_rows()
        assert [r["alpha"] for r in rows] == [0.9, 0.99]
        assert rows[0]["fail_times"] == 2
        assert rows[0]["loss"] == pytest.approx(1.5)
        assert rows[1]["loss"] == 0.0
        assert report.metrics[1].no_exceedances
        assert report.realized_summary() == {"min": 1.0, "max": 4.0, "mean": 2.5}
        assert report.settings == {"seed": 1}
