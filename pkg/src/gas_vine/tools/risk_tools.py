"""
风险工具

VaR 回测与报告输出。
"""

from typing import Any

from ..core.artifact_store import ArtifactStore
from ..core.config import RunConfig
from ..core.errors import GasVineError
from ..core.models import WeightVector
from ..data.synth import load_gdp
from ..risk import emit_report, gdp_weights, run_backtest, summarize
from .data_tools import load_indicators
from .model_tools import fit_models, load_models


def _weights(config: RunConfig, names: list[str]) -> WeightVector:
    if config.weights == "gdp":
        return gdp_weights(load_gdp(config.gdp_file, names), names)
    return WeightVector.equal(names)


def run_backtest_report(config: RunConfig, fit_inline: bool = False) -> dict[str, Any]:
    """
    运行 VaR 回测并写出报告

    Args:
        config: 运行配置（window、n_sims、alphas、weights、refit_every、seed 等）
        fit_inline: 为 True 时先估计模型；否则读取 fit 写出的模型文件

    Returns:
        包含汇总表、实际值概况与输出文件列表的字典
    """
    try:
        data = load_indicators(config)
        if fit_inline:
            fits, fitted = fit_models(config, data)
        elif not ArtifactStore(config.out).exists():
            return {
                "success": False,
                "message": (
                    f"no fitted model in {config.out}; run 'fit' first or pass "
                    "--fit"
                ),
            }
        else:
            fits, fitted = load_models(config, data)

        weights = _weights(config, data.names)
        series = run_backtest(
            fitted,
            fits,
            data,
            window=config.window,
            n_sims=config.n_sims,
            alphas=config.alphas,
            weights=weights,
            seed=config.seed,
            refit_every=config.refit_every,
            optimizer=config.optimizer(),
            threads=config.threads,
        )
        settings = {
            "mode": fitted.mode.value,
            "driver": fitted.driver.value,
            "pit_mode": fitted.pit_mode,
            "window": config.window,
            "n_sims": config.n_sims,
            "weights": config.weights,
            "refit_every": config.refit_every,
            "seed": config.seed,
        }
        report = summarize(series, weights, config.loss, config.mad, settings)
        files = emit_report(report, config.out)
        return {
            "success": True,
            "rows": report.summary_rows(),
            "realized": report.realized_summary(),
            "formulas": report.metrics[0].formulas if report.metrics else {},
            "files": [str(p) for p in files],
        }
    except GasVineError as e:
        return {"success": False, "message": e.message}
