"""
模型工具

边缘模型筛选、时变 Vine 估计、结构比较与联合模拟。
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger

from ..core.artifact_store import ArtifactStore
from ..core.config import RunConfig
from ..core.errors import ArtifactError, GasVineError
from ..core.models import IndicatorPanel
from ..marginals import (
    MarginalFit,
    MarginalOrder,
    inverse_pit,
    reconstruct_returns,
    select_marginal,
)
from ..risk import uniform_panel
from ..utils.rng import derive_seed
from ..vine import (
    FittedTVVine,
    VineMode,
    filter_paths,
    fit_sequential,
    simulate,
    total_loglik,
)
from .data_tools import load_indicators


@dataclass(frozen=True)
class _SeriesJob:
    name: str
    values: np.ndarray
    grid: tuple[MarginalOrder, ...]
    truncation: int
    lags: int
    seed: int


def _fit_series(job: _SeriesJob) -> MarginalFit:
    selection = select_marginal(
        job.values,
        job.grid,
        truncation=job.truncation,
        seed=job.seed,
        name=job.name,
        lags=job.lags,
    )
    logger.info(f"{job.name}: {selection.order.label} AIC={selection.fit.aic:.6g}")
    return selection.fit


def fit_marginals(config: RunConfig, data: IndicatorPanel) -> list[MarginalFit]:
    """
    对每个序列选择阶数并拟合边缘模型

    threads > 1 时按序列并行；每个序列的随机种子由主种子派生，
    结果与线程数无关。
    """
    grid = tuple(config.order_grid())
    jobs = [
        _SeriesJob(
            name,
            data.series[name],
            grid,
            config.frac_truncation,
            config.lags,
            derive_seed(config.seed, k),
        )
        for k, name in enumerate(data.names)
    ]
    if config.threads <= 1 or len(jobs) <= 1:
        return [_fit_series(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.threads) as pool:
        return list(pool.map(_fit_series, jobs))


def _marginal_row(fit: MarginalFit) -> dict[str, Any]:
    return {
        "series": fit.name,
        "order": fit.order.label,
        "loglik": fit.loglik,
        "aic": fit.aic,
        "nu": fit.nu,
        "xi": fit.xi_skew,
        "ljung_box_p": fit.diagnostics.get("ljung_box_p", float("nan")),
        "arch_lm_p": fit.diagnostics.get("arch_lm_p", float("nan")),
    }


def _fit_vine(
    config: RunConfig, fits: list[MarginalFit], names: list[str], mode: VineMode
):
    u_panel = uniform_panel(fits, names, config.pit_mode)
    return fit_sequential(
        u_panel,
        mode=mode,
        families=config.family_list,
        driver=config.driver_kind,
        criterion=config.tree_criterion,
        optimizer=config.optimizer(),
        gamma=config.gamma,
        patton_q=config.patton_q,
        threads=config.threads,
    )


def fit_models(
    config: RunConfig, data: IndicatorPanel
) -> tuple[list[MarginalFit], FittedTVVine]:
    """拟合边缘模型与 Vine，并写出 marginals.json、vine.json 与 edges.csv"""
    fits = fit_marginals(config, data)
    fitted = _fit_vine(config, fits, data.names, config.vine_mode)
    store = ArtifactStore(config.out)
    dates = [str(d.date()) for d in data.dates]
    store.save_marginals(fits, config.pit_mode, dates)
    store.save_vine(fitted)
    path = Path(config.out) / "edges.csv"
    try:
        pd.DataFrame(fitted.edge_table()).to_csv(
            path, index=False, float_format="%.17g"
        )
    except OSError as e:
        raise ArtifactError(f"cannot write {path}: {e}", path=str(path)) from e
    return fits, fitted


def run_filter(config: RunConfig) -> dict[str, Any]:
    """
    拟合各序列的边缘模型并写出 marginals.json 与 marginal_summary.csv

    Returns:
        包含逐序列阶数、loglik、AIC、ν、ξ 与残差检验 p 值的字典
    """
    try:
        data = load_indicators(config)
        fits = fit_marginals(config, data)
        store = ArtifactStore(config.out)
        store.save_marginals(fits, config.pit_mode, [str(d.date()) for d in data.dates])
        rows = [_marginal_row(fit) for fit in fits]
        path = Path(config.out) / "marginal_summary.csv"
        pd.DataFrame(rows).to_csv(path, index=False, float_format="%.17g")
        return {"success": True, "rows": rows, "path": str(path)}
    except GasVineError as e:
        return {"success": False, "message": e.message}
    except OSError as e:
        return {"success": False, "message": f"cannot write marginal summary: {e}"}


def run_fit(config: RunConfig) -> dict[str, Any]:
    """
    完整估计：边缘模型、伪观测与时变 Vine

    Returns:
        包含逐边汇总（层、标签、族、系数、AIC）与总体似然的字典
    """
    try:
        data = load_indicators(config)
        fits, fitted = fit_models(config, data)
        return {
            "success": True,
            "mode": fitted.mode.value,
            "edges": fitted.edge_table(),
            "n_edges": len(fitted.edges),
            "copula_loglik": fitted.loglik,
            "copula_aic": fitted.aic,
            "total_loglik": total_loglik(fitted, [f.loglik for f in fits]),
            "marginals": [_marginal_row(fit) for fit in fits],
            "out": str(config.out),
        }
    except GasVineError as e:
        return {"success": False, "message": e.message}


def run_compare(config: RunConfig) -> dict[str, Any]:
    """
    在同一组伪观测上比较 R-Vine、C-Vine 与 D-Vine

    Returns:
        每种结构一行：Copula loglik、AIC 与边数
    """
    try:
        data = load_indicators(config)
        fits = fit_marginals(config, data)
        rows = []
        for mode in VineMode:
            fitted = _fit_vine(config, fits, data.names, mode)
            rows.append(
                {
                    "mode": mode.value,
                    "loglik": fitted.loglik,
                    "aic": fitted.aic,
                    "n_edges": len(fitted.edges),
                }
            )
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "compare.csv"
        pd.DataFrame(rows).to_csv(path, index=False, float_format="%.17g")
        best = min(rows, key=lambda r: r["aic"])
        return {"success": True, "rows": rows, "best": best["mode"], "path": str(path)}
    except GasVineError as e:
        return {"success": False, "message": e.message}
    except OSError as e:
        return {"success": False, "message": f"cannot write comparison: {e}"}


def load_models(
    config: RunConfig, data: IndicatorPanel
) -> tuple[list[MarginalFit], FittedTVVine]:
    """读取 fit 写出的模型并在数据上重新滤波参数路径"""
    store = ArtifactStore(config.out)
    fits, pit_mode = store.load_marginals()
    fitted = store.load_vine()
    fitted.pit_mode = pit_mode
    filter_paths(fitted, uniform_panel(fits, data.names, pit_mode))
    return fits, fitted


def run_simulate(
    config: RunConfig, n_draws: int | None = None, t_index: int | None = None
) -> dict[str, Any]:
    """
    从已估计的模型抽取联合情景

    默认在样本外第一步（t_index = 数据长度）抽样，写出 simulated_uniforms.csv
    与还原后的 simulated.csv。

    Args:
        config: 运行配置
        n_draws: 抽样数，默认 config.n_sims
        t_index: 时间下标（0 起），默认数据长度

    Returns:
        包含逐序列模拟均值与标准差的字典
    """
    try:
        data = load_indicators(config)
        fits, fitted = load_models(config, data)
        n_draws = n_draws or config.n_sims
        t = len(data) if t_index is None else t_index
        u = simulate(fitted, t, n_draws, config.seed)
        x = data.matrix()
        values = np.column_stack(
            [
                reconstruct_returns(
                    fit, inverse_pit(u.column(i), fit, fitted.pit_mode), x[:t, i]
                )
                for i, fit in enumerate(fits)
            ]
        )

        out = Path(config.out)
        pd.DataFrame(u.data, columns=u.names).to_csv(
            out / "simulated_uniforms.csv", index=False, float_format="%.17g"
        )
        pd.DataFrame(values, columns=data.names).to_csv(
            out / "simulated.csv", index=False, float_format="%.17g"
        )
        summary = [
            {
                "series": name,
                "mean": float(values[:, i].mean()),
                "sd": float(values[:, i].std(ddof=1)),
            }
            for i, name in enumerate(data.names)
        ]
        return {"success": True, "t_index": t, "n_draws": n_draws, "rows": summary}
    except GasVineError as e:
        return {"success": False, "message": e.message}
    except OSError as e:
        return {"success": False, "message": f"cannot write simulation: {e}"}
