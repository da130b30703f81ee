"""
gas-vine 命令行

子命令：synth, stats, filter, fit, simulate, backtest, compare。
配置来自 --config 指定的 key = value 文件，命令行参数覆盖文件值；
成功退出码为 0，失败时在 stderr 输出一行原因并返回 1。
"""

import argparse
import sys
from collections.abc import Sequence
from typing import Any

import pandas as pd
from loguru import logger

from .. import __version__
from ..core.config import RunConfig
from ..core.errors import GasVineError
from ..tools import (
    run_backtest_report,
    run_compare,
    run_filter,
    run_fit,
    run_simulate,
    run_stats,
    run_synth,
)


def setup_logging(verbose: bool = False, log_file: str | None = None) -> None:
    """配置 loguru：stderr 输出消息本身，可选的文件输出带时间与级别"""
    logger.remove()
    logger.add(
        sys.stderr,
        format="<level>{message}</level>",
        level="DEBUG" if verbose else "INFO",
    )
    if log_file:
        logger.add(
            log_file,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {message}",
            level="DEBUG",
        )


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(item) for item in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got '{text}'"
        ) from None


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="key = value 配置文件")
    parent.add_argument("--input", help="输入 CSV（首列日期）")
    parent.add_argument("--out", help="输出目录")
    parent.add_argument("--seed", type=int, help="主随机种子")
    parent.add_argument("--threads", type=int, help="并行进程数")
    parent.add_argument("--lags", type=int, help="Ljung-Box / ARCH-LM 滞后阶数")
    parent.add_argument("--pit", dest="pit_mode", choices=["empirical", "parametric"])
    parent.add_argument("--mode", choices=["rvine", "cvine", "dvine"])
    parent.add_argument("--driver", choices=["gas", "patton", "static"])
    parent.add_argument("--families", type=_csv_list, help="逗号分隔的 Copula 族")
    parent.add_argument("--criterion", choices=["max_abs_tau", "min_abs_tau"])
    parent.add_argument("--gamma", type=float, help="GAS 得分缩放指数 0 / 0.5 / 1")
    parent.add_argument("--patton-q", dest="patton_q", type=int)
    parent.add_argument("--max-iter", dest="max_iter", type=int)
    parent.add_argument("--restarts", type=int)
    parent.add_argument("--window", type=int, help="回测日期数")
    parent.add_argument("--sims", dest="n_sims", type=int, help="每个日期的模拟次数")
    parent.add_argument("--alphas", type=_csv_floats, help="逗号分隔的置信水平")
    parent.add_argument("--weights", choices=["equal", "gdp"])
    parent.add_argument("--gdp-file", dest="gdp_file")
    parent.add_argument("--refit-every", dest="refit_every", type=int)
    parent.add_argument("--loss", help="损失定义 mean_excess / lopez")
    parent.add_argument("--mad", help="MAD 定义 relative / absolute")
    parent.add_argument("-v", "--verbose", action="store_true", help="输出调试日志")
    parent.add_argument("--log-file", dest="log_file", help="日志文件")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _common_options()
    parser = argparse.ArgumentParser(
        prog="gas-vine", description="时变 R-Vine Copula 的拟合、模拟与 VaR 回测"
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[parent], help="生成合成数据集")
    sub.add_parser("stats", parents=[parent], help="描述统计与诊断检验")
    sub.add_parser("filter", parents=[parent], help="拟合边缘模型")
    sub.add_parser("fit", parents=[parent], help="拟合边缘模型与时变 Vine")
    simulate = sub.add_parser("simulate", parents=[parent], help="从已拟合模型抽样")
    simulate.add_argument("--draws", type=int, help="抽样数，默认 --sims")
    simulate.add_argument(
        "--t-index", dest="t_index", type=int, help="时间下标，默认样本外一步"
    )
    backtest = sub.add_parser("backtest", parents=[parent], help="VaR 回测")
    backtest.add_argument(
        "--fit", dest="fit_inline", action="store_true", help="先拟合模型"
    )
    sub.add_parser("compare", parents=[parent], help="比较 R/C/D-Vine")
    return parser


_CONFIG_KEYS = (
    "input", "out", "seed", "threads", "lags", "pit_mode", "mode", "driver",
    "families", "criterion", "gamma", "patton_q", "max_iter", "restarts",
    "window", "n_sims", "alphas", "weights", "gdp_file", "refit_every",
    "loss", "mad",
)  # fmt: skip


def build_config(args: argparse.Namespace) -> RunConfig:
    """配置文件打底，命令行参数覆盖"""
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    return config.with_overrides({key: getattr(args, key) for key in _CONFIG_KEYS})


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _print_table(
    rows: list[dict[str, Any]], columns: Sequence[str] | None = None
) -> None:
    if not rows:
        print("(empty)")
        return
    frame = pd.DataFrame(rows, columns=list(columns) if columns else None)
    print(frame.to_string(index=False, formatters={c: _format for c in frame.columns}))


def _print_edges(edges: list[dict[str, Any]]) -> None:
    """按层输出边表：标签、族、驱动系数、AIC"""
    for tree in sorted({e["tree"] for e in edges}):
        print(f"Tree {tree}")
        _print_table(
            [e for e in edges if e["tree"] == tree],
            ["edge", "names", "family", "coefficients", "aic"],
        )


def _dispatch(
    command: str, args: argparse.Namespace, config: RunConfig
) -> dict[str, Any]:
    if command == "synth":
        return run_synth(config.out, config.seed)
    if command == "stats":
        return run_stats(config)
    if command == "filter":
        return run_filter(config)
    if command == "fit":
        return run_fit(config)
    if command == "simulate":
        return run_simulate(config, n_draws=args.draws, t_index=args.t_index)
    if command == "backtest":
        return run_backtest_report(config, fit_inline=args.fit_inline)
    return run_compare(config)


def _show(command: str, result: dict[str, Any]) -> None:
    if command == "synth":
        print(f"panel: {result['panel']}")
        print(f"gdp:   {result['gdp']}")
    elif command == "fit":
        _print_table(result["marginals"])
        _print_edges(result["edges"])
        print(
            f"{result['mode']}: {result['n_edges']} edges, "
            f"copula loglik {_format(result['copula_loglik'])}, "
            f"AIC {_format(result['copula_aic'])}, "
            f"total loglik {_format(result['total_loglik'])}"
        )
        print("AIC = 2k - 2 loglik over the full sample")
    elif command == "backtest":
        _print_table(result["rows"])
        if result["realized"]:
            realized = result["realized"].items()
            print("realized: " + " ".join(f"{k}={_format(v)}" for k, v in realized))
        for formula in result["formulas"].values():
            print(formula)
    elif command == "compare":
        _print_table(result["rows"])
        print(f"lowest AIC: {result['best']}")
    else:
        _print_table(result["rows"])


def main(argv: Sequence[str] | None = None) -> int:
    """
    命令行入口

    Returns:
        退出码：0 成功，1 运行失败（参数错误由 argparse 以 2 退出）
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.log_file)

    try:
        config = build_config(args)
    except GasVineError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return 1

    result = _dispatch(args.command, args, config)
    if not result.get("success"):
        print(f"error: {result.get('message', 'unknown failure')}", file=sys.stderr)
        return 1
    _show(args.command, result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
