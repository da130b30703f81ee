"""
回测报告输出

每个置信水平一个 VaR CSV（date, var, realized, exceed），一个汇总 CSV，
一个说明损失公式与实际值概况的 report.txt，以及叠加实际值与各 VaR 线的 SVG 图。
"""

from pathlib import Path

import pandas as pd
from loguru import logger
from matplotlib.figure import Figure

from ..core.errors import ArtifactError
from ..core.models import VaRSeries
from .backtest import BacktestReport

SUMMARY_COLUMNS = ["alpha", "fail_times", "fail_rate", "p_value", "LR", "loss", "mad"]

# 1200x600 像素
CHART_SIZE = (1200 / 72, 600 / 72)
CHART_DPI = 72


def var_filename(alpha: float) -> str:
    return f"var_{alpha:g}.csv"


def _write_chart(report: BacktestReport, path: Path) -> None:
    fig = Figure(figsize=CHART_SIZE, dpi=CHART_DPI)
    ax = fig.add_subplot()
    first = report.series[0]
    (line,) = ax.plot(
        first.dates, first.realized, color="black", linewidth=0.8, label="realized"
    )
    line.set_gid("realized")
    for series in report.series:
        (band,) = ax.plot(
            series.dates, series.var, linewidth=1.0, label=f"VaR {series.alpha:g}"
        )
        band.set_gid(f"var_{series.alpha:g}")
    ax.set_xlabel("date")
    ax.set_ylabel("portfolio indicator")
    ax.legend(loc="upper left")
    fig.autofmt_xdate()
    fig.savefig(path, format="svg")


def _report_text(report: BacktestReport) -> str:
    lines = ["Backtest report", ""]
    for key, value in report.settings.items():
        lines.append(f"{key} = {value}")
    if report.metrics:
        lines.append("")
        for formula in report.metrics[0].formulas.values():
            lines.append(formula)
    lines.append("exceedance: realized > VaR")
    lines.append("LR = -2[(T-N)ln((1-p)/(1-N/T)) + N ln(p/(N/T))], p = 1 - alpha")
    summary = report.realized_summary()
    if summary:
        lines.append("")
        lines.append(
            "realized: " + " ".join(f"{k}={v:.6g}" for k, v in summary.items())
        )
    for row, metrics in zip(report.summary_rows(), report.metrics):
        flag = " (no exceedances)" if metrics.no_exceedances else ""
        lines.append(
            f"alpha={row['alpha']:g} N={row['fail_times']} rate={row['fail_rate']:.6g} "
            f"LR={row['LR']:.6g} p={row['p_value']:.6g} loss={row['loss']:.6g}{flag} "
            f"mad={row['mad']:.6g}"
        )
    return "\n".join(lines) + "\n"


def emit_report(report: BacktestReport, out_dir: Path | str) -> list[Path]:
    """
    写出回测报告文件

    Args:
        report: 回测汇总
        out_dir: 输出目录，不存在时创建

    Returns:
        写出的文件路径列表

    Raises:
        ArtifactError: 写文件失败
    """
    out = Path(out_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for series in report.series:
            path = out / var_filename(series.alpha)
            series.to_frame().to_csv(path, index=False, float_format="%.17g")
            written.append(path)

        summary = pd.DataFrame(report.summary_rows(), columns=SUMMARY_COLUMNS)
        path = out / "summary.csv"
        summary.to_csv(path, index=False, float_format="%.17g")
        written.append(path)

        path = out / "report.txt"
        path.write_text(_report_text(report), encoding="utf-8")
        written.append(path)

        if report.series:
            path = out / "var_chart.svg"
            _write_chart(report, path)
            written.append(path)
    except OSError as e:
        raise ArtifactError(f"cannot write report to {out}: {e}", path=str(out)) from e

    logger.info(f"回测报告已写入 {out}（{len(written)} 个文件）")
    return written


def read_var_csv(path: Path | str, alpha: float) -> VaRSeries:
    """读回 emit_report 写出的 VaR CSV"""
    frame = pd.read_csv(path)
    return VaRSeries(
        alpha=alpha,
        dates=pd.to_datetime(frame["date"]),
        var=frame["var"].to_numpy(dtype=float),
        realized=frame["realized"].to_numpy(dtype=float),
    )
