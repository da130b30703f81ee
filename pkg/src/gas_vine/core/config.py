"""
运行配置

RunConfig 的每个字段都有默认值；文件形式为扁平的 key = value 文本，
以 # 开头的行为注释，列表用逗号分隔。命令行参数通过 with_overrides 覆盖文件值。
"""

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..copula.dynamics import Driver
from ..copula.families import Family
from ..marginals.fracdiff import DEFAULT_TRUNCATION
from ..marginals.selection import default_grid
from ..risk.var import LOSS_DEFINITIONS, MAD_DEFINITIONS
from ..utils.optimize import OptimizerConfig
from ..vine.structure import Criterion, VineMode
from .errors import ConfigError, GasVineError


@dataclass
class RunConfig:
    """
    流水线配置

    Attributes:
        input: 输入 CSV 路径（首列日期）
        date_column: 日期列名，空表示第一列
        columns: 读取的数值列，空表示全部
        pit_mode: empirical 或 parametric
        mode: rvine / cvine / dvine
        families: 候选 Copula 族
        driver: gas / patton / static
        gamma: GAS 得分缩放指数（0 不缩放，0.5 逆平方根 Fisher 信息，1 逆 Fisher 信息）
        patton_q: Patton 驱动的平均窗口
        criterion: 选树准则 max_abs_tau / min_abs_tau
        lags: Ljung-Box 与 ARCH-LM 的滞后阶数
        max_iter / restarts / tol / polish: 二元 Copula 优化器设置
        frac_truncation: 分数差分截断项数
        max_p / max_q / frac_d: 边缘模型阶数网格
        window: 回测日期数
        n_sims: 每个日期的模拟次数
        alphas: VaR 置信水平
        weights: equal 或 gdp
        gdp_file: GDP 权重文件（series,gdp 两列）
        refit_every: 回测中 Vine 重估间隔，0 表示不重估
        loss / mad: 损失与 MAD 定义
        seed: 主随机种子
        threads: 并行进程数
        out: 输出目录
    """

    input: str | None = None
    date_column: str | None = None
    columns: list[str] = field(default_factory=list)
    pit_mode: str = "empirical"
    mode: str = "rvine"
    families: list[str] = field(default_factory=lambda: [f.value for f in Family])
    driver: str = "gas"
    gamma: float = 0.0
    patton_q: int = 10
    criterion: str = "max_abs_tau"
    lags: int = 10
    max_iter: int = 600
    restarts: int = 3
    tol: float = 1e-7
    polish: bool = False
    frac_truncation: int = DEFAULT_TRUNCATION
    max_p: int = 2
    max_q: int = 2
    frac_d: bool = False
    window: int = 400
    n_sims: int = 1000
    alphas: list[float] = field(default_factory=lambda: [0.90, 0.95, 0.99, 0.995])
    weights: str = "equal"
    gdp_file: str | None = None
    refit_every: int = 0
    loss: str = "mean_excess"
    mad: str = "relative"
    seed: int = 0
    threads: int = 1
    out: str = "out"

    def __post_init__(self) -> None:
        self.validate()

    # ------------------------------------------------------------------
    # 校验与派生对象
    # ------------------------------------------------------------------

    def validate(self) -> None:
        """
        校验全部字段

        Raises:
            ConfigError: 字段取值非法（key 属性为字段名）
        """
        choices = {
            "pit_mode": ("empirical", "parametric"),
            "weights": ("equal", "gdp"),
            "loss": tuple(LOSS_DEFINITIONS),
            "mad": tuple(MAD_DEFINITIONS),
            "criterion": tuple(c.value for c in Criterion),
        }
        for key, allowed in choices.items():
            if getattr(self, key) not in allowed:
                raise ConfigError(
                    f"{key} must be one of {', '.join(allowed)}, got "
                    f"'{getattr(self, key)}'",
                    key=key,
                )
        for key, parse in (("mode", VineMode.parse), ("driver", Driver.parse)):
            try:
                parse(getattr(self, key))
            except GasVineError as e:
                raise ConfigError(e.message, key=key) from e
        if not self.families:
            raise ConfigError("families must not be empty", key="families")
        for name in self.families:
            try:
                Family.parse(name)
            except GasVineError as e:
                raise ConfigError(e.message, key="families") from e
        for a in self.alphas:
            if not 0.0 < a < 1.0:
                raise ConfigError(f"alpha {a} outside (0, 1)", key="alphas")
        positive = (
            "lags",
            "max_iter",
            "restarts",
            "frac_truncation",
            "window",
            "n_sims",
            "threads",
        )
        for key in positive:
            if getattr(self, key) < 1:
                raise ConfigError(
                    f"{key} must be positive, got {getattr(self, key)}", key=key
                )
        for key in ("max_p", "max_q", "refit_every", "seed"):
            if getattr(self, key) < 0:
                raise ConfigError(f"{key} must be non-negative", key=key)
        if not 1 <= self.patton_q <= 10:
            raise ConfigError(
                f"patton_q must lie in 1..10, got {self.patton_q}", key="patton_q"
            )
        if self.gamma not in (0.0, 0.5, 1.0):
            raise ConfigError(
                f"gamma must be 0, 0.5 or 1, got {self.gamma}", key="gamma"
            )
        if self.weights == "gdp" and not self.gdp_file:
            raise ConfigError("weights = gdp requires gdp_file", key="gdp_file")

    @property
    def vine_mode(self) -> VineMode:
        return VineMode.parse(self.mode)

    @property
    def driver_kind(self) -> Driver:
        return Driver.parse(self.driver)

    @property
    def family_list(self) -> tuple[Family, ...]:
        return tuple(Family.parse(name) for name in self.families)

    @property
    def tree_criterion(self) -> Criterion:
        return Criterion(self.criterion)

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(
            max_iter=self.max_iter,
            restarts=self.restarts,
            tol=self.tol,
            polish=self.polish,
        )

    def order_grid(self) -> list:
        return default_grid(max_p=self.max_p, max_q=self.max_q, frac_d=self.frac_d)

    # ------------------------------------------------------------------
    # 文件形式
    # ------------------------------------------------------------------

    @classmethod
    def from_file(cls, path: Path | str) -> "RunConfig":
        """
        读取 key = value 配置文件

        Raises:
            ConfigError: 文件不存在、行格式错误、未知键或值无法解析
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}", key="config")
        values: dict[str, str] = {}
        for lineno, raw in enumerate(
            path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path.name}:{lineno}: expected 'key = value'", key=line
                )
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
        return cls.from_strings(values)

    @classmethod
    def from_strings(cls, values: dict[str, str]) -> "RunConfig":
        """由字符串键值构造，键必须是字段名"""
        return cls().with_overrides({k: _parse_value(k, v) for k, v in values.items()})

    def to_file(self, path: Path | str) -> Path:
        """写出 key = value 配置文件，可被 from_file 无损读回"""
        path = Path(path)
        lines = ["# gas-vine run configuration"]
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def with_overrides(self, overrides: dict[str, Any]) -> "RunConfig":
        """
        返回覆盖了部分字段的新配置，值为 None 的键被忽略

        Raises:
            ConfigError: 未知键
        """
        known = {f.name for f in dataclasses.fields(self)}
        changes = {}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown config key '{key}'", key=key)
            if value is not None:
                changes[key] = value
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_HINTS = typing.get_type_hints(RunConfig)
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_value(key: str, text: str) -> Any:
    """按字段类型解析字符串值"""
    if key not in _HINTS:
        raise ConfigError(f"unknown config key '{key}'", key=key)
    hint = _HINTS[key]
    text = text.strip()
    try:
        if type(None) in typing.get_args(hint):
            return text or None
        if hint is str:
            return text
        if hint is bool:
            lowered = text.lower()
            if lowered not in _TRUE | _FALSE:
                raise ValueError(text)
            return lowered in _TRUE
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
        if hint == list[float]:
            return [float(item) for item in text.split(",") if item.strip()]
        if hint == list[str]:
            return [item.strip() for item in text.split(",") if item.strip()]
    except ValueError:
        raise ConfigError(
            f"cannot parse value '{text}' for key '{key}'", key=key
        ) from None
    raise ConfigError(f"unsupported type for key '{key}'", key=key)


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_format_value(item) for item in value)
    return str(value)
