"""
合成面板数据

已知的数据生成过程：6 维时变 R-Vine（第一层四种族都出现，GAS 驱动）
给出联合伪观测，经偏斜 t 分位数变换为标准化残差，再通过
AR(1)-GARCH(1,1) 递推得到对数差分指标，累加取指数得到水平值。
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from ..copula.dynamics import Driver, GasCoef, PairDynamics
from ..copula.families import Family
from ..core.errors import ArtifactError
from ..core.models import RawPanel, UniformPanel
from ..marginals import skew_t
from ..utils.rng import substream
from ..vine import FittedTVVine, VineMode, random_structure, simulate_path

DEFAULT_SERIES = 6
DEFAULT_LENGTH = 1093
DEFAULT_START = "2016-01-04"

# 第一层各边的 (族, 平稳均值处的自然参数)，依次循环
FIRST_TREE = (
    (Family.GAUSSIAN, 0.5),
    (Family.STUDENT_T, 0.4),
    (Family.GUMBEL, 1.6),
    (Family.ROT_GUMBEL, 1.4),
    (Family.GAUSSIAN, 0.3),
)
T_NU = 6.0
INNOVATION_NU = 5.0
INNOVATION_XI = 1.0


@dataclass
class SynthDataset:
    """合成数据及其生成模型"""

    panel: RawPanel
    gdp: dict[str, float]
    vine: FittedTVVine
    uniforms: UniformPanel


def _gas_dynamics(
    family: Family, theta: float, a_coef: float, b_coef: float
) -> PairDynamics:
    """平稳均值处自然参数为 theta 的 GAS 系数"""
    state = float(family.link.inverse(theta))
    nu = T_NU if family is Family.STUDENT_T else None
    coef = GasCoef(k=state * (1.0 - b_coef), A=a_coef, B=b_coef, nu=nu)
    return PairDynamics(family=family, driver=Driver.GAS, coef=coef)


def synthetic_vine(names: list[str], seed: int = 0) -> FittedTVVine:
    """
    数据生成用的时变 Vine

    结构由 random_structure 随机给出；第一层按 FIRST_TREE 分配族与参数，
    更高层为相关较弱的 Gaussian。
    """
    structure = random_structure(len(names), seed, VineMode.RVINE)
    for level, tree in enumerate(structure.trees, start=1):
        for k, edge in enumerate(tree):
            if level == 1:
                family, theta = FIRST_TREE[k % len(FIRST_TREE)]
                edge.dynamics = _gas_dynamics(family, theta, 0.04, 0.95)
            else:
                rho = 0.2 if level == 2 else 0.1
                edge.dynamics = _gas_dynamics(Family.GAUSSIAN, rho, 0.02, 0.9)
    return FittedTVVine(
        structure=structure,
        names=list(names),
        driver=Driver.GAS,
        families=tuple(Family),
        pit_mode="parametric",
    )


def _garch_path(z: np.ndarray, index: int) -> np.ndarray:
    """AR(1)-GARCH(1,1) 指标路径，参数随序列编号略有不同"""
    mu = 1e-4 * (index + 1)
    phi = 0.05 + 0.05 * (index % 4)
    alpha, beta = 0.08, 0.90
    omega = 2e-6 * (1.0 + 0.5 * index)
    sigma2 = omega / (1.0 - alpha - beta)
    eps_prev = 0.0
    x_prev = mu
    out = np.empty(len(z))
    for t, zt in enumerate(z):
        sigma2 = omega + alpha * eps_prev**2 + beta * sigma2
        eps_prev = np.sqrt(sigma2) * zt
        x_prev = mu + phi * (x_prev - mu) + eps_prev
        out[t] = x_prev
    return out


def generate(
    seed: int = 0,
    n_series: int = DEFAULT_SERIES,
    length: int = DEFAULT_LENGTH,
    start: str = DEFAULT_START,
) -> SynthDataset:
    """
    生成合成面板

    Args:
        seed: 随机种子
        n_series: 序列数
        length: 水平值长度（指标长度为 length - 1）
        start: 起始工作日

    Returns:
        SynthDataset
    """
    names = [f"S{k + 1}" for k in range(n_series)]
    vine = synthetic_vine(names, seed)
    uniforms = simulate_path(vine, length - 1, seed)

    z = skew_t.ppf(uniforms.data, INNOVATION_NU, INNOVATION_XI)
    indicators = np.column_stack([_garch_path(z[:, i], i) for i in range(n_series)])
    levels = 100.0 * np.exp(
        np.vstack([np.zeros(n_series), np.cumsum(indicators, axis=0)])
    )

    dates = pd.bdate_range(start, periods=length)
    panel = RawPanel(
        dates=dates, series={name: levels[:, i] for i, name in enumerate(names)}
    )
    rng = substream(seed, length, n_series)
    gdp = {name: float(np.round(rng.uniform(1.0, 20.0), 3)) for name in names}
    logger.info(f"合成数据: {n_series} 个序列，{length} 个日期")
    return SynthDataset(panel=panel, gdp=gdp, vine=vine, uniforms=uniforms)


def write_dataset(dataset: SynthDataset, out_dir: Path | str) -> tuple[Path, Path]:
    """
    写出 panel.csv（首列 date）与 gdp.csv（series,gdp）

    Returns:
        (面板路径, GDP 路径)
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        frame = dataset.panel.to_frame()
        frame.index = frame.index.strftime("%Y-%m-%d")
        frame.index.name = "date"
        panel_path = out / "panel.csv"
        frame.to_csv(panel_path, float_format="%.17g")
        gdp_path = out / "gdp.csv"
        gdp = pd.DataFrame(
            {"series": list(dataset.gdp), "gdp": list(dataset.gdp.values())}
        )
        gdp.to_csv(gdp_path, index=False)
    except OSError as e:
        raise ArtifactError(
            f"cannot write synthetic data to {out}: {e}", path=str(out)
        ) from e
    return panel_path, gdp_path


def load_gdp(path: Path | str, names: list[str]) -> np.ndarray:
    """
    读取 GDP 文件并按 names 排列

    Raises:
        ArtifactError: 文件缺失、缺列或缺少某个序列
    """
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"GDP file not found: {path}", path=str(path))
    frame = pd.read_csv(path)
    if not {"series", "gdp"} <= set(frame.columns):
        raise ArtifactError(
            f"GDP file {path} needs columns 'series,gdp'", path=str(path)
        )
    table = dict(zip(frame["series"].astype(str), frame["gdp"].astype(float)))
    missing = [name for name in names if name not in table]
    if missing:
        raise ArtifactError(
            f"GDP file {path} has no entry for {missing}", path=str(path)
        )
    return np.array([table[name] for name in names])
