"""
时变 Vine Copula 的逐层估计

对每一层：在候选边上按 |τ| 选树，逐边选择 Copula 族并估计驱动系数，
再用时变参数路径上的 h 函数生成下一层的条件伪观测。
"""

from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
from loguru import logger

from ..copula.dynamics import Driver, PairDynamics, filter_pair
from ..copula.estimation import select_family
from ..copula.families import ALL_FAMILIES, CopulaParam, Family, h_function, kendall_tau
from ..core.errors import (
    CopulaDomainError,
    PairFitError,
    VineFitError,
    VineStructureError,
)
from ..core.models import UniformPanel
from ..utils.optimize import OptimizerConfig
from .matrix import to_rvine_matrix
from .structure import (
    Candidate,
    Criterion,
    EdgeKey,
    Node,
    VineEdge,
    VineMode,
    VineStructure,
    build_edges,
    first_tree_candidates,
    proximity_candidates,
    select_tree,
    structure_from_edges,
)

MIN_VINE_LENGTH = 100

FORMAT_VERSION = 1


@dataclass
class FittedTVVine:
    """
    估计完成的时变 Vine

    n_obs 为拟合数据长度；各边的 dynamics.path 覆盖 0..n_obs-1，
    并带有样本外一步的参数。
    """

    structure: VineStructure
    names: list[str]
    driver: Driver
    families: tuple[Family, ...]
    pit_mode: str = "empirical"
    n_obs: int = 0
    criterion: Criterion = Criterion.MAX_ABS_TAU

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def mode(self) -> VineMode:
        return self.structure.mode

    @property
    def edges(self) -> list[VineEdge]:
        return self.structure.edges

    @property
    def loglik(self) -> float:
        """全部边的 Copula 对数似然之和"""
        return float(sum(e.dynamics.loglik for e in self.edges))

    @property
    def aic(self) -> float:
        """全部边的 AIC 之和"""
        return float(sum(e.dynamics.aic for e in self.edges))

    def edge_table(self) -> list[dict[str, Any]]:
        """逐边汇总：层、标签、族、驱动系数、loglik、AIC"""
        rows = []
        for edge in self.edges:
            dyn = edge.dynamics
            coef = {k: v for k, v in dyn.coef.to_dict().items() if v is not None}
            rows.append(
                {
                    "tree": edge.tree,
                    "edge": edge.label(),
                    "names": edge.label(self.names),
                    "family": dyn.family.short_name,
                    "driver": dyn.driver.value,
                    "coefficients": " ".join(f"{k}={v:.6g}" for k, v in coef.items()),
                    "loglik": dyn.loglik,
                    "aic": dyn.aic,
                }
            )
        return rows

    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "n": self.n,
            "mode": self.mode.value,
            "names": list(self.names),
            "driver": self.driver.value,
            "families": [f.value for f in self.families],
            "pit_mode": self.pit_mode,
            "n_obs": self.n_obs,
            "criterion": self.criterion.value,
            "rvine_matrix": to_rvine_matrix(self.structure).tolist(),
            "edges": [e.to_dict() for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FittedTVVine":
        """还原结构与系数；参数路径需用 filter_paths 重新计算"""
        mode = VineMode(data["mode"])
        raw_edges = data["edges"]
        structure = structure_from_edges(
            int(data["n"]),
            [(e["pair"][0], e["pair"][1], e["conditioning"]) for e in raw_edges],
            mode,
        )
        lookup = structure.by_key()
        for item in raw_edges:
            i, j = (int(k) for k in item["pair"])
            edge = lookup[(i, j, frozenset(item["conditioning"]))]
            edge.dynamics = PairDynamics.from_dict(item["dynamics"])
        return cls(
            structure=structure,
            names=list(data["names"]),
            driver=Driver(data["driver"]),
            families=tuple(Family(f) for f in data["families"]),
            pit_mode=str(data.get("pit_mode", "empirical")),
            n_obs=int(data.get("n_obs", 0)),
            criterion=Criterion(data.get("criterion", Criterion.MAX_ABS_TAU.value)),
        )


# ---------------------------------------------------------------------------
# 伪观测
# ---------------------------------------------------------------------------


def _conditioned_input(
    var: int, parent: Node, columns: np.ndarray, prev: dict
) -> np.ndarray:
    """F(var | D)：第一层直接取列，之后取上一层边保存的条件伪观测"""
    if isinstance(parent, tuple):
        return prev[parent].pseudo[var]
    return columns[:, var]


def _pair_inputs(
    i: int, j: int, nodes: tuple[Node, Node], columns: np.ndarray, prev: dict
) -> tuple[np.ndarray, np.ndarray]:
    """边 (i, j | D) 的两列输入 (F(i | D), F(j | D))"""
    left, right = nodes
    if isinstance(left, tuple):
        # 含 i 的那条上层边提供 F(i | D)
        if i not in prev[left].constraint or j in prev[left].constraint:
            left, right = right, left
        return prev[left].pseudo[i], prev[right].pseudo[j]
    if left != i:
        left, right = right, left
    return (
        _conditioned_input(i, left, columns, prev),
        _conditioned_input(j, right, columns, prev),
    )


def edge_inputs(
    edge: VineEdge, columns: np.ndarray, prev: dict[EdgeKey, VineEdge]
) -> tuple[np.ndarray, np.ndarray]:
    """边的输入伪观测，prev 为上一层边（第一层为空字典）"""
    return _pair_inputs(edge.i, edge.j, edge.nodes, columns, prev)


def conditional_series(
    edge: VineEdge, dynamics: PairDynamics, u: np.ndarray, v: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    时变参数下的条件伪观测

    out1_t = h(u_t | v_t; θ_t)，out2_t = h(v_t | u_t; θ_t)。

    Raises:
        VineFitError: 参数路径与数据长度不一致
    """
    path = dynamics.path
    if path is None or len(path) != len(u) or len(u) != len(v):
        raise VineFitError(
            f"parameter path length does not match data for edge {edge.label()}",
            edge=edge.label(),
        )
    param = CopulaParam(path.theta, dynamics.nu)
    out1 = np.asarray(h_function(dynamics.family, param, u, v))
    out2 = np.asarray(h_function(dynamics.family, param, v, u))
    return out1, out2


def _abs_tau(u: np.ndarray, v: np.ndarray) -> float:
    try:
        return abs(kendall_tau(u, v))
    except CopulaDomainError:
        return 0.0


# ---------------------------------------------------------------------------
# 逐层估计
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _EdgeJob:
    label: str
    u: np.ndarray
    v: np.ndarray
    families: tuple[Family, ...]
    driver: Driver
    optimizer: OptimizerConfig
    gamma: float
    patton_q: int


def _run_edge_job(job: _EdgeJob) -> PairDynamics:
    logger.debug(f"估计边 {job.label}")
    return select_family(
        job.u, job.v, job.families, job.driver, job.optimizer, job.gamma, job.patton_q
    )


def _fit_level(jobs: list[_EdgeJob], threads: int) -> list[PairDynamics]:
    if threads <= 1 or len(jobs) <= 1:
        results = []
        for job in jobs:
            try:
                results.append(_run_edge_job(job))
            except PairFitError as e:
                raise VineFitError(
                    f"edge {job.label}: {e.message}", edge=job.label
                ) from e
        return results
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_edge_job, job) for job in jobs]
        results = []
        for job, future in zip(jobs, futures):
            try:
                results.append(future.result())
            except PairFitError as e:
                raise VineFitError(f"edge {job.label}: {e}", edge=job.label) from e
        return results


def fit_sequential(
    u_panel: UniformPanel,
    mode: VineMode = VineMode.RVINE,
    families: Iterable[Family] | None = None,
    driver: Driver = Driver.GAS,
    criterion: Criterion = Criterion.MAX_ABS_TAU,
    optimizer: OptimizerConfig | None = None,
    gamma: float = 0.0,
    patton_q: int = 10,
    threads: int = 1,
) -> FittedTVVine:
    """
    逐层估计时变 Vine Copula

    Args:
        u_panel: 伪观测面板
        mode: RVine / CVine / DVine
        families: 候选 Copula 族，默认全部四族
        driver: 参数驱动方式
        criterion: 选树准则
        optimizer: 二元估计的优化器设置
        gamma: GAS 得分缩放指数
        patton_q: Patton 平均窗口
        threads: 同层边并行估计的进程数

    Returns:
        FittedTVVine

    Raises:
        VineFitError: 变量少于 2 个或某条边所有候选族都估计失败
    """
    n = u_panel.n_vars
    if n < 2:
        raise VineFitError("a vine needs at least 2 variables")
    if len(u_panel) < MIN_VINE_LENGTH:
        logger.warning(f"伪观测长度 {len(u_panel)} < {MIN_VINE_LENGTH}，估计可能不可靠")
    family_list = tuple(families) if families is not None else ALL_FAMILIES
    optimizer = optimizer or OptimizerConfig()
    columns = u_panel.data

    structure = VineStructure(n=n, mode=mode)
    nodes: list[Node] = list(range(n))
    candidates: list[Candidate] = first_tree_candidates(n)
    prev: dict[EdgeKey, VineEdge] = {}

    for level in range(1, n):
        weights = {
            c.key: _abs_tau(*_pair_inputs(c.i, c.j, (c.left, c.right), columns, prev))
            for c in candidates
        }
        try:
            chosen = select_tree(nodes, candidates, weights, mode, criterion, level)
        except VineStructureError as e:
            raise VineFitError(f"tree {level}: {e.message}") from e
        tree = build_edges(chosen, level)

        inputs = [edge_inputs(edge, columns, prev) for edge in tree]
        jobs = [
            _EdgeJob(
                edge.label(u_panel.names),
                u,
                v,
                family_list,
                driver,
                optimizer,
                gamma,
                patton_q,
            )
            for edge, (u, v) in zip(tree, inputs)
        ]
        for edge, (u, v), dynamics in zip(tree, inputs, _fit_level(jobs, threads)):
            edge.dynamics = dynamics
            out1, out2 = conditional_series(edge, dynamics, u, v)
            edge.pseudo = {edge.i: out1, edge.j: out2}
            logger.info(
                f"树 {level} 边 {edge.label(u_panel.names)}: "
                f"{dynamics.family.short_name} "
                f"AIC={dynamics.aic:.4f}"
            )

        structure.trees.append(tree)
        nodes = [e.key for e in tree]
        prev = {e.key: e for e in tree}
        candidates = proximity_candidates(tree)

    fitted = FittedTVVine(
        structure=structure,
        names=list(u_panel.names),
        driver=driver,
        families=family_list,
        pit_mode=u_panel.mode,
        n_obs=len(u_panel),
        criterion=criterion,
    )
    logger.info(
        f"{mode.value} 拟合完成: loglik={fitted.loglik:.4f} AIC={fitted.aic:.4f}"
    )
    return fitted


def filter_paths(fitted: FittedTVVine, u_panel: UniformPanel) -> FittedTVVine:
    """
    在伪观测面板上重新运行各边的滤波（不重新估计系数）

    原地更新每条边的参数路径、loglik、AIC 与条件伪观测，并返回 fitted。
    """
    if u_panel.n_vars != fitted.n:
        raise VineFitError(
            f"panel has {u_panel.n_vars} variables, vine has {fitted.n}"
        )
    columns = u_panel.data
    prev: dict[EdgeKey, VineEdge] = {}
    for tree in fitted.structure.trees:
        for edge in tree:
            dyn = edge.dynamics
            if dyn is None:
                raise VineFitError(
                    f"edge {edge.label()} has no dynamics", edge=edge.label()
                )
            u, v = edge_inputs(edge, columns, prev)
            try:
                path = filter_pair(dyn.driver, dyn.family, dyn.coef, u, v)
            except CopulaDomainError as e:
                raise VineFitError(
                    f"edge {edge.label()}: {e.message}", edge=edge.label()
                ) from e
            dyn.path = path
            dyn.loglik = path.loglik
            dyn.aic = 2.0 * dyn.n_params - 2.0 * path.loglik
            dyn.theta_next = path.theta_next
            out1, out2 = conditional_series(edge, dyn, u, v)
            edge.pseudo = {edge.i: out1, edge.j: out2}
        prev = {e.key: e for e in tree}
    fitted.n_obs = len(u_panel)
    return fitted


def total_loglik(fitted: FittedTVVine, marginal_logliks: Sequence[float]) -> float:
    """边缘模型对数似然与全部边 Copula 对数似然之和"""
    return float(np.sum(marginal_logliks)) + fitted.loglik
