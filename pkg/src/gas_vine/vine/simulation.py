"""
时变 Vine 模拟

按 R-Vine 矩阵对角元的逆序逐个变量抽样：对每个变量从该列最高层的边开始
逐层应用逆 h 函数，条件伪观测 F(var | D) 通过约束集递归计算并缓存。
"""

from collections.abc import Callable, Mapping

import numpy as np

from ..copula.dynamics import DriverStepper
from ..copula.families import CopulaParam, h_function, h_inverse
from ..core.errors import CopulaDomainError, RootFindingError, SimulationError
from ..core.models import UniformPanel
from ..utils.numeric import clamp_unit
from ..utils.rng import substream
from .fitting import FittedTVVine
from .matrix import to_rvine_matrix
from .structure import EdgeKey, VineEdge, VineStructure

# 每个随机子流负责的抽样数
DRAW_BLOCK = 1024


class _Sampler:
    """单次联合抽样：给定每条边的参数，把独立均匀数 W 变换为 Vine 样本"""

    def __init__(self, structure: VineStructure):
        self.structure = structure
        self.matrix = to_rvine_matrix(structure) - 1
        self.by_constraint = structure.by_constraint()

    def draw(
        self, w: np.ndarray, params: Mapping[EdgeKey, CopulaParam]
    ) -> tuple[np.ndarray, Callable[[int, frozenset[int]], np.ndarray]]:
        """
        Args:
            w: (M, n) 独立均匀数，第 k 列对应变量 k
            params: 每条边的 Copula 参数

        Returns:
            (M, n) 样本，以及计算条件伪观测 F(var | cond) 的带缓存函数
        """
        n = self.structure.n
        m = self.matrix
        x: dict[int, np.ndarray] = {}
        memo: dict[tuple[int, frozenset[int]], np.ndarray] = {}

        def cond_value(var: int, cond: frozenset[int]) -> np.ndarray:
            if not cond:
                return x[var]
            key = (var, cond)
            if key not in memo:
                edge = self._edge_for(var, cond)
                other = edge.other(var)
                rest = cond - {other}
                memo[key] = np.asarray(
                    h_function(
                        edge.dynamics.family,
                        params[edge.key],
                        cond_value(var, rest),
                        cond_value(other, rest),
                    )
                )
            return memo[key]

        for j in range(n - 1, -1, -1):
            var = int(m[j, j])
            value = w[:, var]
            # 自该列最高层的边向下：F(var | D) -> F(var | D 的子集) -> ... -> x_var
            for i in range(j + 1, n):
                other = int(m[i, j])
                cond = frozenset(int(c) for c in m[i + 1 :, j])
                edge = self._edge_for(var, cond | {other}, other)
                try:
                    value = np.asarray(
                        h_inverse(
                            edge.dynamics.family,
                            params[edge.key],
                            value,
                            cond_value(other, cond),
                        )
                    )
                except RootFindingError as e:
                    raise SimulationError(
                        f"inverse h-function failed on edge {edge.label()}: "
                        f"{e.message}",
                        edge=edge.label(),
                    ) from e
            x[var] = value
        return np.column_stack([x[k] for k in range(n)]), cond_value

    def _edge_for(
        self, var: int, cond: frozenset[int], other: int | None = None
    ) -> VineEdge:
        """约束集为 {var} ∪ cond 且 var 为条件变量之一的边"""
        edge = self.by_constraint.get(cond | {var})
        if edge is None or var not in edge.pair or (
            other is not None and other not in edge.pair
        ):
            raise SimulationError(
                f"structure has no edge for variable {var + 1} given {sorted(cond)}"
            )
        return edge


def draw_uniforms(n_draws: int, n_vars: int, seed: int) -> np.ndarray:
    """按 DRAW_BLOCK 分块的独立子流生成 (n_draws, n_vars) 均匀数"""
    blocks = []
    for b, start in enumerate(range(0, n_draws, DRAW_BLOCK)):
        size = min(DRAW_BLOCK, n_draws - start)
        blocks.append(substream(seed, b).uniform(size=(size, n_vars)))
    return clamp_unit(np.vstack(blocks)) if blocks else np.empty((0, n_vars))


def simulate(
    fitted: FittedTVVine, t_index: int, n_draws: int, seed: int
) -> UniformPanel:
    """
    在第 t_index 步的参数下抽取 n_draws 个联合样本

    t_index 取 0..n_obs-1 时使用滤波路径上的 θ_t；t_index == n_obs 时使用
    由全部样本得到的一步预测参数。

    Args:
        fitted: 估计完成的 Vine
        t_index: 时间下标（0 起）
        n_draws: 抽样数
        seed: 随机种子

    Returns:
        UniformPanel，列顺序与 fitted.names 一致

    Raises:
        SimulationError: 参数不可用或逆 h 函数不收敛
    """
    if n_draws < 1:
        raise SimulationError(f"n_draws must be positive, got {n_draws}")
    params: dict[EdgeKey, CopulaParam] = {}
    for edge in fitted.edges:
        try:
            params[edge.key] = edge.dynamics.param_at(t_index, fitted.n_obs)
        except (CopulaDomainError, IndexError) as e:
            raise SimulationError(
                f"no parameter for edge {edge.label()} at t_index={t_index}: {e}",
                edge=edge.label(),
            ) from e
    w = draw_uniforms(n_draws, fitted.n, seed)
    sample, _ = _Sampler(fitted.structure).draw(w, params)
    return UniformPanel(clamp_unit(sample), list(fitted.names), fitted.pit_mode)


def simulate_path(fitted: FittedTVVine, length: int, seed: int) -> UniformPanel:
    """
    递推模拟一条时变 Vine 路径

    每一步先在当前参数下抽取一个联合样本，再用该样本在各边上的条件伪观测
    推进每条边的驱动状态。

    Args:
        fitted: 提供结构、族与驱动系数的 Vine（不需要滤波路径）
        length: 路径长度
        seed: 随机种子

    Returns:
        (length, n) 的 UniformPanel
    """
    sampler = _Sampler(fitted.structure)
    steppers = {
        e.key: DriverStepper(e.dynamics.family, e.dynamics.driver, e.dynamics.coef)
        for e in fitted.edges
    }
    rng = substream(seed, length)
    out = np.empty((length, fitted.n))
    for t in range(length):
        params = {
            key: CopulaParam(stepper.theta, stepper.coef.nu)
            for key, stepper in steppers.items()
        }
        w = clamp_unit(rng.uniform(size=(1, fitted.n)))
        sample, cond_value = sampler.draw(w, params)
        out[t] = sample[0]
        for edge in fitted.edges:
            u = cond_value(edge.i, edge.conditioning)
            v = cond_value(edge.j, edge.conditioning)
            steppers[edge.key].update(float(u[0]), float(v[0]))
    return UniformPanel(clamp_unit(out), list(fitted.names), fitted.pit_mode)
