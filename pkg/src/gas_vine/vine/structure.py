"""
Vine 结构

第 d 层树的节点是第 d-1 层树的边；两条边在下一层可以相连当且仅当它们
恰好共享一个节点（邻近条件）。新边的条件变量对取两条边约束集的对称差，
条件集取交集。

R-Vine 按 |τ| 最大生成树逐层选择，C-Vine 每层取星形，D-Vine 第一层取
贪心路径，之后各层由邻近条件唯一确定。
"""

from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any

import networkx as nx
import numpy as np
from loguru import logger

from ..copula.dynamics import PairDynamics
from ..core.errors import VineStructureError
from ..utils.rng import substream

EdgeKey = tuple[int, int, frozenset[int]]
Node = Hashable


class VineMode(str, Enum):
    """Vine 结构类型"""

    RVINE = "RVine"
    CVINE = "CVine"
    DVINE = "DVine"

    @classmethod
    def parse(cls, name: str) -> "VineMode":
        key = name.strip().lower().replace("-", "")
        for mode in cls:
            if mode.value.lower() == key or mode.value[0].lower() == key:
                return mode
        raise VineStructureError(f"unknown vine mode '{name}'")


class Criterion(str, Enum):
    """生成树权重准则"""

    MAX_ABS_TAU = "max_abs_tau"
    MIN_ABS_TAU = "min_abs_tau"


def edge_key(i: int, j: int, conditioning: Iterable[int] = ()) -> EdgeKey:
    a, b = sorted((int(i), int(j)))
    return a, b, frozenset(int(x) for x in conditioning)


def sort_key(node: Node) -> tuple:
    """确定性排序：变量按下标，边按 (条件变量对, 排序后的条件集)"""
    if isinstance(node, tuple):
        i, j, cond = node
        return (i, j, *sorted(cond))
    return (int(node),)


def format_label(key: EdgeKey, names: Sequence[str] | None = None) -> str:
    """边标签，变量从 1 开始编号，如 C1,3|2"""
    i, j, cond = key

    def show(x: int) -> str:
        return names[x] if names else str(x + 1)

    label = f"C{show(i)},{show(j)}"
    if cond:
        label += "|" + ",".join(show(x) for x in sorted(cond))
    return label


@dataclass
class VineEdge:
    """
    Vine 中的一条边

    i < j 为条件变量对，conditioning 为条件集，tree 为所在层（从 1 开始）。
    nodes 是该边连接的上一层节点（第一层为变量下标，之后为上一层边的 key）。
    pseudo 保存拟合后的条件伪观测 {i: F(i | j, D), j: F(j | i, D)}。
    """

    i: int
    j: int
    conditioning: frozenset[int]
    tree: int
    nodes: tuple[Node, Node]
    dynamics: PairDynamics | None = None
    pseudo: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise VineStructureError("edge joins a variable to itself")
        if self.i > self.j:
            self.i, self.j = self.j, self.i
        self.conditioning = frozenset(self.conditioning)
        if self.i in self.conditioning or self.j in self.conditioning:
            raise VineStructureError(
                f"conditioned variable inside conditioning set: {self.label()}"
            )
        if len(self.conditioning) != self.tree - 1:
            raise VineStructureError(
                f"edge {self.label()} in tree {self.tree} has {len(self.conditioning)} "
                "conditioning variables"
            )

    @property
    def key(self) -> EdgeKey:
        return self.i, self.j, self.conditioning

    @property
    def pair(self) -> tuple[int, int]:
        return self.i, self.j

    @property
    def constraint(self) -> frozenset[int]:
        return self.conditioning | {self.i, self.j}

    def label(self, names: Sequence[str] | None = None) -> str:
        return format_label(self.key, names)

    def other(self, var: int) -> int:
        if var == self.i:
            return self.j
        if var == self.j:
            return self.i
        raise VineStructureError(
            f"variable {var + 1} is not conditioned in {self.label()}"
        )

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "tree": self.tree,
            "pair": [self.i, self.j],
            "conditioning": sorted(self.conditioning),
        }
        if self.dynamics is not None:
            data["dynamics"] = self.dynamics.to_dict()
        return data


@dataclass(frozen=True)
class Candidate:
    """下一层树的候选边"""

    left: Node
    right: Node
    i: int
    j: int
    conditioning: frozenset[int]

    @property
    def key(self) -> EdgeKey:
        return edge_key(self.i, self.j, self.conditioning)


@dataclass
class VineStructure:
    """n 维 Vine：trees[d - 1] 为第 d 层树的边列表"""

    n: int
    mode: VineMode
    trees: list[list[VineEdge]] = field(default_factory=list)

    @property
    def edges(self) -> list[VineEdge]:
        return [e for tree in self.trees for e in tree]

    def by_constraint(self) -> dict[frozenset[int], VineEdge]:
        return {e.constraint: e for e in self.edges}

    def by_key(self) -> dict[EdgeKey, VineEdge]:
        return {e.key: e for e in self.edges}

    def edge(self, i: int, j: int, conditioning: Iterable[int] = ()) -> VineEdge:
        key = edge_key(i, j, conditioning)
        try:
            return self.by_key()[key]
        except KeyError:
            raise VineStructureError(
                f"no edge {format_label(key)} in structure"
            ) from None


# ---------------------------------------------------------------------------
# 候选边与生成树
# ---------------------------------------------------------------------------


def first_tree_candidates(n: int) -> list[Candidate]:
    """第一层树：所有变量对"""
    return [Candidate(i, j, i, j, frozenset()) for i, j in combinations(range(n), 2)]


def _edge_nodes(edge: VineEdge) -> frozenset:
    return frozenset(edge.nodes)


def proximity_candidates(prev_tree: Sequence[VineEdge]) -> list[Candidate]:
    """
    满足邻近条件的下一层候选边

    Args:
        prev_tree: 上一层树的边

    Returns:
        候选边列表，条件变量对为约束集的对称差，条件集为交集
    """
    out: list[Candidate] = []
    ordered = sorted(prev_tree, key=lambda e: sort_key(e.key))
    for e1, e2 in combinations(ordered, 2):
        if len(_edge_nodes(e1) & _edge_nodes(e2)) != 1:
            continue
        conditioned = e1.constraint ^ e2.constraint
        if len(conditioned) != 2:
            continue
        i, j = sorted(conditioned)
        out.append(Candidate(e1.key, e2.key, i, j, e1.constraint & e2.constraint))
    return out


def _check_connected(nodes: Sequence[Node], candidates: Sequence[Candidate]) -> None:
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from((c.left, c.right) for c in candidates)
    if len(nodes) > 1 and not nx.is_connected(graph):
        raise VineStructureError("allowed edges do not connect all nodes")


def _node_strength(
    nodes: Sequence[Node],
    candidates: Sequence[Candidate],
    weights: Mapping[EdgeKey, float],
) -> dict[Node, float]:
    strength = {node: 0.0 for node in nodes}
    for c in candidates:
        w = weights[c.key]
        strength[c.left] += w
        strength[c.right] += w
    return strength


def _prim(
    nodes: Sequence[Node],
    candidates: Sequence[Candidate],
    weights: Mapping[EdgeKey, float],
    sign: float,
) -> list[Candidate]:
    """从 Σw 最大的节点出发按 Prim 方式生长"""
    strength = _node_strength(nodes, candidates, weights)
    root = min(nodes, key=lambda node: (-strength[node], sort_key(node)))
    in_tree = {root}
    chosen: list[Candidate] = []
    while len(in_tree) < len(nodes):
        frontier = [
            c for c in candidates if (c.left in in_tree) != (c.right in in_tree)
        ]
        best = min(frontier, key=lambda c: (-sign * weights[c.key], sort_key(c.key)))
        chosen.append(best)
        in_tree.update((best.left, best.right))
    return chosen


def _star(
    nodes: Sequence[Node],
    candidates: Sequence[Candidate],
    weights: Mapping[EdgeKey, float],
    sign: float,
) -> list[Candidate]:
    """以 Σw 最优的节点为根的星形树"""
    incident: dict[Node, list[Candidate]] = {node: [] for node in nodes}
    for c in candidates:
        incident[c.left].append(c)
        incident[c.right].append(c)
    roots = [node for node in nodes if len(incident[node]) == len(nodes) - 1]
    if not roots:
        raise VineStructureError(
            "no node is adjacent to all others; C-Vine star impossible"
        )
    root = min(
        roots,
        key=lambda node: (
            -sign * sum(weights[c.key] for c in incident[node]), sort_key(node)
        ),
    )
    return sorted(incident[root], key=lambda c: sort_key(c.key))


def _greedy_path(
    nodes: Sequence[Node],
    candidates: Sequence[Candidate],
    weights: Mapping[EdgeKey, float],
    sign: float,
) -> list[Candidate]:
    """从最优边出发，在两端贪心延伸的 Hamilton 路径"""
    def rank(c: Candidate) -> tuple:
        return -sign * weights[c.key], sort_key(c.key)

    first = min(candidates, key=rank)
    ends = [first.left, first.right]
    visited = set(ends)
    chosen = [first]
    while len(visited) < len(nodes):
        options = [
            c
            for c in candidates
            if (c.left in ends and c.right not in visited)
            or (c.right in ends and c.left not in visited)
        ]
        if not options:
            raise VineStructureError("greedy D-Vine path cannot reach all nodes")
        best = min(options, key=rank)
        chosen.append(best)
        if best.left in ends:
            joined, new = best.left, best.right
        else:
            joined, new = best.right, best.left
        ends[ends.index(joined)] = new
        visited.add(new)
    return chosen


def select_tree(
    nodes: Sequence[Node],
    candidates: Sequence[Candidate],
    weights: Mapping[EdgeKey, float],
    mode: VineMode = VineMode.RVINE,
    criterion: Criterion = Criterion.MAX_ABS_TAU,
    level: int = 1,
) -> list[Candidate]:
    """
    在允许的候选边上选择一层生成树

    Args:
        nodes: 本层节点（第一层为变量下标，之后为上一层边的 key）
        candidates: 允许的边（第一层为全部变量对，之后为邻近条件候选）
        weights: 每条候选边的权重，通常为伪观测的 |τ|
        mode: RVine 取最大生成树，CVine 取星形，DVine 第一层取贪心路径
        criterion: max_abs_tau（默认）或 min_abs_tau
        level: 树的层数，从 1 开始

    Returns:
        选中的 len(nodes) - 1 条候选边

    Raises:
        VineStructureError: 候选边不连通或无法构成所需形状
    """
    nodes = list(nodes)
    if len(nodes) < 2:
        return []
    _check_connected(nodes, candidates)
    sign = 1.0
    if criterion is Criterion.MIN_ABS_TAU:
        sign = -1.0
        logger.warning(f"第 {level} 层树按最小 |τ| 准则选择")
    if mode is VineMode.CVINE:
        return _star(nodes, candidates, weights, sign)
    if mode is VineMode.DVINE and level == 1:
        return _greedy_path(nodes, candidates, weights, sign)
    return _prim(nodes, candidates, weights, sign)


def build_edges(chosen: Sequence[Candidate], level: int) -> list[VineEdge]:
    """把选中的候选边转换为 VineEdge，按 key 排序"""
    edges = [
        VineEdge(c.i, c.j, c.conditioning, level, (c.left, c.right)) for c in chosen
    ]
    return sorted(edges, key=lambda e: sort_key(e.key))


# ---------------------------------------------------------------------------
# 校验与构造
# ---------------------------------------------------------------------------


def validate(structure: VineStructure) -> None:
    """
    检查结构合法性

    第 d 层有 n - d 条边；第一层是覆盖全部变量的树；每层边连接的两个
    节点都在上一层中且恰好共享一个节点，并且每层构成一棵树。

    Raises:
        VineStructureError: 任一条件不满足
    """
    n = structure.n
    if len(structure.trees) != max(n - 1, 0):
        raise VineStructureError(
            f"expected {n - 1} trees, found {len(structure.trees)}"
        )
    prev_nodes: list[Node] = list(range(n))
    prev_edges: dict[Node, VineEdge] = {}
    for level, tree in enumerate(structure.trees, start=1):
        if len(tree) != n - level:
            raise VineStructureError(
                f"tree {level} has {len(tree)} edges, expected {n - level}"
            )
        graph = nx.Graph()
        graph.add_nodes_from(prev_nodes)
        for edge in tree:
            if edge.tree != level:
                raise VineStructureError(f"edge {edge.label()} stored in tree {level}")
            a, b = edge.nodes
            if a not in graph or b not in graph:
                raise VineStructureError(f"edge {edge.label()} joins unknown nodes")
            if level == 1:
                if {a, b} != {edge.i, edge.j}:
                    raise VineStructureError(
                        f"edge {edge.label()} does not match its nodes"
                    )
            else:
                ea, eb = prev_edges[a], prev_edges[b]
                if len(_edge_nodes(ea) & _edge_nodes(eb)) != 1:
                    raise VineStructureError(
                        f"edge {edge.label()} violates the proximity condition"
                    )
                if (ea.constraint ^ eb.constraint) != {edge.i, edge.j} or (
                    ea.constraint & eb.constraint
                ) != edge.conditioning:
                    raise VineStructureError(
                        f"edge {edge.label()} is inconsistent with the edges it joins"
                    )
            graph.add_edge(a, b)
        if not nx.is_tree(graph):
            raise VineStructureError(f"tree {level} is not a spanning tree")
        prev_nodes = [e.key for e in tree]
        prev_edges = {e.key: e for e in tree}


def structure_from_edges(
    n: int,
    edges: Iterable[tuple[int, int, Iterable[int]]],
    mode: VineMode = VineMode.RVINE,
) -> VineStructure:
    """
    由 (i, j, 条件集) 列表构造结构，并按约束集推断每条边连接的上层节点

    Raises:
        VineStructureError: 边集不构成合法 Vine
    """
    specs = [edge_key(i, j, cond) for i, j, cond in edges]
    by_level: dict[int, list[EdgeKey]] = {}
    for key in specs:
        by_level.setdefault(len(key[2]) + 1, []).append(key)

    trees: list[list[VineEdge]] = []
    constraint_to_key: dict[frozenset[int], EdgeKey] = {}
    for level in range(1, n):
        tree: list[VineEdge] = []
        for i, j, cond in sorted(by_level.get(level, []), key=sort_key):
            if level == 1:
                nodes: tuple[Node, Node] = (i, j)
            else:
                left = constraint_to_key.get(cond | {i})
                right = constraint_to_key.get(cond | {j})
                if left is None or right is None:
                    raise VineStructureError(
                        f"edge {format_label((i, j, cond))} has no parent edges in "
                        f"tree {level - 1}"
                    )
                nodes = (left, right)
            tree.append(VineEdge(i, j, cond, level, nodes))
        trees.append(tree)
        constraint_to_key = {e.constraint: e.key for e in tree}

    structure = VineStructure(n=n, mode=mode, trees=trees)
    validate(structure)
    return structure


def random_structure(
    n: int, seed: int, mode: VineMode = VineMode.RVINE
) -> VineStructure:
    """
    随机合法 Vine：每层用随机权重选择生成树

    Args:
        n: 维度
        seed: 随机种子
        mode: 结构类型
    """
    rng = substream(seed, n)
    structure = VineStructure(n=n, mode=mode)
    nodes: list[Node] = list(range(n))
    candidates = first_tree_candidates(n)
    for level in range(1, n):
        weights = {c.key: float(rng.uniform()) for c in candidates}
        chosen = select_tree(
            nodes, candidates, weights, mode, Criterion.MAX_ABS_TAU, level
        )
        tree = build_edges(chosen, level)
        structure.trees.append(tree)
        nodes = [e.key for e in tree]
        candidates = proximity_candidates(tree)
    validate(structure)
    return structure
