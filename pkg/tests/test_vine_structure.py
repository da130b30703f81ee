"""Vine 结构与 R-Vine 矩阵测试"""

from itertools import combinations

import numpy as np
import pytest

from gas_vine.core.errors import VineStructureError
from gas_vine.vine import (
    Criterion,
    VineEdge,
    VineMode,
    VineStructure,
    first_tree_candidates,
    from_rvine_matrix,
    proximity_candidates,
    random_structure,
    select_tree,
    structure_from_edges,
    to_rvine_matrix,
    validate,
)
from gas_vine.vine.structure import build_edges

# 1 起编号：T1 12, 23, 34, 35；T2 13|2, 24|3, 45|3；T3 14|23, 25|34；T4 15|234
REFERENCE = [
    (0, 1, ()),
    (1, 2, ()),
    (2, 3, ()),
    (2, 4, ()),
    (0, 2, (1,)),
    (1, 3, (2,)),
    (3, 4, (2,)),
    (0, 3, (1, 2)),
    (1, 4, (2, 3)),
    (0, 4, (1, 2, 3)),
]


def keys(structure: VineStructure) -> set:
    return {e.key for e in structure.edges}


def tree_weights(strong: dict[tuple[int, int], float], n: int) -> dict:
    """第一层权重：strong 中给定的变量对取指定值，其余取 0.1"""
    return {
        (i, j, frozenset()): strong.get((i, j), 0.1)
        for i, j in combinations(range(n), 2)
    }


class TestVineEdge:
    """边定义测试"""

    def test_label(self):
        """标签从 1 开始编号"""
        edge = VineEdge(
            2, 0, frozenset({1}), 2, ((0, 1, frozenset()), (1, 2, frozenset()))
        )
        assert (edge.i, edge.j) == (0, 2)
        assert edge.label() == "C1,3|2"
        assert edge.label(["a", "b", "c"]) == "Ca,c|b"

    def test_invalid_edges(self):
        """自环、条件集冲突与层数不符报错"""
        with pytest.raises(VineStructureError):
            VineEdge(1, 1, frozenset(), 1, (1, 1))
        with pytest.raises(VineStructureError):
            VineEdge(0, 1, frozenset({1}), 2, (0, 1))
        with pytest.raises(VineStructureError):
            VineEdge(0, 1, frozenset(), 2, (0, 1))

    def test_other(self):
        """other 返回另一个条件变量"""
        edge = VineEdge(0, 3, frozenset(), 1, (0, 3))
        assert edge.other(0) == 3
        with pytest.raises(VineStructureError):
            edge.other(2)


class TestSelectTree:
    """生成树选择测试"""

    def test_maximum_spanning_tree(self):
        """R-Vine 第一层为 |τ| 最大生成树"""
        strong = {(0, 1): 0.9, (1, 2): 0.8, (2, 3): 0.7, (2, 4): 0.6}
        chosen = select_tree(
            range(5), first_tree_candidates(5), tree_weights(strong, 5)
        )
        assert {(c.i, c.j) for c in chosen} == set(strong)

    def test_minimum_criterion(self, log_messages):
        """min_abs_tau 选择最小权重并给出警告"""
        weights = tree_weights({(0, 1): 0.9, (0, 2): 0.8, (1, 2): 0.05}, 3)
        chosen = select_tree(
            range(3), first_tree_candidates(3), weights, criterion=Criterion.MIN_ABS_TAU
        )
        assert (1, 2) in {(c.i, c.j) for c in chosen}
        assert any("最小" in m for m in log_messages)

    def test_cvine_star(self):
        """C-Vine 第一层为以权重和最大的节点为根的星形"""
        strong = {(0, 2): 0.9, (1, 2): 0.8, (2, 3): 0.7}
        chosen = select_tree(
            range(4), first_tree_candidates(4), tree_weights(strong, 4), VineMode.CVINE
        )
        assert all(2 in (c.i, c.j) for c in chosen)
        assert len(chosen) == 3

    def test_dvine_path(self):
        """D-Vine 第一层为路径，每个节点度数不超过 2"""
        strong = {(0, 3): 0.9, (1, 3): 0.8, (1, 2): 0.7}
        chosen = select_tree(
            range(4), first_tree_candidates(4), tree_weights(strong, 4), VineMode.DVINE
        )
        degree = np.zeros(4, dtype=int)
        for c in chosen:
            degree[c.i] += 1
            degree[c.j] += 1
        assert degree.max() <= 2
        assert {(c.i, c.j) for c in chosen} == set(strong)

    def test_disconnected_candidates(self):
        """候选边不连通时报错"""
        candidates = [
            c for c in first_tree_candidates(4) if (c.i, c.j) in {(0, 1), (2, 3)}
        ]
        with pytest.raises(VineStructureError):
            select_tree(range(4), candidates, tree_weights({}, 4))


class TestProximity:
    """邻近条件测试"""

    def test_second_tree_candidates(self):
        """只有共享一个节点的边可以在下一层相连"""
        chosen = select_tree(
            range(5),
            first_tree_candidates(5),
            tree_weights({(0, 1): 0.9, (1, 2): 0.8, (2, 3): 0.7, (2, 4): 0.6}, 5),
        )
        tree = build_edges(chosen, 1)
        labels = {(c.i, c.j, c.conditioning) for c in proximity_candidates(tree)}
        assert labels == {
            (0, 2, frozenset({1})),
            (1, 3, frozenset({2})),
            (1, 4, frozenset({2})),
            (3, 4, frozenset({2})),
        }


class TestStructure:
    """结构构造与校验测试"""

    def test_reference_structure(self):
        """参考 5 维结构合法"""
        structure = structure_from_edges(5, REFERENCE)
        assert [len(t) for t in structure.trees] == [4, 3, 2, 1]
        assert structure.edge(0, 4, (1, 2, 3)).label() == "C1,5|2,3,4"

    def test_missing_parent_edge(self):
        """违反邻近条件的边报错"""
        with pytest.raises(VineStructureError):
            structure_from_edges(4, [(0, 1, ()), (1, 2, ()), (2, 3, ()), (0, 3, (1,))])

    def test_wrong_tree_count(self):
        """层数不足时校验失败"""
        structure = structure_from_edges(3, [(0, 1, ()), (1, 2, ()), (0, 2, (1,))])
        structure.trees.pop()
        with pytest.raises(VineStructureError):
            validate(structure)

    def test_missing_edge_lookup(self):
        """查找不存在的边报错"""
        structure = structure_from_edges(3, [(0, 1, ()), (1, 2, ()), (0, 2, (1,))])
        with pytest.raises(VineStructureError):
            structure.edge(0, 2)

    @pytest.mark.parametrize("mode", list(VineMode))
    @pytest.mark.parametrize("n", [3, 5, 7])
    def test_random_structures_are_valid(self, mode, n):
        """随机结构合法且由种子确定"""
        first = random_structure(n, seed=3, mode=mode)
        validate(first)
        assert keys(first) == keys(random_structure(n, seed=3, mode=mode))
        assert sum(len(t) for t in first.trees) == n * (n - 1) // 2

    def test_cvine_trees_are_stars(self):
        """C-Vine 每层都是星形"""
        structure = random_structure(6, seed=1, mode=VineMode.CVINE)
        for tree in structure.trees:
            shared = set.intersection(*(set(e.nodes) for e in tree))
            assert shared

    def test_mode_parse(self):
        """结构类型解析"""
        assert VineMode.parse("rvine") is VineMode.RVINE
        assert VineMode.parse("C") is VineMode.CVINE
        assert VineMode.parse("D-Vine") is VineMode.DVINE
        with pytest.raises(VineStructureError):
            VineMode.parse("xvine")


class TestRVineMatrix:
    """R-Vine 矩阵编码测试"""

    def test_round_trip(self):
        """编码再解码得到相同的边集"""
        structure = structure_from_edges(5, REFERENCE)
        matrix = to_rvine_matrix(structure)
        assert sorted(np.diag(matrix)) == [1, 2, 3, 4, 5]
        assert np.all(np.triu(matrix, k=1) == 0)
        assert keys(from_rvine_matrix(matrix)) == keys(structure)

    def test_matrix_columns_describe_edges(self):
        """(i, j) 处为边 (M[j,j], M[i,j] | M[i+1..n-1, j])"""
        structure = structure_from_edges(5, REFERENCE)
        matrix = to_rvine_matrix(structure) - 1
        for j in range(4):
            for i in range(j + 1, 5):
                cond = matrix[i + 1 :, j].tolist()
                structure.edge(int(matrix[j, j]), int(matrix[i, j]), cond)

    @pytest.mark.parametrize("mode", list(VineMode))
    def test_random_round_trip(self, mode):
        """随机结构的矩阵编码可逆"""
        for seed in range(5):
            structure = random_structure(6, seed=seed, mode=mode)
            restored = from_rvine_matrix(to_rvine_matrix(structure), mode)
            assert keys(restored) == keys(structure)

    def test_invalid_matrices(self):
        """非法矩阵报错"""
        with pytest.raises(VineStructureError):
            from_rvine_matrix(np.array([[1, 0], [1, 1]]))
        with pytest.raises(VineStructureError):
            from_rvine_matrix(np.array([[2, 1], [1, 1]]))
        with pytest.raises(VineStructureError):
            from_rvine_matrix(np.ones((2, 3), dtype=int))
