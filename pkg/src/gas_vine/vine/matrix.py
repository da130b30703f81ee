"""
R-Vine 矩阵表示

n×n 下三角矩阵 M，元素为 1 起的变量编号。第 j 列对角元为 M[j,j]，
(i, j) 处 (i > j) 对应边 (M[j,j], M[i,j] | M[i+1,j], ..., M[n-1,j])；
最后一行是第一层树，M[j+1, j] 是该列最高层的边。
"""

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import VineStructureError
from .structure import VineEdge, VineMode, VineStructure, structure_from_edges, validate


def _column_chain(
    x: int, top: VineEdge, remaining: dict[frozenset[int], VineEdge]
) -> list[int] | None:
    """以 x 为对角元，自顶层边向下查找整列；失败返回 None"""
    column = [top.other(x)]
    cond = set(top.conditioning)
    while cond:
        edge = remaining.get(frozenset(cond | {x}))
        if edge is None or x not in edge.pair:
            return None
        y = edge.other(x)
        column.append(y)
        cond.discard(y)
    return column


def to_rvine_matrix(structure: VineStructure) -> np.ndarray:
    """
    把 Vine 结构编码为 R-Vine 矩阵

    从最高层树开始逐列构造：取剩余边中最高层那条边，对角元取其条件变量对
    中下标较小者（不可行时取另一个），再按约束集逐层向下查找该列各边。

    Returns:
        int 型 n×n 下三角矩阵，上三角为 0

    Raises:
        VineStructureError: 结构非法
    """
    validate(structure)
    n = structure.n
    matrix = np.zeros((n, n), dtype=int)
    remaining = structure.by_constraint()
    variables = set(range(n))

    for j in range(n - 1):
        top_level = n - 1 - j
        tops = [e for e in remaining.values() if e.tree == top_level]
        if len(tops) != 1:
            raise VineStructureError(
                f"cannot encode column {j + 1}: {len(tops)} edges remain in tree "
                f"{top_level}"
            )
        top = tops[0]
        for x in top.pair:
            column = _column_chain(x, top, remaining)
            if column is not None:
                break
        else:
            raise VineStructureError(
                f"cannot encode column {j + 1} from edge {top.label()}"
            )

        matrix[j, j] = x + 1
        cond: set[int] = set(top.conditioning)
        for offset, y in enumerate(column):
            matrix[j + 1 + offset, j] = y + 1
            del remaining[frozenset(cond | {x, y})]
            cond.discard(column[offset + 1] if offset + 1 < len(column) else -1)
        variables.discard(x)

    (last,) = variables
    matrix[n - 1, n - 1] = last + 1
    return matrix


def from_rvine_matrix(
    matrix: ArrayLike, mode: VineMode = VineMode.RVINE
) -> VineStructure:
    """
    解码 R-Vine 矩阵为结构

    Raises:
        VineStructureError: 矩阵不是合法的 R-Vine 矩阵
    """
    m = np.asarray(matrix, dtype=int)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise VineStructureError("R-Vine matrix must be square")
    n = m.shape[0]
    if sorted(np.diag(m).tolist()) != list(range(1, n + 1)):
        raise VineStructureError("R-Vine matrix diagonal must be a permutation of 1..n")
    if np.any(np.triu(m, k=1) != 0):
        raise VineStructureError("R-Vine matrix must be lower triangular")

    edges = []
    for j in range(n - 1):
        x = int(m[j, j]) - 1
        for i in range(j + 1, n):
            y = int(m[i, j]) - 1
            cond = [int(v) - 1 for v in m[i + 1 :, j]]
            edges.append((x, y, cond))
    return structure_from_edges(n, edges, mode)
