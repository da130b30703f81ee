"""
随机数子流

所有随机性都从 (seed, key...) 派生，保证结果与调度顺序无关。
"""

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    """
    根据主种子和若干整数键生成独立的随机数发生器

    Args:
        seed: 主种子
        *keys: 子流编号（如日期下标、抽样编号）

    Returns:
        numpy Generator
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def derive_seed(seed: int, *keys: int) -> int:
    """派生一个新的整数种子"""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1)
    return int(state[0])
