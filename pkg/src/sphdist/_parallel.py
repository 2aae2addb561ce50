"""Ordered block maps.

Work is always cut into the same blocks for a given problem size; the pool
only changes who computes a block, never how results are combined.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

PAIRS_PER_BLOCK = 1 << 22


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def pair_offset(n: int, i: int) -> int:
    """Number of pairs (r, j), r < i, j > r, in an n-row upper triangle."""
    return i * n - i * (i + 1) // 2


def row_blocks(n: int, pairs_per_block: int = PAIRS_PER_BLOCK) -> List[Tuple[int, int]]:
    """Split upper-triangle rows into contiguous blocks of roughly equal pair count."""
    total = n * (n - 1) // 2
    nblocks = max(1, math.ceil(total / pairs_per_block))
    bounds = [0]
    for b in range(1, nblocks):
        target = b * total / nblocks
        # smallest row i with pair_offset(n, i) >= target
        lo, hi = bounds[-1], n
        while lo < hi:
            mid = (lo + hi) // 2
            if pair_offset(n, mid) < target:
                lo = mid + 1
            else:
                hi = mid
        if lo > bounds[-1]:
            bounds.append(lo)
    bounds.append(n)
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
