from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply `fn` to every item, results in item order regardless of completion order.

    numpy releases the GIL in the heavy kernels, so threads are enough here.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=int(workers)) as ex:
        return list(ex.map(fn, items))


def pairwise_sum(values: Sequence[float]) -> float:
    """Fixed-order pairwise reduction, bit-stable for a fixed input order."""
    vals = [float(v) for v in values]
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def split_counts(total: int, parts: int) -> List[int]:
    """Split `total` into `parts` near-equal contiguous chunk sizes (larger chunks first)."""
    parts = max(1, int(parts))
    base, extra = divmod(int(total), parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]
