"""Offline optimal paging (furthest-in-future eviction)."""
from __future__ import annotations

import heapq
from typing import Sequence

NEVER = float("inf")


def next_use_table(trace: Sequence[int]) -> list:
    """``nxt[i]`` is the index of the next request for ``trace[i]``, or ``inf``."""
    nxt = [NEVER] * len(trace)
    last: dict = {}
    for i in range(len(trace) - 1, -1, -1):
        x = trace[i]
        nxt[i] = last.get(x, NEVER)
        last[x] = i
    return nxt


def compute_opt_cost(trace: Sequence[int], k: int) -> int:
    """Miss count of furthest-in-future at capacity ``k``.

    Among residents, evict the one whose next request is furthest away;
    items never requested again go first, and remaining ties go to the
    largest id.
    """
    if k < 1:
        raise ValueError("k must be positive")
    trace = [int(x) for x in trace]
    nxt = next_use_table(trace)
    resident: dict = {}  # item -> its current next-use index
    heap: list = []  # (-next_use, -item), stale entries skipped lazily
    misses = 0
    for i, x in enumerate(trace):
        if x not in resident:
            misses += 1
            if len(resident) >= k:
                while True:
                    nu, negy = heapq.heappop(heap)
                    y = -negy
                    if resident.get(y) == -nu:
                        del resident[y]
                        break
        resident[x] = nxt[i]
        heapq.heappush(heap, (-nxt[i], -x))
    return misses
