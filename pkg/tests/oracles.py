"""Slow reference implementations used only to check the library."""

from __future__ import annotations


def dtw_exhaustive(a, b) -> float:
    """Minimum squared-difference cost over every warping path, enumerated one by one."""
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    n, m = len(a), len(b)
    best = float("inf")
    # explicit stack of (i, j, cost so far including cell (i, j))
    stack = [(0, 0, (a[0] - b[0]) ** 2)]
    while stack:
        i, j, cost = stack.pop()
        if i == n - 1 and j == m - 1:
            best = min(best, cost)
            continue
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < n and nj < m:
                stack.append((ni, nj, cost + (a[ni] - b[nj]) ** 2))
    return best


def brute_max_min(matrix) -> tuple[int, float]:
    """Row index with the largest row minimum (first such row on ties)."""
    best_i, best_v = None, None
    for i, row in enumerate(matrix):
        v = min(row)
        if best_v is None or v > best_v:
            best_i, best_v = i, v
    return best_i, best_v
