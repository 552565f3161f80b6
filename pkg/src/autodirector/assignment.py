"""Minimum-cost assignment between two index sets.

The solver is the O(n^3) shortest-augmenting-path form of the Kuhn-Munkres
algorithm. On top of it, `hungarian` refines the answer to the
lexicographically smallest optimal pair set so that equal-cost ties resolve
the same way on every run and platform.
"""

from __future__ import annotations

import numpy as np

# Relative slack when comparing a candidate total against the optimum.
# Mathematically equal totals can differ by a few ulp because they are
# accumulated in different orders.
_TIE_EPS = 1e-9


def _solve_rows_leq_cols(cost: np.ndarray):
    """Optimal full matching of rows into columns, requires rows <= cols."""
    n, m = cost.shape
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    match = [0] * (m + 1)  # match[j] = row assigned to column j, 1-based
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            row = cost[i0 - 1]
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    return [(match[j] - 1, j - 1) for j in range(1, m + 1) if match[j] != 0]


def assignment_value(cost: np.ndarray) -> float:
    """Total cost of one optimal maximal matching."""
    n, m = cost.shape
    if n == 0 or m == 0:
        return 0.0
    if n <= m:
        pairs = _solve_rows_leq_cols(cost)
        return float(sum(cost[i, j] for i, j in pairs))
    pairs = _solve_rows_leq_cols(cost.T)
    return float(sum(cost[j, i] for i, j in pairs))


def hungarian(cost) -> list[tuple[int, int]]:
    """Minimum-cost maximal matching for an n x m cost matrix.

    Returns min(n, m) (row, col) pairs sorted by row. Among all matchings
    of minimal total cost, the lexicographically smallest pair set is
    returned: pairs are fixed greedily in (row, col) order, keeping a pair
    only if some optimal completion still exists.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValueError(f"cost matrix must be 2-dimensional, got shape {c.shape}")
    n, m = c.shape
    if n == 0 or m == 0:
        return []
    if not np.isfinite(c).all():
        raise ValueError("assignment costs must be finite")
    best = assignment_value(c)
    scale = max(1.0, float(np.abs(c).max()) * min(n, m))
    tol = _TIE_EPS * scale

    size = min(n, m)
    pairs: list[tuple[int, int]] = []
    cols_free = list(range(m))
    fixed = 0.0
    next_row = 0
    for pos in range(size):
        need = size - pos - 1
        placed = False
        for i in range(next_row, n):
            rows_after = n - i - 1
            if rows_after < need:
                break  # later rows leave too few rows for the remaining pairs
            for j in cols_free:
                rest_rows = list(range(i + 1, n))
                rest_cols = [col for col in cols_free if col != j]
                if need:
                    sub = assignment_value(c[np.ix_(rest_rows, rest_cols)])
                else:
                    sub = 0.0
                if fixed + c[i, j] + sub <= best + tol:
                    pairs.append((i, j))
                    fixed += c[i, j]
                    cols_free.remove(j)
                    next_row = i + 1
                    placed = True
                    break
            if placed:
                break
        if not placed:  # cannot happen for finite costs
            raise RuntimeError("assignment refinement failed to place a pair")
    return pairs
