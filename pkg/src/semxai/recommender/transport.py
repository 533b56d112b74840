"""Exact discrete optimal transport via the transportation simplex method.

The initial basis comes from the matrix-minimum rule and is kept as a
spanning tree over the ``m + n`` row/column nodes (``m + n - 1`` basic cells,
degenerate zeros included). Flows are recomputed
from the marginals by leaf peeling after every pivot, so the returned plan
satisfies the marginals up to float rounding of a single subtraction chain.
Entering cells follow Dantzig's rule, switching to Bland's rule after a run of
degenerate pivots to rule out cycling.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def _least_cost(a, b, cost) -> list[tuple[int, int]]:
    """Matrix-minimum start: repeatedly fill the cheapest open cell, closing one line per step."""
    m, n = len(a), len(b)
    ra, rb = a.astype(float).copy(), b.astype(float).copy()
    rows, cols = set(range(m)), set(range(n))
    order = sorted(((cost[i, j], i, j) for i in range(m) for j in range(n)))
    basis = []
    for _, i, j in order:
        if i not in rows or j not in cols:
            continue
        basis.append((i, j))
        q = min(ra[i], rb[j])
        ra[i] -= q
        rb[j] -= q
        if len(rows) == 1 and len(cols) == 1:
            break
        if len(cols) == 1 or (len(rows) > 1 and ra[i] <= rb[j]):
            rows.discard(i)
        else:
            cols.discard(j)
    return basis


def _adjacency(basis, m):
    adj: dict[int, list[tuple[int, tuple[int, int]]]] = {}
    for cell in basis:
        r, c = cell[0], m + cell[1]
        adj.setdefault(r, []).append((c, cell))
        adj.setdefault(c, []).append((r, cell))
    return adj


def _potentials(basis, cost, m, n):
    adj = _adjacency(basis, m)
    pot = [None] * (m + n)
    pot[0] = 0.0
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for other, (i, j) in adj.get(node, ()):
            if pot[other] is None:
                # cost[i, j] = u[i] + v[j]
                pot[other] = cost[i, j] - pot[node]
                queue.append(other)
    return np.array(pot[:m]), np.array(pot[m:])


def _tree_path(basis, m, start, goal):
    """Cells on the tree path from node ``start`` to node ``goal``."""
    adj = _adjacency(basis, m)
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for other, cell in adj.get(node, ()):
            if other not in parent:
                parent[other] = (node, cell)
                queue.append(other)
    path = []
    node = goal
    while parent[node] is not None:
        prev, cell = parent[node]
        path.append(cell)
        node = prev
    path.reverse()
    return path


def _flows(basis, a, b, m, n):
    plan = np.zeros((m, n))
    ra, rb = a.astype(float).copy(), b.astype(float).copy()
    adj = {k: set(v) for k, v in _adjacency(basis, m).items()}
    leaves = deque(sorted(k for k, v in adj.items() if len(v) == 1))
    while leaves:
        node = leaves.popleft()
        if not adj.get(node):
            continue
        other, cell = next(iter(adj[node]))
        i, j = cell
        flow = ra[i] if node < m else rb[j]
        flow = max(flow, 0.0)
        plan[i, j] = flow
        ra[i] -= flow
        rb[j] -= flow
        adj[node].discard((other, cell))
        adj[other].discard((node, cell))
        if len(adj[other]) == 1:
            leaves.append(other)
    return plan


def solve_transport(a, b, cost, max_iter: int = 100_000) -> tuple[float, np.ndarray]:
    """Minimum-cost plan moving mass ``a`` (rows) onto ``b`` (columns).

    ``a`` and ``b`` must be nonnegative with equal totals (``b`` is rescaled to
    match ``a`` to absorb rounding).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = len(a), len(b)
    if cost.shape != (m, n):
        raise ValueError("cost matrix shape does not match marginals")
    if m == 0 or n == 0 or np.any(a < 0) or np.any(b < 0):
        raise ValueError("marginals must be non-empty and nonnegative")
    if not np.isclose(a.sum(), b.sum(), rtol=1e-9, atol=1e-12):
        raise ValueError("marginals must have equal total mass")
    b = b * (a.sum() / b.sum())

    tol = 1e-12 * max(1.0, float(np.abs(cost).max()))
    basis = _least_cost(a, b, cost)
    plan = _flows(basis, a, b, m, n)
    degenerate_run = 0
    for _ in range(max_iter):
        u, v = _potentials(basis, cost, m, n)
        reduced = cost - u[:, None] - v[None, :]
        for cell in basis:
            reduced[cell] = 0.0
        if degenerate_run > m + n:
            candidates = np.flatnonzero(reduced.ravel() < -tol)
            if candidates.size == 0:
                break
            flat = int(candidates[0])
        else:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                break
        i, j = divmod(flat, n)
        # The cycle closes through the entering cell; path cells alternate -, +, ...
        path = _tree_path(basis, m, m + j, i)
        minus = path[0::2]
        theta = min(plan[c] for c in minus)
        leaving = min((c for c in minus if plan[c] == theta), key=lambda c: c[0] * n + c[1])
        basis.remove(leaving)
        basis.append((i, j))
        degenerate_run = degenerate_run + 1 if theta <= 0 else 0
        plan = _flows(basis, a, b, m, n)
    else:
        raise RuntimeError("transport simplex did not converge")
    return float(np.sum(plan * cost)), plan
