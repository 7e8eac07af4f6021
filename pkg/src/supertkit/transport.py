"""Exact balanced-transportation solver (primal network simplex).

Solves  min sum_ij cost[i,j] * x[i,j]  s.t.  row sums = supply, column sums =
demand, x >= 0, for dense cost matrices of the sizes this toolkit produces
(up to a few hundred per side). The basis is kept as a spanning tree over
row/column nodes; duals are recomputed by tree traversal each pivot, which is
cheap at these sizes and numerically self-correcting.

Degenerate pivots are tolerated; after a long run of them the pivot rule
switches to Bland's (smallest index), which cannot cycle.
"""

from collections import deque

import numpy as np

from .errors import ConvergenceError, ValidationError


def _greedy_basis(cost, supply, demand):
    """Matrix-minimum start: fill cheapest cells first.

    Every fill saturates a row or a column, so each forest component keeps
    exactly one unsaturated node and fills can never close a cycle. A second
    sweep links leftover components with zero-flow cells to complete the
    spanning tree the simplex needs.
    """
    m, n = len(supply), len(demand)
    a = supply.copy()
    b = demand.copy()
    flows = np.zeros((m, n))
    parent = list(range(m + n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    order = [divmod(int(f), n) for f in np.argsort(cost, axis=None, kind="stable")]
    basis = []
    for i, j in order:
        if a[i] <= 0.0 or b[j] <= 0.0:
            continue
        t = min(a[i], b[j])
        flows[i, j] = t
        basis.append((i, j))
        parent[find(i)] = find(m + j)
        a[i] -= t
        b[j] -= t
    for i, j in order:
        if len(basis) == m + n - 1:
            break
        ri, rj = find(i), find(m + j)
        if ri != rj:
            basis.append((i, j))
            parent[ri] = rj
    return flows, basis


def _compute_duals(cost_rows, adjacency, m, n):
    # plain-Python tree sweep: the per-pivot hot path, so no numpy scalars
    u = [None] * m
    v = [None] * n
    u[0] = 0.0
    stack = [0]
    while stack:
        node = stack.pop()
        if node < m:
            un = u[node]
            row = cost_rows[node]
            for other in adjacency[node]:
                j = other - m
                if v[j] is None:
                    v[j] = row[j] - un
                    stack.append(other)
        else:
            j = node - m
            vj = v[j]
            for other in adjacency[node]:
                if u[other] is None:
                    u[other] = cost_rows[other][j] - vj
                    stack.append(other)
    return u, v


def _tree_path(adjacency, start, goal):
    parents = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for other in adjacency[node]:
            if other not in parents:
                parents[other] = node
                queue.append(other)
    path = [goal]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    path.reverse()
    return path


def solve_transport(cost, supply, demand, tol: float = 1e-11, max_iter: int = None):
    """Return (flows, total_cost, u, v) for the balanced problem.

    The duals certify optimality: u[i] + v[j] <= cost[i, j] + tol everywhere,
    with equality on cells carrying flow.
    """
    cost = np.asarray(cost, dtype=np.float64)
    supply = np.asarray(supply, dtype=np.float64).copy()
    demand = np.asarray(demand, dtype=np.float64).copy()
    m, n = cost.shape
    if supply.shape != (m,) or demand.shape != (n,):
        raise ValidationError("cost/supply/demand shapes disagree")
    if np.any(supply < 0) or np.any(demand < 0):
        raise ValidationError("supplies and demands must be non-negative")
    sa, sb = float(supply.sum()), float(demand.sum())
    if sa <= 0 or sb <= 0:
        raise ValidationError("total mass must be positive")
    if abs(sa - sb) > 1e-7 * max(sa, sb):
        raise ValidationError(f"unbalanced problem: supply {sa} vs demand {sb}")
    demand *= sa / sb

    flows, basis = _greedy_basis(cost, supply, demand)
    basis_set = set(basis)
    adjacency = {k: set() for k in range(m + n)}
    for (i, j) in basis:
        adjacency[i].add(m + j)
        adjacency[m + j].add(i)

    if max_iter is None:
        max_iter = 200 * (m + n) + 2000
    basic_mask = np.zeros((m, n), dtype=bool)
    for (i, j) in basis:
        basic_mask[i, j] = True
    cost_rows = cost.tolist()

    degenerate_run = 0
    bland = False
    for _ in range(max_iter):
        u_list, v_list = _compute_duals(cost_rows, adjacency, m, n)
        u = np.array(u_list)
        v = np.array(v_list)
        reduced = cost - u[:, None] - v[None, :]
        reduced[basic_mask] = 0.0
        if bland:
            candidates = np.argwhere(reduced < -tol)
            if candidates.size == 0:
                return flows, float((flows * cost).sum()), u, v
            ei, ej = (int(candidates[0][0]), int(candidates[0][1]))
        else:
            flat = int(np.argmin(reduced))
            ei, ej = divmod(flat, n)
            if reduced[ei, ej] >= -tol:
                return flows, float((flows * cost).sum()), u, v

        path = _tree_path(adjacency, ei, m + ej)
        # Cells along the alternating cycle; the entering cell is +, the
        # first path edge shares row ei with it, so path signs start at -.
        minus_cells = []
        plus_cells = []
        for step, (node_a, node_b) in enumerate(zip(path, path[1:])):
            cell = (node_a, node_b - m) if node_a < m else (node_b, node_a - m)
            (minus_cells if step % 2 == 0 else plus_cells).append(cell)

        theta = min(flows[c] for c in minus_cells)
        if bland:
            leaving = min(c for c in minus_cells if flows[c] <= theta)
        else:
            leaving = next(c for c in minus_cells if flows[c] <= theta)
        for c in plus_cells:
            flows[c] += theta
        for c in minus_cells:
            flows[c] = max(flows[c] - theta, 0.0)
        flows[ei, ej] = theta
        flows[leaving] = 0.0

        basis_set.remove(leaving)
        basis_set.add((ei, ej))
        basic_mask[leaving] = False
        basic_mask[ei, ej] = True
        adjacency[leaving[0]].discard(m + leaving[1])
        adjacency[m + leaving[1]].discard(leaving[0])
        adjacency[ei].add(m + ej)
        adjacency[m + ej].add(ei)

        if theta <= tol:
            degenerate_run += 1
            if degenerate_run > 2 * (m + n) + 50:
                bland = True
        else:
            degenerate_run = 0
            bland = False

    raise ConvergenceError(
        f"transportation simplex exceeded {max_iter} pivots on a {m}x{n} problem",
        last_iterate=flows, iterations=max_iter,
    )
