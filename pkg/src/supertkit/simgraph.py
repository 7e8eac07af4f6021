"""Similarity matrices and the graph algorithms that rank or group sentences.

Everything here is a pure function of its inputs; parallel use across topics
is safe.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateInputError, ValidationError

_SYM_TOL = 1e-9


@dataclass(frozen=True)
class SimilarityMatrix:
    n: int
    values: np.ndarray      # (n, n), symmetric, unit diagonal, entries in [-1, 1]

    def validate(self):
        v = self.values
        if v.shape != (self.n, self.n):
            raise ValidationError(f"similarity matrix shape {v.shape} != ({self.n}, {self.n})")
        if np.max(np.abs(v - v.T)) > _SYM_TOL:
            raise ValidationError("similarity matrix is not symmetric")
        if np.max(np.abs(np.diag(v) - 1.0)) > _SYM_TOL:
            raise ValidationError("similarity matrix diagonal is not 1")
        if np.min(v) < -1.0 - _SYM_TOL or np.max(v) > 1.0 + _SYM_TOL:
            raise ValidationError("similarity entries outside [-1, 1]")
        return self


@dataclass(frozen=True)
class SalienceScores:
    scores: np.ndarray
    method: str             # "lexrank" or "pacsum"


@dataclass(frozen=True)
class Clustering:
    exemplar_of: np.ndarray     # exemplar index for every point
    exemplars: tuple            # sorted exemplar indices
    converged: bool = True

    def validate(self):
        for e in self.exemplars:
            if self.exemplar_of[e] != e:
                raise ValidationError(f"exemplar {e} not assigned to itself")
        members = set(self.exemplars)
        for i, e in enumerate(self.exemplar_of):
            if int(e) not in members:
                raise ValidationError(f"point {i} assigned to non-exemplar {e}")
        return self


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise DegenerateInputError("cosine of a zero-norm vector is undefined")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def similarity_matrix(vectors) -> SimilarityMatrix:
    mat = np.asarray(vectors, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] < 1:
        raise ValidationError("need a non-empty 2-d array of vectors")
    norms = np.linalg.norm(mat, axis=1)
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        raise DegenerateInputError(f"zero-norm vector at index {int(bad[0])}")
    unit = mat / norms[:, None]
    values = np.clip(unit @ unit.T, -1.0, 1.0)
    values = (values + values.T) / 2.0
    np.fill_diagonal(values, 1.0)
    return SimilarityMatrix(n=mat.shape[0], values=values).validate()


def lexrank(sim: SimilarityMatrix, damping: float = 0.85, tol: float = 1e-6,
            max_iter: int = 100) -> SalienceScores:
    """Stationary distribution of a damped random walk on the similarity graph.

    Negative similarities are clamped to zero before row normalization so
    transition probabilities stay non-negative; no edge threshold is applied.
    """
    n = sim.n
    if n == 1:
        return SalienceScores(scores=np.array([1.0]), method="lexrank")
    weights = np.maximum(sim.values, 0.0)
    row_sums = weights.sum(axis=1)
    # A row can only be all-zero if the caller bypassed the cosine
    # constructor; fall back to a uniform row.
    zero_rows = row_sums == 0.0
    if np.any(zero_rows):
        weights[zero_rows] = 1.0
        row_sums[zero_rows] = float(n)
    transition = damping * (weights / row_sums[:, None]) + (1.0 - damping) / n
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        p_next = transition.T @ p
        p_next /= p_next.sum()
        if float(np.abs(p_next - p).sum()) < tol:
            return SalienceScores(scores=p_next, method="lexrank")
        p = p_next
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        last_iterate=p, iterations=max_iter,
    )


def pacsum_scores(sim: SimilarityMatrix, lambda_succ: float = 1.0,
                  lambda_prec: float = 1.0) -> SalienceScores:
    """Average similarity to succeeding sentences minus to preceding ones.

    Rows must be in document position order; empty averages count as zero.
    """
    n = sim.n
    values = sim.values
    scores = np.zeros(n)
    for i in range(n):
        succ = values[i, i + 1:]
        prec = values[i, :i]
        s = succ.mean() if succ.size else 0.0
        p = prec.mean() if prec.size else 0.0
        scores[i] = lambda_succ * s - lambda_prec * p
    return SalienceScores(scores=scores, method="pacsum")


def affinity_propagation(sim: SimilarityMatrix, preference="median",
                         damping: float = 0.5, max_iter: int = 200,
                         stable_iters: int = 15) -> Clustering:
    """Exemplar clustering by responsibility/availability message passing.

    The diagonal carries the preference (default: median off-diagonal
    similarity). Terminates once the exemplar set is unchanged for
    ``stable_iters`` sweeps; if ``max_iter`` is hit first the current
    assignment is returned with ``converged=False`` rather than raising, so
    callers always get a usable clustering.
    """
    n = sim.n
    if n == 0:
        raise ValidationError("cannot cluster zero points")
    if not (0.0 <= damping < 1.0):
        raise ValidationError(f"damping must be in [0, 1), got {damping}")
    if n == 1:
        return Clustering(exemplar_of=np.array([0]), exemplars=(0,)).validate()

    S = sim.values.astype(np.float64).copy()
    if preference == "median":
        off_diag = S[~np.eye(n, dtype=bool)]
        pref = float(np.median(off_diag))
    else:
        pref = float(preference)
    np.fill_diagonal(S, pref)
    # Deterministic symmetry-breaking jitter, as in the reference
    # implementations, to keep identical points from oscillating.
    scale = max(1.0, float(np.max(np.abs(S))))
    S = S + 1e-12 * scale * np.random.default_rng(0).standard_normal((n, n))

    R = np.zeros((n, n))
    A = np.zeros((n, n))
    idx = np.arange(n)
    stable = 0
    last_exemplars = None
    converged = False
    for _ in range(max_iter):
        # responsibilities
        AS = A + S
        first = np.argmax(AS, axis=1)
        best = AS[idx, first]
        AS[idx, first] = -np.inf
        second = AS.max(axis=1)
        R_new = S - best[:, None]
        R_new[idx, first] = S[idx, first] - second
        R = damping * R + (1.0 - damping) * R_new
        # availabilities; col[k] = r(k,k) + sum of positive responsibilities
        Rp = np.maximum(R, 0.0)
        Rp[idx, idx] = R[idx, idx]
        col = Rp.sum(axis=0)
        A_new = np.minimum(0.0, col[None, :] - Rp)
        A_new[idx, idx] = col - Rp[idx, idx]
        A = damping * A + (1.0 - damping) * A_new

        exemplars = np.nonzero(np.diag(A) + np.diag(R) > 0)[0]
        if last_exemplars is not None and np.array_equal(exemplars, last_exemplars):
            stable += 1
            if stable >= stable_iters and exemplars.size > 0:
                converged = True
                break
        else:
            stable = 0
        last_exemplars = exemplars

    exemplars = np.nonzero(np.diag(A) + np.diag(R) > 0)[0]
    if exemplars.size == 0:
        exemplars = np.array([int(np.argmax(np.diag(A) + np.diag(R)))])
    assignment = exemplars[np.argmax(sim.values[:, exemplars], axis=1)]
    assignment[exemplars] = exemplars
    return Clustering(
        exemplar_of=assignment,
        exemplars=tuple(int(e) for e in exemplars),
        converged=converged,
    ).validate()


def maximal_cliques(adjacency):
    """All maximal cliques of size >= 2 (Bron-Kerbosch with pivoting), plus
    the isolated vertices as a separate singleton list.

    Returns (cliques, singletons) with deterministic ordering.
    """
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    if adj.shape != (n, n):
        raise ValidationError("adjacency must be square")
    if np.any(adj != adj.T):
        raise ValidationError("adjacency must be symmetric")
    if np.any(np.diag(adj)):
        raise ValidationError("adjacency diagonal must be false")
    neighbors = [frozenset(np.nonzero(adj[i])[0].tolist()) for i in range(n)]
    singletons = [i for i in range(n) if not neighbors[i]]
    cliques = []

    def expand(clique, candidates, excluded):
        if not candidates and not excluded:
            if len(clique) >= 2:
                cliques.append(frozenset(clique))
            return
        pivot = max(sorted(candidates | excluded),
                    key=lambda u: len(candidates & neighbors[u]))
        for v in sorted(candidates - neighbors[pivot]):
            expand(clique + [v], candidates & neighbors[v], excluded & neighbors[v])
            candidates = candidates - {v}
            excluded = excluded | {v}

    expand([], frozenset(i for i in range(n) if neighbors[i]), frozenset())
    cliques.sort(key=lambda c: tuple(sorted(c)))
    return cliques, singletons


def connected_components(adjacency):
    """Components of size >= 2 plus isolated vertices, same shape of result
    as maximal_cliques (a coarser grouping some pipelines prefer)."""
    adj = np.asarray(adjacency, dtype=bool)
    n = adj.shape[0]
    seen = [False] * n
    groups = []
    singletons = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        component = []
        while stack:
            node = stack.pop()
            component.append(node)
            for other in np.nonzero(adj[node])[0]:
                if not seen[other]:
                    seen[other] = True
                    stack.append(int(other))
        if len(component) >= 2:
            groups.append(frozenset(component))
        else:
            singletons.append(component[0])
    groups.sort(key=lambda c: tuple(sorted(c)))
    return groups, singletons
