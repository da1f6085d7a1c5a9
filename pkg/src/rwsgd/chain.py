"""Metropolis-Hastings chains on graphs: transition matrices, stationary
distributions, the spectral quantity lambda_P, and single walk steps.

Two acceptance rules are supported. The uniform rule targets the uniform
stationary distribution; the weighted rule targets visit frequencies
proportional to a positive per-node weight vector (the gradient-Lipschitz
constants, or their privatized versions). Proposals are always uniform over
the proper neighbours; laziness enters only through rejection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError
from .graph import Graph

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-13
STATIONARY_MAX_ITER = 10**6
REVERSIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class TransitionMatrix:
    """Dense row-stochastic matrix of a walk on n states."""

    n: int
    p: np.ndarray

    def __post_init__(self):
        if self.p.shape != (self.n, self.n):
            raise ConfigurationError(f"transition matrix shape {self.p.shape} != ({self.n}, {self.n})")
        if np.any(self.p < 0.0) or np.any(self.p > 1.0):
            raise ConfigurationError("transition probabilities must lie in [0, 1]")
        err = float(np.max(np.abs(self.p.sum(axis=1) - 1.0)))
        if err > ROW_SUM_TOL:
            raise ConfigurationError(f"rows must sum to 1 (max deviation {err:.3g})")

    def supported_on(self, g: Graph) -> bool:
        """True when every positive off-diagonal entry sits on a graph edge."""
        for i in range(self.n):
            allowed = set(g.adjacency[i])
            for j in np.nonzero(self.p[i] > 0.0)[0]:
                if j != i and int(j) not in allowed:
                    return False
        return True


@dataclass(frozen=True)
class StationaryDistribution:
    """Probability vector fixed under a transition matrix."""

    pi: np.ndarray

    def __post_init__(self):
        if np.any(self.pi <= 0.0):
            raise NumericalError("stationary distribution must be strictly positive")
        if abs(float(self.pi.sum()) - 1.0) > ROW_SUM_TOL:
            raise NumericalError("stationary distribution must sum to 1")


def accept_uniform(deg_i: int, deg_j: int) -> float:
    """Acceptance min(1, deg(i)/deg(j)) of the uniform-target rule."""
    return min(1.0, deg_i / deg_j)


def accept_weighted(l_i: float, l_j: float, deg_i: int, deg_j: int) -> float:
    """Acceptance min(1, (L_j/L_i) * (deg(i)/deg(j))) of the weighted rule."""
    return min(1.0, (l_j / l_i) * (deg_i / deg_j))


def _is_bipartite(g: Graph) -> bool:
    color = [-1] * g.n
    color[0] = 0
    stack = [0]
    while stack:
        u = stack.pop()
        for w in g.adjacency[u]:
            if color[w] == -1:
                color[w] = color[u] ^ 1
                stack.append(w)
            elif color[w] == color[u]:
                return False
    return True


def _check_aperiodic(g: Graph, p: np.ndarray) -> None:
    # A positive holding probability somewhere, or an odd cycle, rules out
    # periodicity for a connected chain supported on all graph edges.
    if float(np.max(np.diag(p))) > 0.0:
        return
    if g.n > 1 and not _is_bipartite(g):
        return
    raise ConfigurationError(
        "chain is periodic: zero holding probability everywhere on a bipartite graph"
    )


def _build_matrix(g: Graph, weights: np.ndarray | None) -> TransitionMatrix:
    n = g.n
    deg = g.degrees
    p = np.zeros((n, n))
    for i in range(n):
        di = deg[i]
        for j in g.adjacency[i]:
            if weights is None:
                # min(1, di/dj) / di == 1 / max(di, dj), which is also
                # bitwise symmetric in floating point.
                p[i, j] = 1.0 / max(di, deg[j])
            else:
                # min(1, (wj/wi)(di/dj)) / di, written so that equal weights
                # reproduce the uniform matrix bit for bit.
                p[i, j] = min(1.0 / di, (weights[j] / weights[i]) / deg[j])
        row = float(p[i].sum())
        p[i, i] = max(0.0, 1.0 - row)
    m = TransitionMatrix(n, p)
    _check_aperiodic(g, p)
    return m


def build_uniform_matrix(g: Graph) -> TransitionMatrix:
    """Transition matrix of the uniform-target walk (a symmetric matrix)."""
    return _build_matrix(g, None)


def build_weighted_matrix(g: Graph, weights) -> TransitionMatrix:
    """Transition matrix of the weighted walk targeting pi(i) ~ weights[i]."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (g.n,) or np.any(weights <= 0.0):
        raise ConfigurationError("weights must be a positive vector of length n")
    return _build_matrix(g, weights)


def stationary_distribution(
    m: TransitionMatrix,
    tol: float = STATIONARY_TOL,
    max_iter: int = STATIONARY_MAX_ITER,
) -> StationaryDistribution:
    """Left fixed point of the matrix by power iteration from uniform.

    Iterates until successive iterates differ by less than ``tol`` in L1;
    raises "chain failed to mix" past ``max_iter`` (a periodic or reducible
    chain).
    """
    v = np.full(m.n, 1.0 / m.n)
    for _ in range(max_iter):
        nxt = v @ m.p
        if float(np.abs(nxt - v).sum()) < tol:
            return StationaryDistribution(nxt / nxt.sum())
        v = nxt
    raise NumericalError(f"chain failed to mix within {max_iter} power iterations")


def lambda_p(m: TransitionMatrix, stat: StationaryDistribution) -> float:
    """Spectral quantity (max{|lambda_2|, |lambda_n|} + 1) / 2.

    Eigenvalues come from the similarity transform S = D^{1/2} P D^{-1/2}
    with D = diag(pi), which is symmetric exactly when the chain is
    reversible with respect to pi; asymmetry beyond tolerance raises
    "chain not reversible".
    """
    if m.n == 1:
        raise ConfigurationError("lambda_p is undefined for a single-state chain")
    root = np.sqrt(stat.pi)
    s = (root[:, None] * m.p) / root[None, :]
    asym = float(np.max(np.abs(s - s.T)))
    if asym > REVERSIBILITY_TOL:
        raise NumericalError(f"chain not reversible: symmetrization residual {asym:.3g}")
    evals = np.linalg.eigvalsh(0.5 * (s + s.T))  # ascending
    second = max(abs(float(evals[-2])), abs(float(evals[0])))
    return 0.5 * (second + 1.0)


def walk_step(
    g: Graph,
    current: int,
    rng: np.random.Generator,
    weights: np.ndarray | None = None,
) -> int:
    """One Metropolis-Hastings move from ``current``.

    Proposes a uniform proper neighbour and accepts with the uniform or
    weighted rule; on rejection the walk holds (the implicit self-loop).
    Works directly off the graph, never off a dense matrix, and is
    distributionally identical to one step of the corresponding matrix.
    """
    if not 0 <= current < g.n:
        raise IndexError(f"node index {current} out of range for n={g.n}")
    nbrs = g.adjacency[current]
    deg_i = len(nbrs)
    j = nbrs[int(rng.random() * deg_i)]
    if weights is None:
        a = accept_uniform(deg_i, g.degree(j))
    else:
        a = accept_weighted(weights[current], weights[j], deg_i, g.degree(j))
    if rng.random() <= a:
        return j
    return current
