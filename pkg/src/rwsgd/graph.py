"""Communication graphs: Erdos-Renyi generation, validation, edge-list IO."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

MAX_CONNECTIVITY_ATTEMPTS = 100


def _reachable_count(n: int, adjacency) -> int:
    if n == 0:
        return 0
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for w in adjacency[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph over nodes 0..n-1.

    ``adjacency[i]`` holds the sorted proper neighbours of node ``i``; the
    node itself never appears in its own list. Every node additionally has
    an implicit self-loop, which the Metropolis-Hastings walk realizes by
    rejection instead of an explicit adjacency entry. Instances are
    immutable and safe to share across concurrent runs.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"graph needs at least one node, got n={self.n}")
        if len(self.adjacency) != self.n:
            raise ConfigurationError(
                f"adjacency has {len(self.adjacency)} rows for n={self.n} nodes"
            )
        neighbour_sets = []
        for i, row in enumerate(self.adjacency):
            if i in row:
                raise ConfigurationError(f"node {i} appears in its own adjacency list")
            if any(j < 0 or j >= self.n for j in row):
                raise ConfigurationError(f"node {i} has a neighbour index out of range")
            s = set(row)
            if len(s) != len(row):
                raise ConfigurationError(f"node {i} has duplicate neighbours")
            neighbour_sets.append(s)
        for i, s in enumerate(neighbour_sets):
            for j in s:
                if i not in neighbour_sets[j]:
                    raise ConfigurationError(f"edge ({i},{j}) is not symmetric")
        if _reachable_count(self.n, self.adjacency) != self.n:
            raise ConfigurationError(f"graph not connected: n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a graph from an iterable of undirected (i, j) pairs."""
        rows = [set() for _ in range(n)]
        for i, j in edges:
            if i == j:
                continue  # self-loops are implicit
            if not (0 <= i < n and 0 <= j < n):
                raise ConfigurationError(f"edge ({i},{j}) out of range for n={n}")
            rows[i].add(j)
            rows[j].add(i)
        return cls(n, tuple(tuple(sorted(r)) for r in rows))

    def degree(self, i: int) -> int:
        """Number of proper neighbours of node ``i``."""
        if not 0 <= i < self.n:
            raise IndexError(f"node index {i} out of range for n={self.n}")
        return len(self.adjacency[i])

    def neighbors(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.n:
            raise IndexError(f"node index {i} out of range for n={self.n}")
        return self.adjacency[i]

    @property
    def degrees(self) -> list[int]:
        return [len(row) for row in self.adjacency]

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Proper edges as (i, j) pairs with i < j."""
        return [(i, j) for i in range(self.n) for j in self.adjacency[i] if i < j]


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """Sample a connected Erdos-Renyi G(n, p) graph.

    Each unordered pair is an edge independently with probability ``p``.
    Disconnected samples are rejected and resampled with seed+1, seed+2, ...
    (conditioning on connectivity rather than patching the sample); after
    MAX_CONNECTIVITY_ATTEMPTS failures a "graph not connected" error is
    raised.
    """
    if n < 2:
        raise ConfigurationError(f"erdos_renyi needs n >= 2, got n={n}")
    if not 0.0 < p <= 1.0:
        raise ConfigurationError(f"erdos_renyi needs 0 < p <= 1, got p={p}")
    for attempt in range(MAX_CONNECTIVITY_ATTEMPTS):
        rng = np.random.default_rng(seed + attempt)
        upper = rng.random((n, n)) < p
        adjacency = [[] for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if upper[i, j]:
                    adjacency[i].append(j)
                    adjacency[j].append(i)
        if _reachable_count(n, adjacency) == n:
            return Graph(n, tuple(tuple(row) for row in adjacency))
    raise ConfigurationError(
        "graph not connected: "
        f"n={n}, p={p}, attempts={MAX_CONNECTIVITY_ATTEMPTS}"
    )


def save_edge_list(g: Graph, path) -> None:
    """Write the edge-list format: first line n, then one 'i j' per proper edge (i < j)."""
    lines = [str(g.n)]
    lines += [f"{i} {j}" for i, j in g.edges]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_edge_list(path) -> Graph:
    """Read the edge-list format written by :func:`save_edge_list`."""
    with open(path, encoding="ascii") as fh:
        tokens = [line.split() for line in fh if line.strip()]
    if not tokens or len(tokens[0]) != 1:
        raise ConfigurationError(f"malformed edge list {path}: missing node-count line")
    try:
        n = int(tokens[0][0])
        edges = [(int(a), int(b)) for a, b in tokens[1:]]
    except ValueError as exc:
        raise ConfigurationError(f"malformed edge list {path}: {exc}") from exc
    return Graph.from_edges(n, edges)
