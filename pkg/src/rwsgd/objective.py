"""Synthetic two-class data and the regularized logistic objective.

Each node carries one labelled feature vector. The local loss at a node is

    f_i(w) = n * log(1 + exp(-y_i x_i^T w)) + 0.5 * ||w||^2

for a network of n nodes, so the global loss (the arithmetic mean of the
local losses) is sum_i log(1 + exp(-y_i x_i^T w)) + 0.5 * ||w||^2. With this
convention the gradient-Lipschitz constant of f_i is exactly
1 + (n/4) * ||x_i||^2, which doubles as the node's importance weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class NodeData:
    """One node's sample: features, a +/-1 label, and its smoothness constant."""

    x: np.ndarray
    y: int
    lipschitz: float


@dataclass(frozen=True)
class FeasibleSet:
    """Closed L2 ball of the given radius centred at the origin."""

    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ConfigurationError(f"feasible radius must be positive and finite, got {self.radius}")


@dataclass(frozen=True)
class Dataset:
    """Per-node data held as arrays: features (n, d), labels (n,), lipschitz (n,).

    ``mu`` and ``v`` record the generating distribution when known (None for
    datasets loaded from CSV, which stores only labels and features).
    """

    features: np.ndarray
    labels: np.ndarray
    lipschitz: np.ndarray
    mu: np.ndarray | None = None
    v: float | None = None

    def __post_init__(self):
        n, _ = self.features.shape
        if self.labels.shape != (n,) or self.lipschitz.shape != (n,):
            raise ConfigurationError("dataset arrays disagree on the number of nodes")
        if not np.all(np.abs(self.labels) == 1.0):
            raise ConfigurationError("labels must be +1 or -1")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def node(self, i: int) -> NodeData:
        return NodeData(self.features[i], int(self.labels[i]), float(self.lipschitz[i]))

    @property
    def nodes(self) -> list[NodeData]:
        return [self.node(i) for i in range(self.n)]


def lipschitz_constant(x: np.ndarray, n: int) -> float:
    """Gradient-Lipschitz constant 1 + (n/4) ||x||^2 of the local loss."""
    return 1.0 + 0.25 * n * float(x @ x)


def generate_dataset(n: int, d: int, mu, v: float, seed: int) -> Dataset:
    """Draw the synthetic dataset: y uniform on {-1, +1}, x ~ Normal(y*mu, v*I_d).

    ``mu`` may be a scalar (broadcast to all coordinates) or a length-d
    vector. Deterministic in ``seed``.
    """
    if d < 1:
        raise ConfigurationError(f"dimension must be >= 1, got d={d}")
    if not v > 0.0:
        raise ConfigurationError(f"variance must be positive, got v={v}")
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (d,)).copy()
    rng = np.random.default_rng(seed)
    labels = np.where(rng.integers(0, 2, n) == 1, 1.0, -1.0)
    features = labels[:, None] * mu + math.sqrt(v) * rng.standard_normal((n, d))
    lip = 1.0 + 0.25 * n * np.einsum("ij,ij->i", features, features)
    return Dataset(features, labels, lip, mu=mu, v=float(v))


def softplus(z: float) -> float:
    """log(1 + exp(z)) without overflow: max(z, 0) + log1p(exp(-|z|))."""
    return max(z, 0.0) + math.log1p(math.exp(-abs(z)))


def sigmoid_neg(z: float) -> float:
    """sigmoid(-z) = 1 / (1 + exp(z)), evaluated stably for any z."""
    if z >= 0.0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def local_loss(w: np.ndarray, node: NodeData, n: int) -> float:
    z = float(node.y) * float(node.x @ w)
    return n * softplus(-z) + 0.5 * float(w @ w)


def local_gradient(w: np.ndarray, node: NodeData, n: int) -> np.ndarray:
    z = float(node.y) * float(node.x @ w)
    return -(n * float(node.y) * sigmoid_neg(z)) * node.x + w


def global_loss(w: np.ndarray, dataset: Dataset) -> float:
    """Mean of the local losses over all nodes."""
    z = dataset.labels * (dataset.features @ w)
    n = dataset.n
    return n * float(np.mean(np.logaddexp(0.0, -z))) + 0.5 * float(w @ w)


def global_gradient(w: np.ndarray, dataset: Dataset) -> np.ndarray:
    """Mean of the local gradients over all nodes."""
    z = dataset.labels * (dataset.features @ w)
    s = 1.0 / (1.0 + np.exp(np.clip(z, -500.0, 500.0)))  # sigmoid(-z)
    return -(dataset.features * (dataset.labels * s)[:, None]).sum(axis=0) + w


def per_node_gradients(w: np.ndarray, dataset: Dataset) -> np.ndarray:
    """Stacked local gradients, one row per node."""
    z = dataset.labels * (dataset.features @ w)
    s = 1.0 / (1.0 + np.exp(np.clip(z, -500.0, 500.0)))
    n = dataset.n
    return -(dataset.features * (n * dataset.labels * s)[:, None]) + w


def residual_second_moment(w: np.ndarray, dataset: Dataset) -> float:
    """Mean squared local-gradient norm at ``w`` (the residual diagnostic)."""
    grads = per_node_gradients(w, dataset)
    return float(np.mean(np.einsum("ij,ij->i", grads, grads)))


def project(w: np.ndarray, feasible: FeasibleSet) -> np.ndarray:
    """Euclidean projection onto the ball; returns ``w`` itself when inside."""
    norm = float(np.linalg.norm(w))
    if norm <= feasible.radius:
        return w
    return w * (feasible.radius / norm)


def save_csv(dataset: Dataset, path) -> None:
    """CSV with header y,x0,...,x{d-1}; Lipschitz constants are never stored."""
    d = dataset.d
    header = "y," + ",".join(f"x{j}" for j in range(d))
    lines = [header]
    for i in range(dataset.n):
        coords = ",".join(repr(float(v)) for v in dataset.features[i])
        lines.append(f"{int(dataset.labels[i])},{coords}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_csv(path) -> Dataset:
    """Load a dataset CSV, recomputing the Lipschitz constants from scratch."""
    with open(path, encoding="ascii") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines or not lines[0].startswith("y,"):
        raise ConfigurationError(f"malformed dataset CSV {path}: bad header")
    rows = [line.split(",") for line in lines[1:]]
    try:
        labels = np.array([float(int(r[0])) for r in rows])
        features = np.array([[float(v) for v in r[1:]] for r in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigurationError(f"malformed dataset CSV {path}: {exc}") from exc
    n = len(rows)
    lip = 1.0 + 0.25 * n * np.einsum("ij,ij->i", features, features)
    return Dataset(features, labels, lip)
