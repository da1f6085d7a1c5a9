"""The optimizers: random-walk SGD in uniform, weighted, and private-weighted
flavours, an asynchronous gossip baseline, and the full-gradient oracle that
pins down the optimum for the trace's optimality gaps.

All variants share one update rule: the active node forms a gradient
estimate from its local data, takes a step of size 1/k^q, and projects back
onto the feasible ball. They differ in how the active node is chosen (the
acceptance rule of the walk) and in how the estimate is scaled. A trace of
the step-size-weighted averaged iterate's optimality gap is recorded on a
decimated grid of iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .errors import ConfigurationError, NumericalError
from .graph import Graph
from .objective import Dataset, FeasibleSet, global_gradient, global_loss, project
from .privacy import MECHANISMS, NoisyLipschitz, PrivacySpec, privatize_all

VARIANTS = ("uniform", "weighted", "private-weighted", "gossip")

DEFAULT_Q = 0.75
DEFAULT_RADIUS = 150.0
DEFAULT_EVAL_EVERY = 100

OPT_TOL = 1e-10
OPT_MAX_ITER = 10**6
_ARMIJO = 1e-4
_NONMONOTONE_WINDOW = 10
_INTERIOR_FRACTION = 0.9


@dataclass(frozen=True)
class RunConfig:
    """Everything one optimizer run needs besides the graph and the data."""

    variant: str
    seed: int
    iterations: int
    q: float = DEFAULT_Q
    feasible_radius: float = DEFAULT_RADIUS
    eval_every: int = DEFAULT_EVAL_EVERY
    privacy: PrivacySpec | None = None
    mechanism: str = "gamma"
    noisy_gradient_scale: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not 0.5 < self.q < 1.0:
            raise ConfigurationError(f"step exponent must satisfy 0.5 < q < 1, got q={self.q}")
        if self.iterations < 0:
            raise ConfigurationError(f"iterations must be nonnegative, got {self.iterations}")
        if not self.feasible_radius > 0.0:
            raise ConfigurationError(f"feasible radius must be positive, got {self.feasible_radius}")
        if self.eval_every < 1:
            raise ConfigurationError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.variant == "private-weighted" and self.privacy is None:
            raise ConfigurationError("private-weighted runs need a PrivacySpec")
        if self.mechanism not in MECHANISMS:
            raise ConfigurationError(f"unknown mechanism {self.mechanism!r}; expected one of {MECHANISMS}")


@dataclass
class RunTrace:
    """Decimated per-iteration record of one run.

    ``gap[r]`` is f(averaged iterate at k[r]) - f(w*); ``comm`` counts
    accepted inter-node handoffs (gossip: one per iteration) and ``comp``
    counts gradient evaluations, both cumulative.
    """

    variant: str
    seed: int
    k: np.ndarray
    node: np.ndarray
    gap: np.ndarray
    comm: np.ndarray
    comp: np.ndarray
    f_star: float
    max_model_norm: float
    privatized: np.ndarray | None = field(default=None, repr=False)

    def gap_at_comp(self, comp: int) -> float:
        """Gap at the last record whose computation count is <= comp."""
        idx = int(np.searchsorted(self.comp, comp, side="right")) - 1
        if idx < 0:
            raise ConfigurationError(f"no record with comp <= {comp}")
        return float(self.gap[idx])


def step_size(k: int, q: float) -> float:
    """Diminishing step 1/k^q for 0.5 < q < 1 (square-summable with log factor)."""
    if k < 1:
        raise ConfigurationError(f"iteration index must be >= 1, got {k}")
    if not 0.5 < q < 1.0:
        raise ConfigurationError(f"step exponent must satisfy 0.5 < q < 1, got q={q}")
    return k ** (-q)


def sgd_update(w: np.ndarray, grad: np.ndarray, gamma: float, feasible: FeasibleSet) -> np.ndarray:
    """One projected step w <- project(w - gamma * grad)."""
    return project(w - gamma * grad, feasible)


def averaged_iterate(steps) -> np.ndarray:
    """Step-size-weighted running average of iterates, in constant memory.

    ``steps`` yields (gamma, w) pairs in iteration order; the result equals
    sum(gamma_m * w_m) / sum(gamma_m).
    """
    wbar = None
    total = 0.0
    for gamma, w in steps:
        total += gamma
        if wbar is None:
            wbar = np.array(w, dtype=float)
        else:
            wbar += (gamma / total) * (w - wbar)
    if wbar is None:
        raise ConfigurationError("averaged_iterate needs at least one step")
    return wbar


def initial_point(rng: np.random.Generator, n: int, d: int, radius: float):
    """Initial model uniform on the radius ball, and initial node uniform on V.

    The model is a normalized Gaussian direction scaled by radius * U^(1/d),
    which is the uniform distribution on the ball.
    """
    direction = rng.standard_normal(d)
    w0 = direction / np.linalg.norm(direction) * radius * rng.random() ** (1.0 / d)
    i0 = int(rng.integers(n))
    return w0, i0


def solve_optimal(
    data: Dataset,
    feasible: FeasibleSet,
    tol: float = OPT_TOL,
    max_iter: int = OPT_MAX_ITER,
):
    """Full-gradient minimizer of the global loss, to gradient norm <= tol.

    Gradient descent with Barzilai-Borwein trial steps safeguarded by a
    nonmonotone Armijo backtracking line search. The global objective is
    1-strongly convex through its ridge term, so the minimizer is unique;
    it must also be interior to the feasible ball (projection inactive),
    otherwise the configured radius is too small.

    Returns (w_star, f_star).
    """
    n, d = data.n, data.d
    x = data.features
    w = np.zeros(d)
    g = global_gradient(w, data)
    f = global_loss(w, data)
    history = [f]
    t = 1.0 / (1.0 + 0.25 * float(np.einsum("ij,ij->i", x, x).sum()))
    for _ in range(max_iter):
        gn2 = float(g @ g)
        if gn2 < tol * tol:
            break
        step = min(max(t, 1e-12), 1e12)
        f_ref = max(history[-_NONMONOTONE_WINDOW:])
        while True:
            w2 = w - step * g
            f2 = global_loss(w2, data)
            if f2 <= f_ref - _ARMIJO * step * gn2 or step < 1e-18:
                break
            step *= 0.5
        g2 = global_gradient(w2, data)
        sv = w2 - w
        yv = g2 - g
        sy = float(sv @ yv)
        t = float(sv @ sv) / sy if sy > 1e-300 else step * 2.0
        w, f, g = w2, f2, g2
        history.append(f)
    else:
        raise NumericalError(
            f"optimum solve failed to reach gradient norm {tol} in {max_iter} iterations"
        )
    if float(np.linalg.norm(w)) >= _INTERIOR_FRACTION * feasible.radius:
        raise ConfigurationError(
            "feasible radius too small: the optimum is not interior "
            f"(|w*|={float(np.linalg.norm(w)):.4g}, radius={feasible.radius})"
        )
    return w, f


def _resolve_reference(data: Dataset, cfg: RunConfig, reference):
    if reference is not None:
        w_star, f_star = reference
        return np.asarray(w_star, dtype=float), float(f_star)
    return solve_optimal(data, FeasibleSet(cfg.feasible_radius))


def _acceptance_table(g: Graph, weights: np.ndarray | None) -> list[list[float]]:
    deg = g.degrees
    table = []
    for i in range(g.n):
        row = []
        for j in g.adjacency[i]:
            ratio = deg[i] / deg[j]
            if weights is not None:
                ratio *= weights[j] / weights[i]
            row.append(min(1.0, ratio))
        table.append(row)
    return table


def _run_walk(
    g: Graph,
    data: Dataset,
    cfg: RunConfig,
    reference,
    walk_weights: np.ndarray | None,
    gradient_scale: np.ndarray | None,
    privatized: np.ndarray | None = None,
) -> RunTrace:
    if data.n != g.n:
        raise ConfigurationError(f"dataset has {data.n} nodes but graph has {g.n}")
    w_star, f_star = _resolve_reference(data, cfg, reference)
    n, d = data.n, data.d
    radius = cfg.feasible_radius
    radius_sq = radius * radius
    q = cfg.q
    iterations = cfg.iterations
    eval_every = cfg.eval_every

    init_rng = rngmod.stream_rng(cfg.seed, "init")
    walk_rng = rngmod.stream_rng(cfg.seed, "walk")
    w, i = initial_point(init_rng, n, d, radius)

    adjacency = [list(row) for row in g.adjacency]
    deg = g.degrees
    acc = _acceptance_table(g, walk_weights)
    scale = (
        [1.0] * n if gradient_scale is None else [float(v) for v in gradient_scale]
    )
    labels = data.labels
    coef = [float(n * labels[j]) for j in range(n)]
    rows = [data.features[j].copy() for j in range(n)]

    ks = [0]
    nodes = [i]
    gaps = [global_loss(w, data) - f_star]
    comms = [0]
    comps = [0]

    wbar = np.zeros(d)
    tmp = np.empty(d)
    gamma_sum = 0.0
    comm = 0
    max_norm_sq = float(w @ w)
    rand = walk_rng.random

    for k in range(1, iterations + 1):
        gamma = k ** (-q)
        gamma_sum += gamma
        # averaged iterate over w^(1)..w^(k): fold in the pre-update model
        np.subtract(w, wbar, out=tmp)
        tmp *= gamma / gamma_sum
        wbar += tmp
        # local gradient step, fused: w <- (1 - c) w + (c n y s) x with c = gamma*scale
        x = rows[i]
        z = labels[i] * float(x @ w)
        if z >= 0.0:
            e = math.exp(-z)
            s = e / (1.0 + e)
        else:
            s = 1.0 / (1.0 + math.exp(z))
        c = gamma * scale[i]
        w *= 1.0 - c
        np.multiply(x, c * coef[i] * s, out=tmp)
        w += tmp
        norm_sq = float(w @ w)
        if norm_sq > radius_sq:
            w *= radius / math.sqrt(norm_sq)
            norm_sq = radius_sq
        if norm_sq > max_norm_sq:
            max_norm_sq = norm_sq
        if k % eval_every == 0 or k == iterations:
            ks.append(k)
            nodes.append(i)
            gaps.append(global_loss(wbar, data) - f_star)
            comms.append(comm)
            comps.append(k)
        # Metropolis-Hastings move
        deg_i = deg[i]
        u = rand()
        idx = int(u * deg_i)
        if rand() <= acc[i][idx]:
            i = adjacency[i][idx]
            comm += 1

    return RunTrace(
        variant=cfg.variant,
        seed=cfg.seed,
        k=np.array(ks, dtype=np.int64),
        node=np.array(nodes, dtype=np.int64),
        gap=np.array(gaps),
        comm=np.array(comms, dtype=np.int64),
        comp=np.array(comps, dtype=np.int64),
        f_star=f_star,
        max_model_norm=math.sqrt(max_norm_sq),
        privatized=privatized,
    )


def run_uniform(g: Graph, data: Dataset, cfg: RunConfig, reference=None) -> RunTrace:
    """Random-walk SGD with the uniform-target acceptance rule."""
    if cfg.variant != "uniform":
        raise ConfigurationError(f"run_uniform got variant {cfg.variant!r}")
    return _run_walk(g, data, cfg, reference, walk_weights=None, gradient_scale=None)


def run_weighted(g: Graph, data: Dataset, cfg: RunConfig, reference=None) -> RunTrace:
    """Random-walk SGD with importance weights L_i and rescaled gradients.

    The walk targets visit frequencies proportional to the smoothness
    constants and each local gradient is scaled by mean(L)/L_i, which keeps
    the estimate unbiased in the stationary regime.
    """
    if cfg.variant != "weighted":
        raise ConfigurationError(f"run_weighted got variant {cfg.variant!r}")
    lip = data.lipschitz
    scale = float(lip.mean()) / lip
    return _run_walk(g, data, cfg, reference, walk_weights=lip, gradient_scale=scale)


def run_private(
    g: Graph,
    data: Dataset,
    cfg: RunConfig,
    privacy_rng: np.random.Generator | None = None,
    reference=None,
    noisy: NoisyLipschitz | None = None,
) -> RunTrace:
    """Weighted random-walk SGD walking on privatized constants.

    Each node's constant is privatized exactly once up front; the fixed
    noisy values drive the acceptance rule for the whole run, while the
    gradient estimate keeps the true mean(L)/L_i scaling (set
    ``noisy_gradient_scale`` to scale by the noisy values instead).
    """
    if cfg.variant != "private-weighted":
        raise ConfigurationError(f"run_private got variant {cfg.variant!r}")
    assert cfg.privacy is not None  # enforced by RunConfig
    if noisy is None:
        if privacy_rng is None:
            privacy_rng = rngmod.stream_rng(cfg.seed, "privacy")
        noisy = privatize_all(data.lipschitz, cfg.privacy, cfg.mechanism, privacy_rng)
    values = noisy.values
    if cfg.noisy_gradient_scale:
        scale = float(values.mean()) / values
    else:
        lip = data.lipschitz
        scale = float(lip.mean()) / lip
    return _run_walk(
        g, data, cfg, reference,
        walk_weights=values, gradient_scale=scale, privatized=values,
    )


def run_gossip(g: Graph, data: Dataset, cfg: RunConfig, reference=None) -> RunTrace:
    """Asynchronous gossip baseline.

    Per iteration one edge activates uniformly at random; both endpoints
    take a local projected SGD step on their own models, then exchange and
    average them. The trace follows the network-average model's weighted
    running average; each iteration costs one communication and two
    gradient computations.
    """
    if cfg.variant != "gossip":
        raise ConfigurationError(f"run_gossip got variant {cfg.variant!r}")
    if data.n != g.n:
        raise ConfigurationError(f"dataset has {data.n} nodes but graph has {g.n}")
    w_star, f_star = _resolve_reference(data, cfg, reference)
    n, d = data.n, data.d
    radius = cfg.feasible_radius
    radius_sq = radius * radius
    q = cfg.q
    iterations = cfg.iterations
    eval_every = cfg.eval_every

    init_rng = rngmod.stream_rng(cfg.seed, "init")
    walk_rng = rngmod.stream_rng(cfg.seed, "walk")
    w0, i0 = initial_point(init_rng, n, d, radius)

    edges = g.edges
    n_edges = len(edges)
    labels = data.labels
    x_rows = data.features
    models = np.tile(w0, (n, 1))
    model_sum = models.sum(axis=0)
    wbar = np.zeros(d)
    gamma_sum = 0.0
    max_norm_sq = float(w0 @ w0)
    rand = walk_rng.random

    ks = [0]
    nodes = [i0]
    gaps = [global_loss(w0, data) - f_star]
    comms = [0]
    comps = [0]

    for k in range(1, iterations + 1):
        gamma = k ** (-q)
        gamma_sum += gamma
        wbar += (gamma / gamma_sum) * (model_sum / n - wbar)
        a, b = edges[int(rand() * n_edges)]
        for idx in (a, b):
            x = x_rows[idx]
            w_old = models[idx]
            z = labels[idx] * (x @ w_old)
            if z >= 0.0:
                e = math.exp(-z)
                s = e / (1.0 + e)
            else:
                s = 1.0 / (1.0 + math.exp(z))
            grad = -(n * labels[idx] * s) * x + w_old
            w_new = w_old - gamma * grad
            norm_sq = float(w_new @ w_new)
            if norm_sq > radius_sq:
                w_new *= radius / math.sqrt(norm_sq)
                norm_sq = radius_sq
            if norm_sq > max_norm_sq:
                max_norm_sq = norm_sq
            model_sum += w_new - w_old
            models[idx] = w_new
        avg = 0.5 * (models[a] + models[b])
        model_sum += 2.0 * avg - models[a] - models[b]
        models[a] = avg
        models[b] = avg.copy()
        if k % eval_every == 0 or k == iterations:
            ks.append(k)
            nodes.append(a)
            gaps.append(global_loss(wbar, data) - f_star)
            comms.append(k)
            comps.append(2 * k)

    return RunTrace(
        variant=cfg.variant,
        seed=cfg.seed,
        k=np.array(ks, dtype=np.int64),
        node=np.array(nodes, dtype=np.int64),
        gap=np.array(gaps),
        comm=np.array(comms, dtype=np.int64),
        comp=np.array(comps, dtype=np.int64),
        f_star=f_star,
        max_model_norm=math.sqrt(max_norm_sq),
    )


_RUNNERS = {
    "uniform": run_uniform,
    "weighted": run_weighted,
    "private-weighted": run_private,
    "gossip": run_gossip,
}


def run_variant(g: Graph, data: Dataset, cfg: RunConfig, reference=None) -> RunTrace:
    """Dispatch to the run function matching ``cfg.variant``."""
    return _RUNNERS[cfg.variant](g, data, cfg, reference=reference)
