"""Experiment orchestration: configuration, seed sweeps, and CSV reports.

Outputs are plot-ready CSVs. Every file embeds the fully resolved
configuration as '# key = value' comment lines so any number in it can be
regenerated from the file alone.
"""

from __future__ import annotations

import configparser
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import (
    DEFAULT_EVAL_EVERY,
    DEFAULT_Q,
    DEFAULT_RADIUS,
    RunConfig,
    RunTrace,
    run_variant,
    solve_optimal,
)
from .chain import build_uniform_matrix, build_weighted_matrix, lambda_p, stationary_distribution
from .errors import ConfigurationError
from .graph import Graph, erdos_renyi, save_edge_list
from .objective import Dataset, FeasibleSet, generate_dataset, residual_second_moment
from .privacy import MECHANISMS, PrivacySpec, delta_bound_branches, privatize_all, solve_noise_scale
from .rng import stream_rng, stream_seed

_EXPERIMENT_FIELDS = {
    "n": int,
    "p": float,
    "d": int,
    "v": float,
    "mu": "floats",
    "q": float,
    "iterations": int,
    "eval_every": int,
    "feasible_radius": float,
    "variants": "strings",
    "seeds": "ints",
    "graph_seed": int,
    "data_seed": int,
    "theta": float,
    "epsilon": float,
    "delta": float,
    "mechanism": str,
    "l_min": float,
    "l_max": float,
}

_VARIANT_FIELDS = {
    "q": float,
    "iterations": int,
    "eval_every": int,
    "feasible_radius": float,
    "theta": float,
    "mechanism": str,
    "noisy_gradient_scale": "bool",
}


@dataclass(frozen=True)
class ExperimentSpec:
    """A resolved experiment: graph and data parameters, variants, seeds.

    ``graph_seed`` and ``data_seed`` pin one shared instance across the
    whole sweep; left as None they are derived per master seed from its
    named streams, so every replication draws a fresh graph and dataset.
    """

    n: int = 100
    p: float = 0.3
    d: int = 5
    v: float = 10.0
    mu: tuple[float, ...] = (2.0,)
    q: float = DEFAULT_Q
    iterations: int = 100_000
    eval_every: int = DEFAULT_EVAL_EVERY
    feasible_radius: float = DEFAULT_RADIUS
    variants: tuple[str, ...] = ("uniform", "weighted", "gossip")
    seeds: tuple[int, ...] = tuple(range(1, 11))
    graph_seed: int | None = None
    data_seed: int | None = None
    theta: float | None = None
    epsilon: float = 3.0
    delta: float = 0.03
    mechanism: str = "gamma"
    l_min: float | None = None
    l_max: float | None = None
    variant_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.variants:
            raise ConfigurationError("field 'variants': at least one variant is required")
        if not self.seeds:
            raise ConfigurationError("field 'seeds': at least one seed is required")
        for variant in self.variants:
            self.run_config(variant, self.seeds[0])  # validates eagerly

    def mu_vector(self) -> np.ndarray:
        mu = np.asarray(self.mu, dtype=float)
        if mu.size == 1:
            return np.full(self.d, float(mu))
        if mu.shape != (self.d,):
            raise ConfigurationError(
                f"field 'mu': expected a scalar or {self.d} values, got {mu.size}"
            )
        return mu

    def resolved_graph_seed(self, master_seed: int) -> int:
        return self.graph_seed if self.graph_seed is not None else stream_seed(master_seed, "graph")

    def resolved_data_seed(self, master_seed: int) -> int:
        return self.data_seed if self.data_seed is not None else stream_seed(master_seed, "data")

    def run_config(self, variant: str, seed: int) -> RunConfig:
        params = {
            "q": self.q,
            "iterations": self.iterations,
            "eval_every": self.eval_every,
            "feasible_radius": self.feasible_radius,
            "theta": self.theta,
            "mechanism": self.mechanism,
            "noisy_gradient_scale": False,
        }
        params.update(self.variant_overrides.get(variant, {}))
        theta = params.pop("theta")
        privacy = None
        if variant == "private-weighted":
            if theta is None:
                raise ConfigurationError(
                    "field 'theta': required for private-weighted runs"
                )
            privacy = PrivacySpec(
                theta=theta,
                l_min=self.l_min if self.l_min is not None else 1e-6,
                l_max=self.l_max if self.l_max is not None else 1e9,
                epsilon=self.epsilon,
                delta=self.delta,
            )
        return RunConfig(variant=variant, seed=seed, privacy=privacy, **params)

    def header_items(self) -> list[tuple[str, str]]:
        mu = ",".join(repr(float(x)) for x in np.atleast_1d(np.asarray(self.mu, dtype=float)))
        items = [
            ("n", str(self.n)),
            ("p", repr(self.p)),
            ("d", str(self.d)),
            ("v", repr(self.v)),
            ("mu", mu),
            ("q", repr(self.q)),
            ("iterations", str(self.iterations)),
            ("eval_every", str(self.eval_every)),
            ("feasible_radius", repr(self.feasible_radius)),
            ("variants", ",".join(self.variants)),
            ("seeds", ",".join(str(s) for s in self.seeds)),
            ("graph_seed", "derived" if self.graph_seed is None else str(self.graph_seed)),
            ("data_seed", "derived" if self.data_seed is None else str(self.data_seed)),
        ]
        if "private-weighted" in self.variants:
            items += [
                ("theta", repr(self.theta) if self.theta is not None else ""),
                ("epsilon", repr(self.epsilon)),
                ("delta", repr(self.delta)),
                ("mechanism", self.mechanism),
            ]
        return items


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw.strip()
        if kind == "bool":
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        parts = [tok for tok in raw.replace(",", " ").split() if tok]
        if kind == "ints":
            return tuple(int(tok) for tok in parts)
        if kind == "floats":
            return tuple(float(tok) for tok in parts)
        if kind == "strings":
            return tuple(parts)
    except ValueError as exc:
        raise ConfigurationError(f"field '{key}' in [{section}]: {exc}") from exc
    raise AssertionError(f"unhandled converter {kind}")


def load_config(path) -> ExperimentSpec:
    """Parse the key = value configuration file into an ExperimentSpec."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigurationError(f"cannot read config file {path}")
    kwargs = {}
    overrides = {}
    for section in parser.sections():
        if section == "experiment":
            for key, raw in parser.items(section):
                if key not in _EXPERIMENT_FIELDS:
                    raise ConfigurationError(f"unknown field '{key}' in [experiment]")
                kwargs[key] = _convert(section, key, raw, _EXPERIMENT_FIELDS[key])
        else:
            if section not in ("uniform", "weighted", "private-weighted", "gossip"):
                raise ConfigurationError(f"unknown section [{section}]")
            sub = {}
            for key, raw in parser.items(section):
                if key not in _VARIANT_FIELDS:
                    raise ConfigurationError(f"unknown field '{key}' in [{section}]")
                sub[key] = _convert(section, key, raw, _VARIANT_FIELDS[key])
            overrides[section] = sub
    if "mu" in kwargs and len(kwargs["mu"]) == 1:
        kwargs["mu"] = (kwargs["mu"][0],)
    return ExperimentSpec(variant_overrides=overrides, **kwargs)


def apply_overrides(spec: ExperimentSpec, **overrides) -> ExperimentSpec:
    """Return a copy of the spec with non-None overrides applied."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    if not updates:
        return spec
    return replace(spec, **updates)


# ---------------------------------------------------------------------------
# run command


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header_items, columns, rows) -> None:
    lines = [f"# {key} = {value}" for key, value in header_items]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format(v) for v in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def _trace_rows(trace: RunTrace):
    return [
        (int(k), int(node), float(gap), int(comm), int(comp))
        for k, node, gap, comm, comp in zip(
            trace.k, trace.node, trace.gap, trace.comm, trace.comp
        )
    ]


def _run_one_seed(spec: ExperimentSpec, master_seed: int):
    graph_seed = spec.resolved_graph_seed(master_seed)
    data_seed = spec.resolved_data_seed(master_seed)
    g = erdos_renyi(spec.n, spec.p, graph_seed)
    data = generate_dataset(spec.n, spec.d, spec.mu_vector(), spec.v, data_seed)
    reference = solve_optimal(data, FeasibleSet(spec.feasible_radius))
    traces = {}
    for variant in spec.variants:
        cfg = spec.run_config(variant, master_seed)
        traces[variant] = run_variant(g, data, cfg, reference=reference)
    return master_seed, graph_seed, data_seed, traces


def cmd_run(spec: ExperimentSpec, out_dir, jobs: int = 1):
    """Run every (variant, seed) pair and write per-run plus aggregate CSVs.

    Seeds fan out over ``jobs`` worker processes; files are written by this
    process only, in seed order, so output is deterministic regardless of
    completion order. Returns {variant: {seed: RunTrace}}.
    """
    os.makedirs(out_dir, exist_ok=True)
    if jobs > 1 and len(spec.seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one_seed, [spec] * len(spec.seeds), spec.seeds))
    else:
        results = [_run_one_seed(spec, seed) for seed in spec.seeds]

    all_traces: dict[str, dict[int, RunTrace]] = {v: {} for v in spec.variants}
    for master_seed, graph_seed, data_seed, traces in results:
        for variant, trace in traces.items():
            all_traces[variant][master_seed] = trace
            header = spec.header_items() + [
                ("variant", variant),
                ("seed", str(master_seed)),
                ("resolved_graph_seed", str(graph_seed)),
                ("resolved_data_seed", str(data_seed)),
                ("f_star", repr(trace.f_star)),
            ]
            path = os.path.join(out_dir, f"trace_{variant}_seed{master_seed}.csv")
            _write_csv(path, header, ("k", "node", "gap", "comm", "comp"), _trace_rows(trace))

    agg_rows = []
    for variant in spec.variants:
        traces = [all_traces[variant][seed] for seed in spec.seeds]
        grid = traces[0].k
        for t in traces[1:]:
            if not np.array_equal(t.k, grid):
                raise ConfigurationError("seeds produced different trace grids; cannot aggregate")
        gaps = np.stack([t.gap for t in traces])
        mean = gaps.mean(axis=0)
        std = gaps.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros_like(mean)
        for i, k in enumerate(grid):
            agg_rows.append((variant, int(k), float(mean[i]), float(std[i])))
    header = spec.header_items() + [("std_ddof", "1")]
    _write_csv(
        os.path.join(out_dir, "aggregate.csv"),
        header,
        ("variant", "k", "gap_mean", "gap_std"),
        agg_rows,
    )
    return all_traces


# ---------------------------------------------------------------------------
# privacy table command


def cmd_privacy_table(epsilons, thetas, sup_l, inf_l, out_dir, deltas=()):
    """Write the (epsilon, theta) -> delta table, plus solved noise scales.

    The main table has one row per grid point with both certificate
    branches. For every requested (epsilon, delta) pair a second file
    records the smallest noise scale whose certified delta meets the
    target, or marks the pair unachievable (the certificate's delta has a
    positive infimum in theta).
    """
    os.makedirs(out_dir, exist_ok=True)
    base_header = [
        ("sup_l", repr(float(sup_l))),
        ("inf_l", repr(float(inf_l))),
    ]
    rows = []
    for eps in epsilons:
        for theta in thetas:
            b1, b2 = delta_bound_branches(eps, theta, sup_l, inf_l)
            rows.append(
                (repr(float(eps)), repr(float(theta)), repr(b1), repr(b2), repr(min(max(b1, b2), 1.0)))
            )
    table_path = os.path.join(out_dir, "privacy_table.csv")
    _write_csv(
        table_path,
        base_header,
        ("epsilon", "theta", "delta_branch1", "delta_branch2", "delta"),
        rows,
    )
    solved_rows = []
    if deltas:
        for eps in epsilons:
            for delta in deltas:
                try:
                    theta = solve_noise_scale(eps, delta, sup_l, inf_l)
                    achieved = max(*delta_bound_branches(eps, theta, sup_l, inf_l))
                    solved_rows.append(
                        (repr(float(eps)), repr(float(delta)), repr(theta), repr(achieved), "ok")
                    )
                except ConfigurationError:
                    solved_rows.append(
                        (repr(float(eps)), repr(float(delta)), "", "", "unachievable")
                    )
        _write_csv(
            os.path.join(out_dir, "privacy_solved.csv"),
            base_header,
            ("epsilon", "delta_target", "theta", "delta_achieved", "status"),
            solved_rows,
        )
    return rows, solved_rows


# ---------------------------------------------------------------------------
# diagnostics command


def cmd_diagnostics(spec: ExperimentSpec, out_dir):
    """Per-seed chain and data diagnostics CSV.

    Emits the Lipschitz extremes and mean, the measured residual at the
    optimum, and lambda_P for the uniform and weighted chains; private
    sweeps additionally get lambda_P of the chain on that seed's privatized
    constants.
    """
    os.makedirs(out_dir, exist_ok=True)
    include_private = "private-weighted" in spec.variants
    rows = []
    for master_seed in spec.seeds:
        graph_seed = spec.resolved_graph_seed(master_seed)
        data_seed = spec.resolved_data_seed(master_seed)
        g = erdos_renyi(spec.n, spec.p, graph_seed)
        data = generate_dataset(spec.n, spec.d, spec.mu_vector(), spec.v, data_seed)
        w_star, _ = solve_optimal(data, FeasibleSet(spec.feasible_radius))
        sigma_sq = residual_second_moment(w_star, data)
        m_u = build_uniform_matrix(g)
        lam_u = lambda_p(m_u, stationary_distribution(m_u))
        m_w = build_weighted_matrix(g, data.lipschitz)
        lam_w = lambda_p(m_w, stationary_distribution(m_w))
        row = [
            master_seed,
            spec.n,
            float(data.lipschitz.max()),
            float(data.lipschitz.min()),
            float(data.lipschitz.mean()),
            sigma_sq,
            lam_u,
            lam_w,
        ]
        if include_private:
            cfg = spec.run_config("private-weighted", master_seed)
            noisy = privatize_all(
                data.lipschitz, cfg.privacy, cfg.mechanism, stream_rng(master_seed, "privacy")
            )
            m_r = build_weighted_matrix(g, noisy.values)
            row.append(lambda_p(m_r, stationary_distribution(m_r)))
        rows.append(tuple(row))
    columns = ["seed", "n", "sup_l", "inf_l", "l_bar", "sigma_sq", "lambda_pu", "lambda_pw"]
    if include_private:
        columns.append("lambda_pwr")
    path = os.path.join(out_dir, "diagnostics.csv")
    _write_csv(path, spec.header_items(), tuple(columns), rows)
    return rows


def cmd_generate_graph(n: int, p: float, seed: int, out_path) -> Graph:
    """Sample a connected ER graph and write it in edge-list format."""
    g = erdos_renyi(n, p, seed)
    save_edge_list(g, out_path)
    return g
