"""Command-line interface.

Subcommands: generate-graph, run, sweep, privacy-table, diagnostics.
Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigurationError, NumericalError
from .runner import (
    ExperimentSpec,
    apply_overrides,
    cmd_diagnostics,
    cmd_generate_graph,
    cmd_privacy_table,
    cmd_run,
    load_config,
)


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--n", type=int)
    parser.add_argument("--p", type=float)
    parser.add_argument("--d", type=int)
    parser.add_argument("--v", type=float)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--q", type=float)
    parser.add_argument("--T", type=int, dest="iterations")
    parser.add_argument("--eval-every", type=int)
    parser.add_argument("--radius", type=float, dest="feasible_radius")
    parser.add_argument("--variant", help="comma-separated list of variants")
    parser.add_argument("--seeds", type=int, help="replicate with master seeds 1..N")
    parser.add_argument("--graph-seed", type=int)
    parser.add_argument("--data-seed", type=int)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--mechanism", choices=("gamma", "truncated-gamma", "laplace"))


def _build_spec(args) -> ExperimentSpec:
    spec = load_config(args.config) if args.config else ExperimentSpec()
    variants = tuple(args.variant.split(",")) if args.variant else None
    seeds = tuple(range(1, args.seeds + 1)) if args.seeds else None
    mu = (args.mu,) if args.mu is not None else None
    return apply_overrides(
        spec,
        n=args.n,
        p=args.p,
        d=args.d,
        v=args.v,
        mu=mu,
        q=args.q,
        iterations=args.iterations,
        eval_every=args.eval_every,
        feasible_radius=args.feasible_radius,
        variants=variants,
        seeds=seeds,
        graph_seed=args.graph_seed,
        data_seed=args.data_seed,
        theta=args.theta,
        epsilon=args.epsilon,
        delta=args.delta,
        mechanism=args.mechanism,
    )


def _parse_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rwsgd",
        description="Random-walk SGD over communication graphs, with privacy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_graph = sub.add_parser("generate-graph", help="sample a connected ER graph to an edge list")
    p_graph.add_argument("--n", type=int, required=True)
    p_graph.add_argument("--p", type=float, required=True)
    p_graph.add_argument("--seed", type=int, default=0)
    p_graph.add_argument("--out", default="graph.txt")

    for name, default_jobs in (("run", 1), ("sweep", os.cpu_count() or 1)):
        p_run = sub.add_parser(
            name,
            help="execute the configured experiment"
            + ("" if name == "run" else " with seed-level parallelism"),
        )
        _add_spec_flags(p_run)
        p_run.add_argument("--jobs", type=int, default=default_jobs)

    p_table = sub.add_parser("privacy-table", help="tabulate the (epsilon, theta) -> delta tradeoff")
    p_table.add_argument("--epsilons", default="0.5,1,2,3", help="comma-separated values")
    p_table.add_argument("--thetas", default="0.2,1", help="comma-separated values")
    p_table.add_argument("--deltas", default="", help="targets to solve the noise scale for")
    p_table.add_argument("--sup-l", type=float, default=10.0)
    p_table.add_argument("--inf-l", type=float, default=1.0)
    p_table.add_argument("--out", default="out")

    p_diag = sub.add_parser("diagnostics", help="chain and data diagnostics per seed")
    _add_spec_flags(p_diag)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate-graph":
            g = cmd_generate_graph(args.n, args.p, args.seed, args.out)
            print(f"wrote {args.out}: n={g.n}, edges={len(g.edges)}")
        elif args.command in ("run", "sweep"):
            spec = _build_spec(args)
            traces = cmd_run(spec, args.out, jobs=args.jobs)
            total = sum(len(by_seed) for by_seed in traces.values())
            print(f"wrote {total} traces and aggregate.csv to {args.out}")
        elif args.command == "privacy-table":
            rows, solved = cmd_privacy_table(
                _parse_floats(args.epsilons),
                _parse_floats(args.thetas),
                args.sup_l,
                args.inf_l,
                args.out,
                deltas=_parse_floats(args.deltas) if args.deltas else (),
            )
            print(f"wrote privacy_table.csv ({len(rows)} rows) to {args.out}")
            if solved:
                print(f"wrote privacy_solved.csv ({len(solved)} rows) to {args.out}")
        elif args.command == "diagnostics":
            spec = _build_spec(args)
            rows = cmd_diagnostics(spec, args.out)
            print(f"wrote diagnostics.csv ({len(rows)} rows) to {args.out}")
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
