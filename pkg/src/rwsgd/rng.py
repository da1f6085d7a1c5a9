"""Named random streams derived from a single master seed.

One master seed spawns independent streams for the graph, the dataset, the
model/node initialization, the walk, and the privacy mechanism, so that two
run variants under the same master seed differ only where the algorithms
themselves differ.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

STREAMS = ("graph", "data", "init", "walk", "privacy")


def _sequence(master_seed: int, name: str) -> np.random.SeedSequence:
    try:
        key = STREAMS.index(name)
    except ValueError:
        raise ConfigurationError(f"unknown rng stream {name!r}; expected one of {STREAMS}")
    return np.random.SeedSequence(master_seed, spawn_key=(key,))


def stream_rng(master_seed: int, name: str) -> np.random.Generator:
    """Generator for the named stream of a master seed."""
    return np.random.default_rng(_sequence(master_seed, name))


def stream_seed(master_seed: int, name: str) -> int:
    """Integer seed for the named stream (for seed-taking APIs)."""
    return int(_sequence(master_seed, name).generate_state(1)[0])
