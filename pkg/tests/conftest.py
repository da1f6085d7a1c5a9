import numpy as np
import pytest

from rwsgd.graph import Graph, erdos_renyi
from rwsgd.objective import Dataset, generate_dataset


@pytest.fixture
def k4():
    return erdos_renyi(4, 1.0, 0)


@pytest.fixture
def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def star4():
    # center 0, leaves 1..3
    return Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture
def small_graph():
    return erdos_renyi(12, 0.5, 11)


@pytest.fixture
def small_data():
    return generate_dataset(12, 5, 2.0, 10.0, 21)


def equal_lipschitz_dataset(n: int, d: int, seed: int) -> Dataset:
    """Distinct feature vectors that share one norm, hence one Lipschitz constant."""
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d))
    features /= np.linalg.norm(features, axis=1)[:, None]
    features *= 3.0
    labels = np.where(rng.integers(0, 2, n) == 1, 1.0, -1.0)
    lip = 1.0 + 0.25 * n * np.einsum("ij,ij->i", features, features)
    return Dataset(features, labels, lip)
