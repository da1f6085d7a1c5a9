"""Random-walk SGD over communication graphs.

Simulation library for decentralized learning where a single global model
travels along a Metropolis-Hastings random walk: a uniform-sampling walk, an
importance-sampling walk weighted by the nodes' gradient-Lipschitz
constants, a locally-differentially-private variant of the weighted walk
built on a Gamma noise mechanism, and an asynchronous gossip baseline, plus
the privacy accountant for the Gamma mechanism.
"""

from .algorithms import (
    RunConfig,
    RunTrace,
    averaged_iterate,
    initial_point,
    run_gossip,
    run_private,
    run_uniform,
    run_variant,
    run_weighted,
    sgd_update,
    solve_optimal,
    step_size,
)
from .chain import (
    StationaryDistribution,
    TransitionMatrix,
    accept_uniform,
    accept_weighted,
    build_uniform_matrix,
    build_weighted_matrix,
    lambda_p,
    stationary_distribution,
    walk_step,
)
from .errors import ConfigurationError, NumericalError
from .graph import Graph, erdos_renyi, load_edge_list, save_edge_list
from .objective import (
    Dataset,
    FeasibleSet,
    NodeData,
    generate_dataset,
    global_gradient,
    global_loss,
    lipschitz_constant,
    local_gradient,
    local_loss,
    project,
    residual_second_moment,
)
from .privacy import (
    NoisyLipschitz,
    PrivacySpec,
    delta_bound,
    delta_bound_branches,
    delta_infimum,
    gamma_mechanism,
    laplace_mechanism,
    lower_incomplete_gamma,
    privatize_all,
    regularized_lower_incomplete_gamma,
    solve_noise_scale,
    truncated_gamma_mechanism,
)
from .runner import ExperimentSpec, cmd_diagnostics, cmd_privacy_table, cmd_run, load_config

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
