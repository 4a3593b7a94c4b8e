"""conprop: consensus propagation on graphs, with the spectral machinery to
analyze and compare its convergence against pairwise averaging."""

from .graphs import (
    EdgeWeights,
    Graph,
    build_graph,
    generate_cycle,
    generate_random_regular,
    generate_torus,
    generate_tree,
    read_edge_list,
    write_edge_list,
)
from .engine import (
    MessageState,
    ProtocolConfig,
    Schedule,
    StopRule,
    estimates,
    initial_state,
    mean_update_contraction_factor,
    observation_weight,
    regular_fixed_point,
    run,
    scalar_step,
    step_async,
    step_sync,
    update_means,
    update_precisions,
)
from .analysis import (
    EdgeProcess,
    MixingReport,
    cesaro_limit,
    cesaro_mixing_time,
    edge_process,
    laplacian,
    pairwise_mixing_time,
    solve_mode,
)
from .baseline import metropolis_matrix, run_pairwise
from .adaptive import beta_for, run_adaptive, t_star_for, t_star_warm_start
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .sweep import SweepResult, emit, run_experiment
from .trace import RunTrace, scaled_norm

__version__ = "0.1.0"
