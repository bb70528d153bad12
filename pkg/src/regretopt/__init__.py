"""Regret-optimal control of finite disturbance-driven systems.

The solvers compare a causal controller with a benchmark that sees the next
``k`` disturbances, and minimize the worst-case return gap between the two.
"""

__version__ = "0.1.0"

from .augmented import AugmentedSpace, AugmentedState, RegretOperator, aligned_regret_cost, apply_regret_bellman, augmented_transition
from .baselines import (
    StateFeedbackController,
    StatePolicy,
    clairvoyant_path_value,
    evaluate_state_policy,
    mdp_value_iteration,
    robust_value_iteration,
)
from .discounted import (
    ConvergenceError,
    DiscountedSolution,
    PrefixTables,
    RegretController,
    SolverConfig,
    ValueTable,
    extract_stationary_policy,
    prefix_dp,
    solve_discounted,
    solve_fixed_point,
)
from .disturbances import HmmModel, PoissonModel, sample, sample_hmm, sample_iid, truncated_poisson_pmf
from .finite import (
    FiniteRegretController,
    FiniteSolverConfig,
    FiniteValueStack,
    HorizonExhausted,
    backward_regret_dp,
    extract_finite_policy,
    finite_prefix_dp,
    solve_finite,
    tail_value,
)
from .oracle import EnumerationTooLarge, decomposition_check, history_tree_regret, worst_case_realized_regret
from .simulation import ExperimentConfig, Trajectory, load_config, rollout, run_experiment
from .system import (
    InventoryParams,
    SpecError,
    SystemSpec,
    build_inventory_system,
    load_system,
    matching_pennies,
    random_system,
    read_system,
    save_system,
    validate_system,
    write_system,
)
