"""Checking the compact DPs against brute force on tiny systems."""

import numpy as np

from regretopt import (
    FiniteSolverConfig,
    backward_regret_dp,
    decomposition_check,
    extract_finite_policy,
    finite_prefix_dp,
    history_tree_regret,
    mdp_value_iteration,
    random_system,
    worst_case_realized_regret,
)
from regretopt.oracle import clairvoyant_regret
from regretopt.verify import Grid, run_all

spec = random_system(3, 2, 2, gamma=0.9, rng=11)
k, T, s0 = 1, 5, 0

# %% the compact DP against backward induction over every history
stack = backward_regret_dp(spec, FiniteSolverConfig(k, T))
g0 = finite_prefix_dp(stack, s0).regret
print(f"DP regret {g0:.12f}")
print(f"tree      {history_tree_regret(spec, s0, k, T):.12f}")

# %% the extracted controller meets its guarantee on every disturbance sequence
ctrl = extract_finite_policy(stack, s0)
worst, witness = worst_case_realized_regret(spec, ctrl, s0, k, T, stack)
print(f"\nworst realized regret {worst:.12f} on {witness}")

mdp = mdp_value_iteration(spec, [0.5, 0.5]).controller(spec, s0)
print(f"mdp baseline worst    {worst_case_realized_regret(spec, mdp, s0, k, T, stack)[0]:.12f}")

# a benchmark that knows the whole path can only widen the gap
print(f"path-clairvoyant gap  {clairvoyant_regret(spec, ctrl, s0, T)[0]:.12f}  (diagnostic only)")

# %% return-gap identities
report = decomposition_check(spec, k, T, trials=200)
print(f"\ndecomposition: {report.trials} trials, max error {report.max_error:.1e}, passed {report.passed}")

# %% the same suites the command line runs
for suite in run_all(Grid(), tolerance=1e-9):
    print(f"{suite.name:20s} checked {suite.checked:5d}  max error {suite.max_error:.1e}  passed {suite.passed}")
