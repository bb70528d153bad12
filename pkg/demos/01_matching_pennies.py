"""Matching pennies: the smallest system where lookahead pays.

Reward is 1 when the action equals the disturbance.  A causal controller can
always be mismatched by an adversary, while a benchmark that sees the next
disturbance matches it every time, so the regret is one unit per stage.
"""

import numpy as np

from regretopt import (
    history_tree_regret,
    matching_pennies,
    solve_discounted,
    solve_finite,
)
from regretopt.simulation import rollout

spec = matching_pennies(gamma=0.9)
print(spec)
print("reward table for state 0 (rows = action, cols = disturbance):")
print(spec.reward[0])

# %% discounted regret: one unit per stage, summed geometrically
sol = solve_discounted(spec, k=1, epsilon=1e-9)
print(f"\nsweeps to certify: {sol.table.sweeps}, error bound {sol.table.error_bound:.1e}")
print(f"optimal discounted regret: {sol.regret(0):.6f}  (1/(1-gamma) = {1 / (1 - spec.gamma):.6f})")

# the full-history game truncated after T stages gives the partial sums
for T in (2, 4, 6):
    print(f"  truncated game, T={T}: {history_tree_regret(spec, 0, 1, T, discount=spec.gamma):.6f}")

# %% finite horizon: regret T, confirmed by brute force
for T in (2, 3, 4, 5):
    stack, prefix = solve_finite(spec, k=1, horizon=T)
    print(f"T={T}: DP {prefix.regret:.1f}   history tree {history_tree_regret(spec, 0, 1, T):.1f}")

# %% deploy the controller against an adversary that always mismatches
ctrl = sol.controller(0)
ctrl.reset(0)
prev, actions, ws = None, [], []
for t in range(8):
    a = ctrl.step(prev)
    prev = 1 - a
    actions.append(a)
    ws.append(prev)
traj = rollout(spec, ctrl, ws, 0)
print("\nactions:     ", actions)
print("disturbances:", ws)
print(f"causal return {traj.total_return}; a one-step lookahead benchmark earns {len(ws)}")
