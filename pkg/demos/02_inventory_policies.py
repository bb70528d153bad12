"""Lost-sales inventory: MDP, robust and regret-optimal ordering rules.

Stock s in 0..20, orders a in 0..20, demand w in 0..25.  Each step pays
holding cost 1 per unit left over and penalty 9 per unit of lost demand.
"""

import time

import numpy as np

from regretopt import (
    PoissonModel,
    build_inventory_system,
    mdp_value_iteration,
    robust_value_iteration,
    sample,
    solve_discounted,
    truncated_poisson_pmf,
)
from regretopt.simulation import rollout

spec = build_inventory_system()  # h=1, p=9, gamma=0.995
print(spec)
print("reward(s=5, a=0, w=3) =", spec.reward[5, 0, 3], " next state", spec.transition[5, 0, 3])

# %% the two baselines are state-feedback rules
mdp = mdp_value_iteration(spec, truncated_poisson_pmf(5.0, 25))
robust = robust_value_iteration(spec)
print("\nstock:         ", np.arange(0, 21, 2))
print("mdp(lambda=5): ", mdp.actions[::2])
print("robust:        ", robust.actions[::2])

# %% regret-optimal controller against a one-step lookahead benchmark
t0 = time.perf_counter()
regret = solve_discounted(spec, k=1)
print(f"\nregret solve: {regret.table.sweeps} sweeps over {regret.table.values.size} augmented states "
      f"in {time.perf_counter() - t0:.1f}s; optimal regret from s0=0: {regret.regret(0):.2f}")

# %% short comparison on Poisson demand (same sequence for every controller)
controllers = {
    "mdp(5)": mdp.controller(spec, 0),
    "robust": robust.controller(spec, 0),
    "regret(1)": regret.controller(0),
}
print(f"\n{'lambda':>6}" + "".join(f"{name:>12}" for name in controllers))
for lam in (2.0, 5.0, 8.0, 11.0):
    w = sample(PoissonModel(lam, 25), 500, seed=0)
    avgs = [rollout(spec, c, w, 0).rewards.mean() for c in controllers.values()]
    print(f"{lam:6.0f}" + "".join(f"{a:12.2f}" for a in avgs))
