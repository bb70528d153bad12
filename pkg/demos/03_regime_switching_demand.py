"""Regime-switching demand and a small controller comparison.

A two-regime hidden Markov chain switches between a low and a high Poisson
rate, staying put with probability 0.9 each step.
"""

import numpy as np

from regretopt import HmmModel, InventoryParams, sample_hmm
from regretopt.simulation import ControllerSpec, ExperimentConfig, run_experiment

model = HmmModel(lam_low=8.0, lam_high=11.0, w_max=25, persistence=0.9)
demand, regime = sample_hmm(model, 20, seed=3)
print("regime:", regime)
print("demand:", demand)

d, r = sample_hmm(model, 100_000, seed=0)
print(f"\nstay frequency {np.mean(r[1:] == r[:-1]):.4f}, time in high regime {r.mean():.3f}")
print(f"mean demand low {d[r == 0].mean():.2f}, high {d[r == 1].mean():.2f}")

# %% the experiment harness: solves each controller once, then rolls out per seed
config = ExperimentConfig(
    controllers=[ControllerSpec("mdp", 5.0), ControllerSpec("robust"), ControllerSpec("regret", k=1)],
    models=[HmmModel(4.0, 7.0, 25), HmmModel(8.0, 11.0, 25), HmmModel(16.0, 19.0, 25)],
    horizon=300,
    seeds=[0, 1, 2],
    inventory=InventoryParams(),
    per_step=False,
)
result = run_experiment(config)
print()
print(result.aggregates_csv())
