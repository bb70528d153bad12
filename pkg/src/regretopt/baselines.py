"""Baseline controllers: expected-reward MDP, worst-case robust, clairvoyant path optimum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iteration import certified_iteration
from .system import SystemSpec


@dataclass
class StatePolicy:
    """Memoryless state-feedback policy with its value vector."""

    actions: np.ndarray
    values: np.ndarray
    error_bound: float = 0.0
    sweeps: int = 0
    converged: bool = True

    def controller(self, spec: SystemSpec, s0: int = 0) -> "StateFeedbackController":
        return StateFeedbackController(spec, self.actions, s0)


def check_distribution(dist, num_disturbances: int) -> np.ndarray:
    p = np.asarray(dist, dtype=np.float64)
    if p.shape != (num_disturbances,):
        raise ValueError(f"distribution must have {num_disturbances} entries, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("distribution entries must be finite and nonnegative")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"distribution is not normalized (sums to {p.sum()!r})")
    return p


def _greedy(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    actions = q.argmax(axis=1)  # lowest index on ties
    return actions, np.take_along_axis(q, actions[:, None], axis=1)[:, 0]


def mdp_value_iteration(
    spec: SystemSpec, dist, epsilon: float = 1e-6, max_sweeps: int = 1_000_000
) -> StatePolicy:
    """Expected discounted reward under i.i.d. disturbances drawn from ``dist``."""
    p = check_distribution(dist, spec.num_disturbances)
    f, r, g = spec.transition, spec.reward, spec.gamma

    def q_values(V):
        return (r + g * V[f]) @ p  # (S, A)

    res = certified_iteration(lambda V: q_values(V).max(axis=1), np.zeros(spec.num_states), g, epsilon, max_sweeps)
    actions, _ = _greedy(q_values(res.values))
    return StatePolicy(actions, res.values, res.error_bound, res.sweeps, res.converged)


def robust_value_iteration(spec: SystemSpec, epsilon: float = 1e-6, max_sweeps: int = 1_000_000) -> StatePolicy:
    """Worst-case discounted reward; the adversary picks the disturbance to minimize reward."""
    f, r, g = spec.transition, spec.reward, spec.gamma

    def q_values(V):
        return (r + g * V[f]).min(axis=2)

    res = certified_iteration(lambda V: q_values(V).max(axis=1), np.zeros(spec.num_states), g, epsilon, max_sweeps)
    actions, _ = _greedy(q_values(res.values))
    return StatePolicy(actions, res.values, res.error_bound, res.sweeps, res.converged)


def evaluate_state_policy(spec: SystemSpec, actions: np.ndarray, dist) -> np.ndarray:
    """Exact expected discounted value of a state-feedback policy (linear solve)."""
    p = check_distribution(dist, spec.num_disturbances)
    n = spec.num_states
    idx = np.arange(n)
    a = np.asarray(actions)
    P = np.zeros((n, n))
    np.add.at(P, (np.repeat(idx, spec.num_disturbances), spec.transition[idx, a].reshape(-1)), np.tile(p, n))
    reward = spec.reward[idx, a] @ p
    return np.linalg.solve(np.eye(n) - spec.gamma * P, reward)


def clairvoyant_path_value(
    spec: SystemSpec, s0: int, w_sequence, discounted: bool = False
) -> tuple[float, list[int]]:
    """Best return on a fully known disturbance path (backward induction over (state, time))."""
    w = [int(x) for x in w_sequence]
    if not w:
        raise ValueError("disturbance sequence is empty")
    if min(w) < 0 or max(w) >= spec.num_disturbances:
        raise ValueError("disturbance out of range")
    f, r = spec.transition, spec.reward
    g = spec.gamma if discounted else 1.0
    T = len(w)
    V = np.zeros(spec.num_states)
    best = np.empty((T, spec.num_states), dtype=np.int64)
    for t in range(T - 1, -1, -1):
        q = r[:, :, w[t]] + g * V[f[:, :, w[t]]]
        best[t] = q.argmax(axis=1)
        V = np.take_along_axis(q, best[t][:, None], axis=1)[:, 0]
    actions, s = [], s0
    for t in range(T):
        a = int(best[t, s])
        actions.append(a)
        s = int(f[s, a, w[t]])
    return float(V[s0]), actions


class StateFeedbackController:
    """Applies ``actions[s]`` to the tracked state; same stepping protocol as the regret runtimes."""

    def __init__(self, spec: SystemSpec, actions: np.ndarray, s0: int = 0):
        self.spec = spec
        self.actions = np.asarray(actions)
        self.reset(s0)

    def reset(self, s0: int | None = None) -> None:
        if s0 is not None:
            self.s0 = s0
        self.s = self.s0
        self.t = 0
        self._last_action: int | None = None

    def step(self, realized_w: int | None = None) -> int:
        if self.t > 0:
            if realized_w is None or not 0 <= realized_w < self.spec.num_disturbances:
                raise ValueError(f"invalid realized disturbance {realized_w!r}")
            self.s = int(self.spec.transition[self.s, self._last_action, realized_w])
        action = int(self.actions[self.s])
        self._last_action = action
        self.t += 1
        return action
