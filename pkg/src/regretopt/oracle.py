"""Brute-force checks for the regret DPs at desk scale.

None of these functions use the compact augmented state for their own
bookkeeping: the game tree keeps every history separate and scores leaves by
the actual return difference of the two trajectories.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .augmented import AugmentedSpace, AugmentedState, aligned_regret_cost, augmented_transition
from .baselines import clairvoyant_path_value
from .finite import FiniteSolverConfig, FiniteValueStack, backward_regret_dp
from .system import SystemSpec

MAX_LEAVES = 10**7


class EnumerationTooLarge(ValueError):
    pass


def history_tree_size(spec: SystemSpec, k: int, horizon: int) -> int:
    nA, nW = spec.num_actions, spec.num_disturbances
    return nA**horizon * nW**horizon * nA ** (horizon - k)


def best_plan_on_block(spec: SystemSpec, s: np.ndarray, block: np.ndarray, discount: float = 1.0) -> np.ndarray:
    """Max over all action sequences of the (discounted) reward sum on a known block, vectorized over rows."""
    f, r = spec.transition, spec.reward
    k = block.shape[1]
    best = np.full(len(s), -np.inf)
    for plan in itertools.product(range(spec.num_actions), repeat=k):
        state = s.copy()
        total = np.zeros(len(s))
        for j, a in enumerate(plan):
            total += discount**j * r[state, a, block[:, j]]
            state = f[state, a, block[:, j]]
        np.maximum(best, total, out=best)
    return best


def history_tree_regret(
    spec: SystemSpec, s0: int, k: int, horizon: int, max_leaves: int = MAX_LEAVES, discount: float = 1.0
) -> float:
    """Exact finite-horizon regret game value by backward induction over full histories.

    Stage ``t``: the causal player picks its action (min), then the adversary
    picks the disturbance together with the benchmark action for stage
    ``t - k`` (max; no benchmark move while ``t < k``).  After stage ``T-1`` the
    benchmark plays its best plan on the final ``k`` disturbances.  A leaf is
    scored by ``V_T(benchmark) - V_T(causal)``.

    ``discount < 1`` weights stage ``t`` rewards of both players by
    ``discount**t``, giving the discounted game truncated after ``T`` stages.
    """
    if not 1 <= k < horizon:
        raise ValueError(f"need 1 <= k < horizon (k={k}, horizon={horizon})")
    leaves = history_tree_size(spec, k, horizon)
    if leaves > max_leaves:
        raise EnumerationTooLarge(
            f"history tree has {leaves} leaves, above the enumeration guard of {max_leaves}"
        )
    f, r = spec.transition, spec.reward
    nA, nW = spec.num_actions, spec.num_disturbances
    f = f.astype(np.int32)
    s_c = np.array([s0], dtype=np.int32)
    s_l = np.array([s0], dtype=np.int32)
    gap = np.zeros(1)  # running benchmark-minus-causal return
    hist = np.zeros((1, 0), dtype=np.int32)  # the most recent k disturbances
    widths = []
    for t in range(horizon):
        n = len(s_c)
        n_l = nA if t >= k else 1
        a_c = np.arange(nA)[None, :, None, None]
        w = np.arange(nW)[None, None, :, None]
        a_l = np.arange(n_l)[None, None, None, :]
        shape = (n, nA, nW, n_l)
        sc = s_c[:, None, None, None]
        new_gap = gap[:, None, None, None] - discount**t * r[sc, a_c, w]
        if t >= k:
            sl = s_l[:, None, None, None]
            w_lag = hist[:, 0][:, None, None, None]
            new_gap = new_gap + discount ** (t - k) * r[sl, a_l, w_lag]
            new_sl = f[sl, a_l, w_lag]
        else:
            new_sl = np.broadcast_to(s_l[:, None, None, None], shape)
        s_c = np.broadcast_to(f[sc, a_c, w], shape).reshape(-1)
        s_l = np.broadcast_to(new_sl, shape).reshape(-1)
        gap = np.broadcast_to(new_gap, shape).reshape(-1)
        w_new = np.broadcast_to(w.astype(np.int32), shape).reshape(-1, 1)
        kept = hist[:, 1:] if hist.shape[1] == k else hist
        hist = np.concatenate([np.repeat(kept, nA * nW * n_l, axis=0), w_new], axis=1)
        widths.append((nA, nW * n_l))
    # the benchmark's final plan is a pure function of (state, block): enumerate
    # it once per distinct argument, then look it up for every leaf
    blocks = np.array(list(itertools.product(range(nW), repeat=k)), dtype=np.int64)
    states = np.repeat(np.arange(spec.num_states), len(blocks))
    plan_value = best_plan_on_block(spec, states, np.tile(blocks, (spec.num_states, 1)), discount)
    plan_value *= discount ** (horizon - k)
    block_idx = hist @ (nW ** np.arange(k - 1, -1, -1)).astype(np.int32)
    value = gap + plan_value[s_l * len(blocks) + block_idx]
    for n_c, n_max in reversed(widths):
        value = value.reshape(-1, n_c, n_max).max(axis=2).min(axis=1)
    return float(value[0])


# --------------------------------------------------------------------------
# Realized regret of a concrete controller
# --------------------------------------------------------------------------


def _run_controller(spec: SystemSpec, controller, s0: int, path) -> tuple[list[int], list[int], float]:
    controller.reset(s0)
    states, actions, total = [], [], 0.0
    s = s0
    prev = None
    for w in path:
        a = controller.step(prev)
        states.append(s)
        actions.append(a)
        total += spec.reward[s, a, w]
        s = int(spec.transition[s, a, w])
        prev = int(w)
    return states, actions, total


def game_benchmark_value(
    spec: SystemSpec, stack: FiniteValueStack, s0: int, path, causal_states, causal_actions
) -> float:
    """Benchmark return on ``path`` with lagged actions chosen greedily against the stage tables.

    At stage ``t >= k`` the benchmark action for stage ``t - k`` maximizes the
    stage value given the causal action and the realized disturbance; the last
    ``k`` stages use the best plan on the known final block.
    """
    k, T = stack.k, stack.horizon
    space = AugmentedSpace.of(spec, k)
    f, r = spec.transition, spec.reward
    s_l, total = s0, 0.0
    for t in range(k, T):
        window = path[t - k:t]
        x = AugmentedState(causal_states[t], s_l, tuple(window))
        a_c, w = causal_actions[t], path[t]
        nxt_c = int(f[x.s_c, a_c, w])
        new_w = space.window_index(tuple(window[1:]) + (w,))
        cand = r[s_l, :, window[0]] + stack.values[t + 1][
            (nxt_c * spec.num_states + f[s_l, :, window[0]]) * space.num_windows + new_w
        ]
        a_l = int(cand.argmax())
        total += r[s_l, a_l, window[0]]
        s_l = int(f[s_l, a_l, window[0]])
    block = np.asarray(path[T - k:])[None, :]
    return total + float(best_plan_on_block(spec, np.array([s_l]), block)[0])


def worst_case_realized_regret(
    spec: SystemSpec,
    controller,
    s0: int,
    k: int,
    horizon: int,
    stack: FiniteValueStack | None = None,
    max_paths: int = MAX_LEAVES,
) -> tuple[float, tuple[int, ...]]:
    """Max over all ``w in W^T`` of game-semantics benchmark return minus the controller's return.

    Returns the value and the lexicographically first maximizing path.
    """
    if spec.num_disturbances**horizon > max_paths:
        raise EnumerationTooLarge(f"|W|^T = {spec.num_disturbances ** horizon} paths exceed the guard")
    if stack is None:
        stack = backward_regret_dp(spec, FiniteSolverConfig(k, horizon))
    best, witness = -np.inf, ()
    for path in itertools.product(range(spec.num_disturbances), repeat=horizon):
        states, actions, causal = _run_controller(spec, controller, s0, path)
        regret = game_benchmark_value(spec, stack, s0, path, states, actions) - causal
        if regret > best:
            best, witness = regret, path
    return float(best), witness


def clairvoyant_regret(spec: SystemSpec, controller, s0: int, horizon: int, max_paths: int = MAX_LEAVES):
    """Diagnostic only: max over paths of the path-optimal return minus the controller's return.

    This is the literal joint-supremum reading of the benchmark; it is
    reported for comparison and is not expected to equal the DP value.
    """
    if spec.num_disturbances**horizon > max_paths:
        raise EnumerationTooLarge(f"|W|^T = {spec.num_disturbances ** horizon} paths exceed the guard")
    best, witness = -np.inf, ()
    for path in itertools.product(range(spec.num_disturbances), repeat=horizon):
        _, _, causal = _run_controller(spec, controller, s0, path)
        regret = clairvoyant_path_value(spec, s0, path)[0] - causal
        if regret > best:
            best, witness = regret, path
    return float(best), witness


# --------------------------------------------------------------------------
# Decomposition identities
# --------------------------------------------------------------------------


@dataclass
class DecompositionReport:
    trials: int = 0
    max_error: float = 0.0
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _trajectory(spec: SystemSpec, s0: int, actions, path):
    s, states, rewards = s0, [], []
    for a, w in zip(actions, path):
        states.append(s)
        rewards.append(float(spec.reward[s, a, w]))
        s = int(spec.transition[s, a, w])
    return states, rewards


def _finite_identity(spec: SystemSpec, k: int, horizon: int, s0, a_c, a_l, path) -> tuple[float, float]:
    """Return (direct return gap, prefix + aligned-cost + tail decomposition)."""
    _, r_c = _trajectory(spec, s0, a_c, path)
    _, r_l = _trajectory(spec, s0, a_l, path)
    direct = sum(r_l) - sum(r_c)
    # propagate the tracking state through the augmented dynamics
    s_c = s0
    for j in range(k):
        s_c = int(spec.transition[s_c, a_c[j], path[j]])
    x = AugmentedState(s_c, s0, tuple(path[:k]))
    running = 0.0
    for t in range(k, horizon):
        running += aligned_regret_cost(spec, x, a_c[t], a_l[t - k], path[t], k, gamma=1.0)
        x = augmented_transition(spec, x, a_c[t], a_l[t - k], path[t])
    tail = sum(r_l[horizon - k:])
    prefix = sum(r_c[:k])
    return direct, running + tail - prefix


def _discounted_identity(spec: SystemSpec, k: int, horizon: int, s0, a_c, a_l, path) -> tuple[float, float, float]:
    """Truncated discounted identity: (direct gap, decomposition, benchmark terms cut by truncation)."""
    g = spec.gamma
    _, r_c = _trajectory(spec, s0, a_c, path)
    _, r_l = _trajectory(spec, s0, a_l, path)
    disc = g ** np.arange(horizon)
    direct = float(disc @ (np.array(r_l) - np.array(r_c)))
    s_c = s0
    for j in range(k):
        s_c = int(spec.transition[s_c, a_c[j], path[j]])
    x = AugmentedState(s_c, s0, tuple(path[:k]))
    running = 0.0
    for t in range(horizon - k):
        running += g**t * aligned_regret_cost(spec, x, a_c[t + k], a_l[t], path[t + k], k)
        x = augmented_transition(spec, x, a_c[t + k], a_l[t], path[t + k])
    prefix = float(disc[:k] @ np.array(r_c[:k]))
    cut = float(disc[horizon - k:] @ np.array(r_l[horizon - k:]))
    return direct, running - prefix, cut


def decomposition_check(
    spec: SystemSpec,
    k: int,
    horizon: int,
    trials: int = 100,
    seed: int = 0,
    tolerance: float = 1e-12,
    s0: int | None = None,
) -> DecompositionReport:
    """Check both return-gap decompositions on random action sequences and paths.

    For the discounted identity over a truncated horizon the omitted benchmark
    terms are added back exactly, and their size is also checked against the
    analytic bound ``r_max gamma^(T-k) (1 - gamma^k) / (1 - gamma)``.
    """
    if not 1 <= k < horizon:
        raise ValueError(f"need 1 <= k < horizon (k={k}, horizon={horizon})")
    rng = np.random.default_rng(seed)
    nS, nA, nW = spec.shape
    report = DecompositionReport()
    g = spec.gamma
    bound = spec.r_max * g ** (horizon - k) * (1 - g**k) / (1 - g)
    for trial in range(trials):
        start = int(rng.integers(nS)) if s0 is None else s0
        a_c = [int(a) for a in rng.integers(nA, size=horizon)]
        a_l = [int(a) for a in rng.integers(nA, size=horizon)]
        path = [int(w) for w in rng.integers(nW, size=horizon)]
        direct, decomposed = _finite_identity(spec, k, horizon, start, a_c, a_l, path)
        d_direct, d_decomposed, cut = _discounted_identity(spec, k, horizon, start, a_c, a_l, path)
        errors = {
            "finite": abs(direct - decomposed),
            "discounted": abs(d_direct - d_decomposed - cut),
        }
        report.trials += 1
        report.max_error = max(report.max_error, *errors.values())
        for name, err in errors.items():
            if err > tolerance:
                report.violations.append(
                    {"identity": name, "trial": trial, "error": err, "s0": start,
                     "causal_actions": a_c, "benchmark_actions": a_l, "path": path}
                )
        if abs(d_direct - d_decomposed) > bound + tolerance:
            report.violations.append(
                {"identity": "truncation-bound", "trial": trial, "error": abs(d_direct - d_decomposed),
                 "bound": bound, "s0": start, "path": path}
            )
    return report
