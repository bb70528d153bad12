"""Discounted infinite-horizon regret solver.

Pipeline: :func:`solve_fixed_point` computes the regret-to-go table on the
augmented space, :func:`prefix_dp` rolls it back over the first ``k`` stages to
get the optimal regret from an initial state, and :class:`RegretController`
deploys the resulting policy online.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .augmented import AugmentedSpace, RegretOperator
from .iteration import certified_iteration
from .system import SystemSpec

SweepMode = Literal["synchronous", "in-place"]


@dataclass(frozen=True)
class SolverConfig:
    k: int = 1
    epsilon: float = 1e-6
    max_sweeps: int = 100_000
    sweep_mode: SweepMode = "synchronous"

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon!r}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps!r}")
        if self.sweep_mode not in ("synchronous", "in-place"):
            raise ValueError(f"unknown sweep_mode {self.sweep_mode!r}")


@dataclass
class ValueTable:
    """Regret-to-go over the augmented space (dense, see :mod:`.augmented`)."""

    values: np.ndarray
    k: int
    gamma: float
    error_bound: float
    residual: float
    sweeps: int = 0
    converged: bool = True

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ValueError("value table contains non-finite entries")

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class StationaryPolicy:
    actions: np.ndarray  # augmented index -> causal action
    k: int


@dataclass
class PrefixTables:
    """Prefix values ``G_t`` over ``(state, disturbance prefix)`` for ``t = 0..k``.

    ``values[t]`` has shape ``(|S|, |W|**t)``; ``actions[t]`` (``t < k``) holds
    the minimizing causal action for the same keys.
    """

    s0: int
    values: list[np.ndarray]
    actions: list[np.ndarray]

    @property
    def regret(self) -> float:
        return float(self.values[0][self.s0, 0])


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, table: ValueTable):
        super().__init__(message)
        self.table = table


def solve_fixed_point(spec: SystemSpec, config: SolverConfig, strict: bool = False) -> ValueTable:
    """Value iteration on the regret operator, started from zero.

    The returned table is within ``config.epsilon`` of the true fixed point
    when ``converged`` is set.  If ``max_sweeps`` runs out, the best table is
    returned with ``converged=False`` and its certified ``error_bound``;
    ``strict=True`` raises :class:`ConvergenceError` instead.
    """
    op = RegretOperator(spec, config.k)
    accelerator = op.gauss_seidel_sweep if config.sweep_mode == "in-place" else None
    res = certified_iteration(
        op.apply,
        np.zeros(op.space.size),
        spec.gamma,
        config.epsilon,
        config.max_sweeps,
        accelerator=accelerator,
    )
    table = ValueTable(
        values=res.values,
        k=config.k,
        gamma=spec.gamma,
        error_bound=res.error_bound,
        residual=res.residual,
        sweeps=res.sweeps,
        converged=res.converged,
    )
    if strict and not res.converged:
        raise ConvergenceError(
            f"no certificate after {res.sweeps} sweeps (error bound {res.error_bound:.3e})", table
        )
    return table


def extract_stationary_policy(spec: SystemSpec, k: int, table: ValueTable | np.ndarray) -> StationaryPolicy:
    """Greedy causal action per augmented state; ties go to the lowest action."""
    values = table.values if isinstance(table, ValueTable) else np.asarray(table)
    _, actions = RegretOperator(spec, k).apply(values, with_policy=True)
    return StationaryPolicy(actions, k)


def prefix_recursion(
    spec: SystemSpec, terminal: np.ndarray, k: int, weights: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Backward min-max over the first ``k`` stages.

    ``terminal`` has shape ``(|S|, |W|**k)``; stage ``t`` charges
    ``-weights[t] * r(s, a, w)``.  Shared by the discounted and finite solvers.
    """
    nS, nA, nW = spec.shape
    f, r = spec.transition, spec.reward
    values: list[np.ndarray] = [np.empty(0)] * (k + 1)
    actions: list[np.ndarray] = [np.empty(0, dtype=np.int64)] * k
    values[k] = np.asarray(terminal, dtype=np.float64).reshape(nS, nW**k)
    for t in range(k - 1, -1, -1):
        nxt = values[t + 1].reshape(nS, nW**t, nW)  # [s', prefix, w]
        # cand[s, a, w, prefix] = G_{t+1}(f(s,a,w), prefix#w) - weight * r(s,a,w)
        cand = nxt[f, :, np.arange(nW)[None, None, :]]  # (S, A, W, P)
        cand = cand - weights[t] * r[:, :, :, None]
        worst = cand.max(axis=2)  # (S, A, P)
        best = worst.argmin(axis=1)  # (S, P)
        actions[t] = best
        values[t] = np.take_along_axis(worst, best[:, None, :], axis=1)[:, 0, :]
    return values, actions


def prefix_dp(spec: SystemSpec, k: int, table: ValueTable | np.ndarray, s0: int) -> PrefixTables:
    """Optimal regret from ``s0`` and the causal selectors for ``t < k``.

    The terminal condition embeds the regret-to-go table at
    ``x = (s, s0, window)``.
    """
    values = table.values if isinstance(table, ValueTable) else np.asarray(table)
    space = AugmentedSpace.of(spec, k)
    if not 0 <= s0 < spec.num_states:
        raise ValueError(f"initial state {s0} out of range")
    terminal = values.reshape(space.shape)[:, s0, :]
    weights = spec.gamma ** np.arange(k)
    vals, acts = prefix_recursion(spec, terminal, k, weights)
    return PrefixTables(s0, vals, acts)


@dataclass
class DiscountedSolution:
    spec: SystemSpec
    config: SolverConfig
    table: ValueTable
    policy: StationaryPolicy
    prefixes: dict[int, PrefixTables] = field(default_factory=dict)

    def prefix(self, s0: int) -> PrefixTables:
        if s0 not in self.prefixes:
            self.prefixes[s0] = prefix_dp(self.spec, self.config.k, self.table, s0)
        return self.prefixes[s0]

    def regret(self, s0: int) -> float:
        return self.prefix(s0).regret

    def controller(self, s0: int = 0) -> "RegretController":
        return RegretController(self.spec, self.config.k, self.table.values, self.policy.actions, self.prefix(s0))


def solve_discounted(spec: SystemSpec, config: SolverConfig | None = None, **kwargs) -> DiscountedSolution:
    config = config or SolverConfig(**kwargs)
    table = solve_fixed_point(spec, config)
    policy = extract_stationary_policy(spec, config.k, table)
    return DiscountedSolution(spec, config, table, policy)


class RegretController:
    """Online runtime for a solved regret policy.

    Call :meth:`step` once per time step with the previous step's realized
    disturbance (``None`` at ``t = 0``); it returns the action to apply now.
    The lagged benchmark state advances with the benchmark action that
    maximizes the stage value at the realized disturbance.
    """

    def __init__(
        self,
        spec: SystemSpec,
        k: int,
        values: np.ndarray,
        actions: np.ndarray,
        prefix: PrefixTables,
        operator: RegretOperator | None = None,
    ):
        self.spec = spec
        self.k = k
        self.values = values
        self.actions = actions
        self.prefix = prefix
        self.space = AugmentedSpace.of(spec, k)
        self._op = operator or RegretOperator(spec, k)
        self.reset(prefix.s0)

    def reset(self, s0: int | None = None) -> None:
        if s0 is not None and s0 != self.prefix.s0:
            raise ValueError(f"controller was solved for s0={self.prefix.s0}, got {s0}")
        self.t = 0
        self.s_c = self.prefix.s0
        self.s_l = self.prefix.s0
        self.window: list[int] = []
        self._last_action: int | None = None

    @property
    def state_index(self) -> int:
        return self.space.index(self.s_c, self.s_l, self.window)

    def _advance(self, w: int) -> None:
        a = self._last_action
        if self.t - 1 >= self.k:
            a_l = self._op.benchmark_response(self.values, self.state_index, a, w)
            self.s_l = int(self.spec.transition[self.s_l, a_l, self.window[0]])
            self.window = self.window[1:]
        self.s_c = int(self.spec.transition[self.s_c, a, w])
        self.window.append(int(w))

    def step(self, realized_w: int | None = None) -> int:
        if self.t > 0:
            if realized_w is None:
                raise ValueError("realized disturbance required after the first step")
            if not 0 <= realized_w < self.spec.num_disturbances:
                raise ValueError(f"disturbance {realized_w} outside the model alphabet")
            self._advance(realized_w)
        elif realized_w is not None:
            raise ValueError("no disturbance precedes the first step")
        if self.t < self.k:
            w_idx = 0
            for w in self.window:
                w_idx = w_idx * self.spec.num_disturbances + w
            action = int(self.prefix.actions[self.t][self.s_c, w_idx])
        else:
            action = int(self.actions[self.state_index])
        self._last_action = action
        self.t += 1
        return action


def controller_step(runtime: RegretController, realized_w: int | None) -> int:
    return runtime.step(realized_w)
