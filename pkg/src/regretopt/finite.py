"""Finite-horizon regret DP (undiscounted).

Stages ``k..T-1`` run the regret operator with unit discount backwards from a
terminal table that credits the benchmark's best plan on the final, fully
known block of ``k`` disturbances.  Stages ``0..k-1`` are covered by the prefix
recursion shared with the discounted solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augmented import AugmentedSpace, RegretOperator
from .discounted import PrefixTables, prefix_recursion
from .system import SystemSpec


class HorizonExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class FiniteSolverConfig:
    k: int
    horizon: int

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        if int(self.horizon) != self.horizon or self.horizon <= self.k:
            raise ValueError(f"horizon must exceed k (k={self.k}, horizon={self.horizon})")


def tail_value(spec: SystemSpec, k: int) -> np.ndarray:
    """Best undiscounted ``k``-step return on a known disturbance block.

    Returns an array of shape ``(|S|, |W|**k)`` indexed by starting state and
    block (oldest disturbance most significant).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    nS, _, nW = spec.shape
    f, r = spec.transition, spec.reward
    # value[s, suffix]: best return over the last j positions of the block
    value = np.zeros((nS, 1))
    for j in range(1, k + 1):
        # position k-j in the block sees disturbance w, then suffix of length j-1
        cand = r[:, :, :, None] + value[f]  # (S, A, W, suffix)
        value = cand.max(axis=1).reshape(nS, nW * value.shape[1])
    return value


@dataclass
class FiniteValueStack:
    """Per-stage regret tables ``J_t`` (``t = k..T``) and causal selectors (``t = k..T-1``)."""

    spec: SystemSpec
    config: FiniteSolverConfig
    tail: np.ndarray
    values: dict[int, np.ndarray]
    actions: dict[int, np.ndarray]

    @property
    def k(self) -> int:
        return self.config.k

    @property
    def horizon(self) -> int:
        return self.config.horizon


def backward_regret_dp(
    spec: SystemSpec,
    config: FiniteSolverConfig,
    tail: np.ndarray | None = None,
    keep_stages: bool = True,
) -> FiniteValueStack:
    """Backward regret recursion from ``J_T(x) = tail(s_l, window)``.

    With ``keep_stages=False`` only ``J_k`` is retained (two live buffers),
    which is enough for the optimal regret but not for policy extraction.
    """
    k, T = config.k, config.horizon
    tail = tail_value(spec, k) if tail is None else np.asarray(tail)
    space = AugmentedSpace.of(spec, k)
    op = RegretOperator(spec, k, discount=1.0)
    J = np.broadcast_to(tail[None, :, :], space.shape).reshape(-1).copy()
    values = {T: J} if keep_stages else {}
    actions: dict[int, np.ndarray] = {}
    for t in range(T - 1, k - 1, -1):
        if keep_stages:
            J, actions[t] = op.apply(J, with_policy=True)
            values[t] = J
        else:
            J = op.apply(J)
    values[k] = J
    return FiniteValueStack(spec, config, tail, values, actions)


def finite_prefix_dp(stack: FiniteValueStack, s0: int) -> PrefixTables:
    """Optimal finite-horizon regret from ``s0``: ``finite_prefix_dp(...).regret``."""
    spec, k = stack.spec, stack.k
    if not 0 <= s0 < spec.num_states:
        raise ValueError(f"initial state {s0} out of range")
    terminal = stack.values[k].reshape(AugmentedSpace.of(spec, k).shape)[:, s0, :]
    vals, acts = prefix_recursion(spec, terminal, k, np.ones(k))
    return PrefixTables(s0, vals, acts)


def solve_finite(spec: SystemSpec, k: int, horizon: int, s0: int = 0) -> tuple[FiniteValueStack, PrefixTables]:
    stack = backward_regret_dp(spec, FiniteSolverConfig(k, horizon))
    return stack, finite_prefix_dp(stack, s0)


class FiniteRegretController:
    """Time-indexed runtime for the finite-horizon regret policy.

    Same stepping protocol as :class:`regretopt.discounted.RegretController`;
    stepping past stage ``T-1`` raises :class:`HorizonExhausted`.
    """

    def __init__(self, stack: FiniteValueStack, prefix: PrefixTables):
        if not stack.actions:
            raise ValueError("stack was built without stage tables (keep_stages=False)")
        self.stack = stack
        self.spec = stack.spec
        self.k = stack.k
        self.horizon = stack.horizon
        self.prefix = prefix
        self.space = AugmentedSpace.of(self.spec, self.k)
        self._op = RegretOperator(self.spec, self.k, discount=1.0)
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
        prev = self.t - 1
        a = self._last_action
        if prev >= self.k:
            a_l = self._op.benchmark_response(self.stack.values[prev + 1], self.state_index, a, w)
            self.s_l = int(self.spec.transition[self.s_l, a_l, self.window[0]])
            self.window = self.window[1:]
        self.s_c = int(self.spec.transition[self.s_c, a, w])
        self.window.append(int(w))

    def step(self, realized_w: int | None = None) -> int:
        if self.t >= self.horizon:
            raise HorizonExhausted(f"horizon {self.horizon} exhausted")
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
            action = int(self.stack.actions[self.t][self.state_index])
        self._last_action = action
        self.t += 1
        return action


def extract_finite_policy(stack: FiniteValueStack, s0: int) -> FiniteRegretController:
    return FiniteRegretController(stack, finite_prefix_dp(stack, s0))
