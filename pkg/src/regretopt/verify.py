"""Self-check suites run by ``regretopt verify``.

Each suite draws random small systems from a fixed seed and returns a
:class:`SuiteResult`; the first failing instance is kept in a form that can be
written to disk and replayed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .augmented import RegretOperator
from .discounted import SolverConfig, solve_discounted
from .finite import solve_finite
from .oracle import MAX_LEAVES, EnumerationTooLarge, decomposition_check, history_tree_regret, history_tree_size
from .system import SystemSpec, random_system, system_to_dict


@dataclass(frozen=True)
class Grid:
    max_states: int = 2
    max_actions: int = 2
    max_disturbances: int = 2
    max_k: int = 2
    max_horizon: int = 4
    instances: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("max_states", "max_actions", "max_disturbances", "max_k", "instances"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_horizon <= 1:
            raise ValueError("max_horizon must be >= 2")

    def cells(self):
        for nS in range(1, self.max_states + 1):
            for nA in range(1, self.max_actions + 1):
                for nW in range(1, self.max_disturbances + 1):
                    yield nS, nA, nW

    def check_guard(self) -> None:
        probe = random_system(self.max_states, self.max_actions, self.max_disturbances, rng=0)
        leaves = history_tree_size(probe, 1, self.max_horizon)
        if leaves > MAX_LEAVES:
            raise EnumerationTooLarge(
                f"grid bound needs {leaves} history-tree leaves per instance (guard {MAX_LEAVES})"
            )


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    max_error: float = 0.0
    failure: dict[str, Any] | None = None

    @property
    def passed(self) -> bool:
        return self.failure is None

    def record(self, error: float, tolerance: float, instance: dict[str, Any]) -> None:
        self.checked += 1
        self.max_error = max(self.max_error, error)
        if error > tolerance and self.failure is None:
            self.failure = {"suite": self.name, "error": error, "tolerance": tolerance, **instance}


def _instance(spec: SystemSpec, **extra) -> dict[str, Any]:
    return {"system": system_to_dict(spec), **extra}


def contraction_suite(grid: Grid, tolerance: float, pairs: int = 20) -> SuiteResult:
    """``||TJ - TJ'|| <= gamma ||J - J'||`` on random table pairs."""
    res = SuiteResult("contraction")
    rng = np.random.default_rng(grid.seed)
    for nS, nA, nW in grid.cells():
        for _ in range(grid.instances):
            gamma = float(rng.choice([0.5, 0.9, 0.995]))
            spec = random_system(nS, nA, nW, gamma, rng)
            for k in range(1, grid.max_k + 1):
                op = RegretOperator(spec, k)
                for _ in range(pairs):
                    J1 = rng.normal(scale=10.0, size=op.space.size)
                    J2 = J1 + rng.normal(size=op.space.size)
                    lhs = np.abs(op.apply(J1) - op.apply(J2)).max()
                    excess = max(0.0, lhs - gamma * np.abs(J1 - J2).max())
                    res.record(excess, tolerance, _instance(spec, k=k))
    return res


def oracle_suite(grid: Grid, tolerance: float) -> tuple[SuiteResult, SuiteResult]:
    """Compact finite-horizon DP against full-history backward induction, plus nonnegativity."""
    eq = SuiteResult("oracle-equivalence")
    nonneg = SuiteResult("nonnegativity")
    rng = np.random.default_rng(grid.seed + 1)
    for nS, nA, nW in grid.cells():
        for _ in range(grid.instances):
            spec = random_system(nS, nA, nW, 0.9, rng)
            s0 = int(rng.integers(nS))
            for k in range(1, grid.max_k + 1):
                for T in range(k + 1, grid.max_horizon + 1):
                    _, prefix = solve_finite(spec, k, T, s0)
                    oracle = history_tree_regret(spec, s0, k, T)
                    info = _instance(spec, k=k, horizon=T, s0=s0, dp=prefix.regret, oracle=oracle)
                    eq.record(abs(prefix.regret - oracle), tolerance, info)
                    nonneg.record(max(0.0, -prefix.regret), tolerance, info)
            for k in range(1, grid.max_k + 1):
                sol = solve_discounted(spec, SolverConfig(k=k, epsilon=1e-6))
                g0 = sol.regret(s0)
                nonneg.record(max(0.0, -g0 - 2e-6), tolerance, _instance(spec, k=k, s0=s0, regret=g0))
    return eq, nonneg


def decomposition_suite(grid: Grid, tolerance: float, trials: int = 20) -> SuiteResult:
    res = SuiteResult("decomposition")
    rng = np.random.default_rng(grid.seed + 2)
    for nS, nA, nW in grid.cells():
        for i in range(grid.instances):
            spec = random_system(nS, nA, nW, float(rng.choice([0.5, 0.9])), rng)
            for k in range(1, grid.max_k + 1):
                T = max(grid.max_horizon, k + 1)
                report = decomposition_check(spec, k, T, trials, seed=grid.seed + i, tolerance=tolerance)
                first = report.violations[0] if report.violations else {}
                res.record(report.max_error, tolerance, _instance(spec, k=k, horizon=T, detail=first))
    return res


def run_all(grid: Grid, tolerance: float) -> list[SuiteResult]:
    grid.check_guard()
    eq, nonneg = oracle_suite(grid, tolerance)
    return [contraction_suite(grid, tolerance), eq, decomposition_suite(grid, tolerance), nonneg]
