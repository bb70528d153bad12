import numpy as np
import pytest

from regretopt import (
    EnumerationTooLarge,
    FiniteSolverConfig,
    backward_regret_dp,
    decomposition_check,
    extract_finite_policy,
    finite_prefix_dp,
    history_tree_regret,
    matching_pennies,
    mdp_value_iteration,
    random_system,
    solve_discounted,
    worst_case_realized_regret,
)
from regretopt.oracle import best_plan_on_block, clairvoyant_regret, history_tree_size
from regretopt.simulation import rollout


class TestHistoryTree:
    def test_zero(self, zero_system):
        assert history_tree_regret(zero_system, 0, 1, 3) == 0.0

    def test_single_action(self):
        assert history_tree_regret(random_system(3, 1, 3, rng=0), 1, 2, 4) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("T", [2, 3, 4])
    def test_matching_pennies(self, pennies, T):
        assert history_tree_regret(pennies, 0, 1, T) == T

    @pytest.mark.parametrize("gamma", [0.5, 0.9])
    def test_discounted_partial_sums(self, gamma):
        spec = matching_pennies(gamma)
        for T in (2, 4, 6):
            assert history_tree_regret(spec, 0, 1, T, discount=gamma) == pytest.approx((1 - gamma**T) / (1 - gamma))

    @pytest.mark.parametrize("seed", range(5))
    def test_discounted_truncation_bound(self, seed):
        spec = random_system(2, 2, 2, gamma=0.5, rng=seed)
        k, T = 1 + seed % 2, 6
        g0 = solve_discounted(spec, k=k, epsilon=1e-9).regret(0)
        tree = history_tree_regret(spec, 0, k, T, discount=spec.gamma)
        # leaf payoffs of the two games differ by the omitted tails only
        bound = (spec.gamma ** (T - k) + spec.gamma**T) * spec.r_max / (1 - spec.gamma)
        assert abs(tree - g0) <= bound + 2e-9

    def test_guard(self):
        spec = random_system(3, 3, 3, rng=0)
        assert history_tree_size(spec, 1, 8) > 10**7
        with pytest.raises(EnumerationTooLarge):
            history_tree_regret(spec, 0, 1, 8)

    def test_bad_k(self, pennies):
        with pytest.raises(ValueError):
            history_tree_regret(pennies, 0, 3, 3)

    def test_best_plan_on_block(self, pennies):
        assert best_plan_on_block(pennies, np.array([0, 1]), np.array([[0, 1], [1, 1]])).tolist() == [2.0, 2.0]

    def test_k_monotonicity_observation(self):
        # unproven in general; kept as an observation on a handful of instances
        rng = np.random.default_rng(0)
        for _ in range(10):
            spec = random_system(2, 2, 2, rng=rng)
            g1 = finite_prefix_dp(backward_regret_dp(spec, FiniteSolverConfig(1, 4)), 0).regret
            g2 = finite_prefix_dp(backward_regret_dp(spec, FiniteSolverConfig(2, 4)), 0).regret
            assert g2 >= g1 - 1e-9


class TestRealizedRegret:
    def test_zero(self, zero_system):
        stack = backward_regret_dp(zero_system, FiniteSolverConfig(1, 3))
        value, witness = worst_case_realized_regret(zero_system, extract_finite_policy(stack, 0), 0, 1, 3, stack)
        assert value == 0.0 and len(witness) == 3

    @pytest.mark.parametrize("seed", range(6))
    def test_tight_for_dp_controller(self, seed):
        rng = np.random.default_rng(seed)
        spec = random_system(*rng.integers(1, 4, size=3), rng=rng)
        k, T = 1 + seed % 2, 4
        stack = backward_regret_dp(spec, FiniteSolverConfig(k, T))
        g0 = finite_prefix_dp(stack, 0).regret
        value, witness = worst_case_realized_regret(spec, extract_finite_policy(stack, 0), 0, k, T, stack)
        assert value == pytest.approx(g0, abs=1e-9)

    def test_mdp_baseline_no_better(self, pennies):
        T = 4
        stack = backward_regret_dp(pennies, FiniteSolverConfig(1, T))
        g0 = finite_prefix_dp(stack, 0).regret
        ctrl = mdp_value_iteration(pennies, [0.5, 0.5]).controller(pennies, 0)
        value, _ = worst_case_realized_regret(pennies, ctrl, 0, 1, T, stack)
        assert value >= g0 - 1e-9

    def test_witness_replay(self, pennies):
        stack = backward_regret_dp(pennies, FiniteSolverConfig(1, 5))
        ctrl = extract_finite_policy(stack, 0)
        value, witness = worst_case_realized_regret(pennies, ctrl, 0, 1, 5, stack)
        assert rollout(pennies, ctrl, witness, 0, gamma=1.0).total_return == 0.0
        assert value == 5.0

    def test_guard(self, pennies):
        with pytest.raises(EnumerationTooLarge):
            worst_case_realized_regret(pennies, None, 0, 1, 30)

    def test_clairvoyant_diagnostic_at_least_game_value(self):
        spec = random_system(2, 2, 2, rng=9)
        stack = backward_regret_dp(spec, FiniteSolverConfig(1, 4))
        ctrl = extract_finite_policy(stack, 0)
        game, _ = worst_case_realized_regret(spec, ctrl, 0, 1, 4, stack)
        literal, _ = clairvoyant_regret(spec, ctrl, 0, 4)
        assert literal >= game - 1e-9


class TestDecomposition:
    def test_zero(self, zero_system):
        report = decomposition_check(zero_system, 1, 4, trials=10)
        assert report.passed and report.max_error == 0.0

    def test_random_systems(self):
        rng = np.random.default_rng(0)
        for i in range(20):
            spec = random_system(*rng.integers(1, 4, size=3), gamma=0.9, rng=rng)
            assert decomposition_check(spec, 1 + i % 2, 6, trials=5, seed=i).passed

    def test_k_equals_T_minus_one(self, small_system):
        assert decomposition_check(small_system, 3, 4, trials=20).passed

    def test_zero_tolerance_reports(self):
        spec = random_system(3, 3, 3, rng=1)
        report = decomposition_check(spec, 2, 8, trials=50, tolerance=0.0)
        assert report.trials == 50
        assert report.passed == (report.max_error == 0.0)
