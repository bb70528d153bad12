import itertools

import numpy as np
import pytest

from regretopt import (
    SystemSpec,
    build_inventory_system,
    clairvoyant_path_value,
    evaluate_state_policy,
    mdp_value_iteration,
    random_system,
    robust_value_iteration,
    truncated_poisson_pmf,
)
from regretopt.simulation import rollout


class TestMdp:
    def test_single_action_expected_return(self):
        spec = random_system(3, 1, 3, gamma=0.9, rng=0)
        p = np.array([0.2, 0.5, 0.3])
        pol = mdp_value_iteration(spec, p, epsilon=1e-9)
        assert np.all(pol.actions == 0)
        np.testing.assert_allclose(pol.values, evaluate_state_policy(spec, pol.actions, p), atol=1e-9)

    def test_point_mass_matches_robust_on_singleton(self):
        spec = random_system(3, 3, 3, gamma=0.9, rng=1)
        single = SystemSpec(spec.transition[:, :, 1:2], spec.reward[:, :, 1:2], spec.gamma)
        mdp = mdp_value_iteration(spec, [0.0, 1.0, 0.0], epsilon=1e-9)
        rob = robust_value_iteration(single, epsilon=1e-9)
        np.testing.assert_allclose(mdp.values, rob.values, atol=2e-9)
        assert np.array_equal(mdp.actions, rob.actions)

    @pytest.mark.parametrize("bad", [[0.5, 0.6, 0.0], [-0.1, 0.6, 0.5], [0.5, 0.5]])
    def test_bad_distribution(self, bad):
        with pytest.raises(ValueError):
            mdp_value_iteration(random_system(2, 2, 3, rng=0), bad)

    def test_dominates_random_policies(self):
        spec = random_system(4, 3, 3, gamma=0.9, rng=2)
        p = np.array([0.3, 0.3, 0.4])
        eps = 1e-6
        pol = mdp_value_iteration(spec, p, eps)
        rng = np.random.default_rng(0)
        for _ in range(10):
            other = rng.integers(3, size=4)
            assert np.all(pol.values >= evaluate_state_policy(spec, other, p) - 2 * eps)

    def test_inventory_design_point(self):
        spec = build_inventory_system()
        pol = mdp_value_iteration(spec, truncated_poisson_pmf(5.0, 25))
        assert pol.converged
        # orders never push stock above what is sensible for mean demand 5
        assert pol.actions[0] > 0 and pol.actions[20] == 0


class TestRobust:
    def test_singleton_alphabet_equals_mdp(self):
        spec = random_system(3, 2, 1, gamma=0.8, rng=3)
        np.testing.assert_allclose(robust_value_iteration(spec, 1e-9).values,
                                   mdp_value_iteration(spec, [1.0], 1e-9).values, atol=2e-9)

    def test_matching_pennies_zero(self, pennies):
        assert np.allclose(robust_value_iteration(pennies).values, 0.0, atol=1e-6)

    def test_guaranteed_floor(self):
        spec = random_system(2, 2, 2, gamma=0.5, rng=4)
        pol = robust_value_iteration(spec, 1e-9)
        T = 12
        slack = spec.r_max * spec.gamma**T / (1 - spec.gamma)
        for path in itertools.product(range(2), repeat=T):
            traj = rollout(spec, pol.controller(spec, 0), path, 0)
            assert traj.discounted_return >= pol.values[0] - slack - 1e-9

    def test_inventory_converges(self):
        assert robust_value_iteration(build_inventory_system()).converged


class TestClairvoyant:
    def test_zero(self, zero_system):
        assert clairvoyant_path_value(zero_system, 0, [1, 0, 1])[0] == 0.0

    def test_matching_pennies(self, pennies):
        value, actions = clairvoyant_path_value(pennies, 0, [1, 0, 0])
        assert value == 3.0 and actions == [1, 0, 0]

    def test_single_action_forced(self):
        spec = random_system(3, 1, 2, rng=5)
        path = [1, 1, 0, 1]
        value, _ = clairvoyant_path_value(spec, 2, path)
        assert value == pytest.approx(rollout(spec, _Const(), path, 2).total_return)

    def test_discounted_flag(self, pennies):
        assert clairvoyant_path_value(pennies, 0, [0, 1], discounted=True)[0] == 1.5

    def test_dominates_causal(self):
        spec = random_system(3, 2, 2, rng=6)
        pol = robust_value_iteration(spec)
        for path in itertools.product(range(2), repeat=5):
            best, _ = clairvoyant_path_value(spec, 0, path)
            assert best >= rollout(spec, pol.controller(spec, 0), path, 0).total_return - 1e-12

    @pytest.mark.parametrize("path", [[], [0, 2]])
    def test_errors(self, pennies, path):
        with pytest.raises(ValueError):
            clairvoyant_path_value(pennies, 0, path)


class _Const:
    def reset(self, s0=None):
        pass

    def step(self, w=None):
        return 0


def test_state_feedback_controller_tracks_state(small_system):
    pol = robust_value_iteration(small_system)
    ctrl = pol.controller(small_system, 1)
    assert ctrl.step() == pol.actions[1]
    s = small_system.transition[1, pol.actions[1], 0]
    assert ctrl.step(0) == pol.actions[s]
