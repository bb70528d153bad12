import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import reference_operator
from regretopt import (
    AugmentedSpace,
    AugmentedState,
    RegretOperator,
    aligned_regret_cost,
    apply_regret_bellman,
    augmented_transition,
    build_inventory_system,
    random_system,
)

systems = st.builds(
    random_system,
    st.integers(1, 3), st.integers(1, 3), st.integers(1, 3),
    st.sampled_from([0.5, 0.9, 0.995]),
    st.integers(0, 2**32 - 1),
)


class TestIndexing:
    def test_first_index(self):
        assert AugmentedSpace(2, 2, 1).index(0, 0, (0,)) == 0

    def test_count_k2(self):
        space = AugmentedSpace(2, 2, 2)
        assert space.size == 16
        idx = {space.index(a, b, (c, d)) for a in range(2) for b in range(2) for c in range(2) for d in range(2)}
        assert idx == set(range(16))

    def test_oldest_digit_most_significant(self):
        space = AugmentedSpace(1, 3, 2)
        assert space.index(0, 0, (1, 0)) == 3
        assert space.shift(3, 2) == 2  # (1, 0) -> (0, 2)

    def test_decode_round_trip_random(self):
        rng = np.random.default_rng(0)
        space = AugmentedSpace(4, 3, 3)
        for _ in range(1000):
            x = AugmentedState(int(rng.integers(4)), int(rng.integers(4)), tuple(int(w) for w in rng.integers(3, size=3)))
            assert space.decode(space.index(*x)) == x

    def test_bijection_full_space(self):
        space = AugmentedSpace(3, 2, 2)
        assert [space.index(*space.decode(i)) for i in range(space.size)] == list(range(space.size))

    @pytest.mark.parametrize("args", [(3, 0, (0,)), (0, 0, (2,)), (0, 0, (0, 0))])
    def test_out_of_range(self, args):
        with pytest.raises(ValueError):
            AugmentedSpace(2, 2, 1).index(*args)

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError, match="k must be >= 1"):
            AugmentedSpace(2, 2, 0)


class TestStageMaps:
    def test_cost_zero_rewards(self, zero_system):
        assert aligned_regret_cost(zero_system, AugmentedState(0, 1, (1,)), 1, 0, 1) == 0.0

    def test_cost_matching_pennies(self, pennies):
        x = AugmentedState(0, 0, (1,))
        assert aligned_regret_cost(pennies, x, 1, 1, 1) == 0.5
        assert aligned_regret_cost(pennies, x, 0, 0, 1) == 0.0

    def test_transition_window_shift(self):
        spec = random_system(2, 2, 8, rng=0)
        x = augmented_transition(spec, AugmentedState(0, 0, (3, 7)), 0, 0, 5)
        assert x.window == (7, 5)

    def test_self_loop_system(self):
        f = np.broadcast_to(np.arange(3)[:, None, None], (3, 2, 2))
        spec = random_system(3, 2, 2, rng=0)
        from regretopt import SystemSpec
        loop = SystemSpec(f, spec.reward, 0.9)
        x = AugmentedState(2, 1, (0,))
        assert augmented_transition(loop, x, 1, 0, 1) == AugmentedState(2, 1, (1,))

    def test_inventory_causal_step(self):
        spec = build_inventory_system()
        x = augmented_transition(spec, AugmentedState(5, 0, (0,)), 0, 0, 3)
        assert x.s_c == 2


class TestOperator:
    def test_zero_system_fixed_point(self, zero_system):
        TJ, res = apply_regret_bellman(zero_system, 1, np.zeros(8))
        assert np.all(TJ == 0) and res == 0.0

    def test_constant_zero_rewards(self, zero_system):
        TJ, _ = apply_regret_bellman(zero_system, 2, np.full(16, 3.0))
        np.testing.assert_allclose(TJ, 0.9 * 3.0, atol=1e-12)

    def test_matching_pennies_first_sweep(self, pennies):
        TJ, res = apply_regret_bellman(pennies, 1, np.zeros(8))
        assert np.all(TJ == 1.0) and res == 1.0

    @pytest.mark.parametrize("k", [1, 2])
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_reference(self, k, seed):
        rng = np.random.default_rng(seed)
        spec = random_system(*rng.integers(1, 4, size=3), gamma=float(rng.choice([0.5, 0.9])), rng=rng)
        J = rng.normal(size=AugmentedSpace.of(spec, k).size)
        np.testing.assert_allclose(RegretOperator(spec, k).apply(J), reference_operator(spec, k, J), atol=1e-12)

    def test_matches_reference_unit_discount(self, small_system):
        J = np.random.default_rng(3).normal(size=AugmentedSpace.of(small_system, 2).size)
        got = RegretOperator(small_system, 2, discount=1.0).apply(J)
        np.testing.assert_allclose(got, reference_operator(small_system, 2, J, discount=1.0), atol=1e-12)

    def test_input_not_mutated(self):
        spec = random_system(2, 2, 1, rng=0)
        J = np.arange(4, dtype=float)
        before = J.copy()
        RegretOperator(spec, 1).apply(J)
        assert np.array_equal(J, before)

    def test_wrong_length(self, pennies):
        with pytest.raises(ValueError, match="shape"):
            RegretOperator(pennies, 1).apply(np.zeros(3))

    def test_gauss_seidel_fixed_point_agrees(self, small_system):
        op = RegretOperator(small_system, 1)
        J = np.zeros(op.space.size)
        for _ in range(400):
            J = op.gauss_seidel_sweep(J)
        np.testing.assert_allclose(op.apply(J), J, atol=1e-9)

    def test_state_queries_consistent(self, small_system):
        op = RegretOperator(small_system, 2)
        J = np.random.default_rng(1).normal(size=op.space.size)
        TJ, pol = op.apply(J, with_policy=True)
        for idx in range(0, op.space.size, 7):
            Q = op.state_values(J, idx)
            a = op.causal_action(J, idx)
            assert a == pol[idx]
            assert Q[a].max() == pytest.approx(TJ[idx], abs=1e-12)
            w, a_l, v = op.worst_case(J, idx, a)
            assert v == Q[a].max() and Q[a, w, a_l] == v
            assert Q[a, w, op.benchmark_response(J, idx, a, w)] == v


class TestOperatorProperties:
    @settings(max_examples=40, deadline=None)
    @given(systems, st.integers(1, 2), st.integers(0, 2**32 - 1))
    def test_contraction(self, spec, k, seed):
        rng = np.random.default_rng(seed)
        op = RegretOperator(spec, k)
        J1, J2 = rng.normal(scale=5, size=(2, op.space.size))
        lhs = np.abs(op.apply(J1) - op.apply(J2)).max()
        assert lhs <= spec.gamma * np.abs(J1 - J2).max() + 1e-12

    @settings(max_examples=40, deadline=None)
    @given(systems, st.integers(1, 2), st.integers(0, 2**32 - 1))
    def test_monotone(self, spec, k, seed):
        rng = np.random.default_rng(seed)
        op = RegretOperator(spec, k)
        J = rng.normal(size=op.space.size)
        Jp = J + rng.uniform(0, 1, size=op.space.size)
        assert np.all(op.apply(J) <= op.apply(Jp) + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(systems, st.integers(1, 2), st.floats(-100, 100), st.integers(0, 2**32 - 1))
    def test_constant_shift(self, spec, k, c, seed):
        op = RegretOperator(spec, k)
        J = np.random.default_rng(seed).normal(size=op.space.size)
        np.testing.assert_allclose(op.apply(J + c), op.apply(J) + spec.gamma * c, atol=1e-12)
