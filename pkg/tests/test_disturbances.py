import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from regretopt import HmmModel, PoissonModel, sample, sample_hmm, sample_iid, truncated_poisson_pmf
from regretopt.disturbances import make_rng


PINNED = [6, 4, 2, 1, 7, 8, 5, 6]


class TestPmf:
    @pytest.mark.parametrize("lam, w_max", [(0.5, 3), (5.0, 30), (12.0, 25), (19.0, 25)])
    def test_matches_scipy(self, lam, w_max):
        expected = stats.poisson.pmf(np.arange(w_max + 1), lam)
        expected[-1] = stats.poisson.sf(w_max - 1, lam)
        np.testing.assert_allclose(truncated_poisson_pmf(lam, w_max), expected, rtol=1e-10, atol=1e-15)

    def test_normalized(self):
        assert truncated_poisson_pmf(7.3, 25).sum() == pytest.approx(1.0, abs=1e-14)

    def test_zero_rate(self):
        assert truncated_poisson_pmf(0.0, 4).tolist() == [1.0, 0, 0, 0, 0]


class TestIid:
    def test_zero_rate(self):
        assert np.all(sample_iid(PoissonModel(0.0, 10), 500, 1) == 0)

    def test_deterministic(self):
        m = PoissonModel(4.0, 20)
        assert np.array_equal(sample_iid(m, 1000, 42), sample_iid(m, 1000, 42))
        assert not np.array_equal(sample_iid(m, 1000, 42), sample_iid(m, 1000, 43))

    def test_pinned_sequence(self):
        # guards the documented generator and inversion rule against silent changes
        assert sample_iid(PoissonModel(5.0, 25), 8, 0).tolist() == PINNED

    def test_mean(self):
        m = PoissonModel(5.0, 30)
        mean = float(np.arange(31) @ truncated_poisson_pmf(5.0, 30))
        assert abs(sample_iid(m, 10**5, 7).mean() - mean) < 0.05

    def test_clamped_mass(self):
        x = sample_iid(PoissonModel(10.0, 5), 20000, 3)
        assert x.max() == 5
        assert abs((x == 5).mean() - stats.poisson.sf(4, 10.0)) < 0.01

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0, 30), st.integers(0, 30), st.integers(0, 500), st.integers(0, 2**64 - 1))
    def test_support(self, lam, w_max, n, seed):
        x = sample_iid(PoissonModel(lam, w_max), n, seed)
        assert x.shape == (n,) and (n == 0 or (x.min() >= 0 and x.max() <= w_max))

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(ValueError):
            make_rng(seed)

    @pytest.mark.parametrize("bad", [dict(lam=-1.0, w_max=3), dict(lam=float("nan"), w_max=3), dict(lam=1.0, w_max=-1)])
    def test_model_validation(self, bad):
        with pytest.raises(ValueError):
            PoissonModel(**bad)


class TestHmm:
    def test_absorbing_low(self):
        d, reg = sample_hmm(HmmModel(2.0, 15.0, 25, persistence=1.0), 5000, 0)
        assert np.all(reg == 0)
        assert abs(d.mean() - 2.0) < 0.1

    def test_equal_rates_match_iid_distribution(self):
        d, _ = sample_hmm(HmmModel(6.0, 6.0, 25), 50000, 1)
        ref = sample_iid(PoissonModel(6.0, 25), 50000, 2)
        assert stats.ks_2samp(d, ref).pvalue > 1e-3

    def test_stay_frequency_and_occupancy(self):
        _, reg = sample_hmm(HmmModel(4.0, 7.0, 25, 0.9), 10**5, 11)
        stay = (reg[1:] == reg[:-1]).mean()
        assert abs(stay - 0.9) < 0.01
        assert abs(reg.mean() - 0.5) < 0.02

    def test_initial_regime(self):
        _, reg = sample_hmm(HmmModel(4.0, 7.0, 25, initial_regime="high"), 10, 0)
        assert reg[0] == 1

    def test_deterministic_and_dispatch(self):
        m = HmmModel(8.0, 11.0, 25)
        assert np.array_equal(sample(m, 300, 5), sample_hmm(m, 300, 5)[0])
        assert np.array_equal(sample(m, 300, 5), sample(m, 300, 5))

    def test_regime_emissions_differ(self):
        d, reg = sample_hmm(HmmModel(2.0, 18.0, 25), 20000, 4)
        assert d[reg == 0].mean() < 3 < 16 < d[reg == 1].mean()

    @pytest.mark.parametrize("bad", [dict(persistence=1.5), dict(initial_regime="mid"), dict(lam_low=-1.0)])
    def test_validation(self, bad):
        args = dict(lam_low=4.0, lam_high=7.0, w_max=25) | bad
        with pytest.raises(ValueError):
            HmmModel(**args)

    def test_empty(self):
        d, reg = sample_hmm(HmmModel(4.0, 7.0, 25), 0, 0)
        assert d.size == reg.size == 0
