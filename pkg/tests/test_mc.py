import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hdgauss.dgp import DgpSpec
from hdgauss.exceptions import ContractError, DataError
from hdgauss.mc import (
    DistanceEstimate,
    ball_distance,
    coupled_ball_distance,
    coupled_ks,
    halfspace_distance,
    halfspace_distance_mc,
    ks_ball_distance,
    ks_bootstrap_interval,
    ks_statistic,
    replicate_array,
    run_replicated,
)
from hdgauss.rng import check_seed, stream
from hdgauss.special import chi2_cdf


def uniform_block(rng, k):
    return rng.random(k)


class TestKs:
    def test_single_point(self):
        assert ks_statistic([1.0], lambda t: np.full_like(t, 0.5)) == 0.5

    def test_two_points(self):
        f = {1.0: 0.25, 2.0: 0.75}
        assert ks_statistic([2.0, 1.0], lambda t: np.array([f[v] for v in t])) == pytest.approx(0.25)

    def test_nan(self):
        with pytest.raises(DataError):
            ks_ball_distance([1.0, np.nan], lambda t: t)

    def test_matches_scipy(self, rng):
        x = rng.standard_normal(500)
        assert ks_statistic(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-14)

    def test_null_band(self):
        x = stream(3, "null").random(10 ** 6)
        est = ks_ball_distance(x, lambda t: np.clip(t, 0, 1))
        assert est.value <= 1.63 / math.sqrt(x.size)
        assert est.stderr == pytest.approx(1.36 / 1000)
        assert est.family == "centered-balls"

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), power=st.floats(0.2, 5.0))
    def test_monotone_transform_invariance(self, seed, power):
        x = np.random.default_rng(seed).chisquare(3, size=200)
        a = ks_statistic(x, lambda t: chi2_cdf(3, t))
        b = ks_statistic(x ** power, lambda t: chi2_cdf(3, t ** (1 / power)))
        assert a == pytest.approx(b, abs=1e-12)

    def test_bootstrap_interval(self, rng):
        x = rng.standard_normal(400) + 0.3
        lo, hi = ks_bootstrap_interval(x, stats.norm.cdf, n_boot=100)
        assert lo <= ks_statistic(x, stats.norm.cdf) <= hi + 0.05


class TestCoupledKs:
    def test_identical(self):
        x = np.arange(10.0)
        assert coupled_ks(x, x) == (0.0, 0.0)

    def test_matches_two_sample(self, rng):
        a, b = rng.standard_normal(300), rng.standard_normal(300) + 0.2
        assert coupled_ks(a, b)[0] == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)

    def test_ties(self):
        stat, _ = coupled_ks([1.0, 1.0, 2.0, 2.0], [1.0, 2.0, 2.0, 2.0])
        assert stat == pytest.approx(0.25)

    def test_bad_sizes(self):
        with pytest.raises(DataError):
            coupled_ks([1.0], [1.0, 2.0])


class TestDistanceEstimate:
    def test_range(self):
        with pytest.raises(ContractError):
            DistanceEstimate(1.5, "centered-balls", 10, 0.1)
        with pytest.raises(ContractError):
            DistanceEstimate(0.1, "all-convex", 10, 0.1)


class TestReplication:
    def test_empty(self):
        assert list(run_replicated(uniform_block, 0, seed=1)) == []
        assert replicate_array(uniform_block, 0, seed=1).size == 0

    @pytest.mark.parametrize("workers", [2, 4, 8])
    def test_worker_independence(self, workers):
        ref = replicate_array(uniform_block, 10_000, seed=5, workers=1, block_size=512)
        out = replicate_array(uniform_block, 10_000, seed=5, workers=workers, block_size=512)
        assert out.tobytes() == ref.tobytes()
        streamed = np.array(list(run_replicated(uniform_block, 10_000, 5, workers, 512)))
        assert streamed.tobytes() == ref.tobytes()

    def test_prefix_stable(self):
        a = replicate_array(uniform_block, 1000, seed=5, block_size=100)
        b = replicate_array(uniform_block, 2000, seed=5, block_size=100)
        assert np.array_equal(a, b[:1000])

    def test_seed_change_independent(self):
        a = replicate_array(uniform_block, 50_000, seed=1)
        b = replicate_array(uniform_block, 50_000, seed=2)
        assert not np.any(np.isin(a, b))
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(a.size)

    def test_stream_keys(self):
        assert stream(1, "a", 0).random() != stream(1, "a", 1).random()
        assert stream(1, "a", 0).random() == stream(1, "a", 0).random()

    @pytest.mark.parametrize("bad", [-1, 2 ** 64, 1.5, True])
    def test_bad_seed(self, bad):
        with pytest.raises(ContractError):
            check_seed(bad)

    def test_bad_block_shape(self):
        with pytest.raises(ContractError):
            list(run_replicated(lambda rng, k: np.zeros(k + 1), 5, 1))


class TestDistances:
    def test_gaussian_null(self):
        est = ball_distance(DgpSpec("iid-marginal", 50, 5), 20_000, seed=3)
        assert est.value <= 1.63 / math.sqrt(20_000)

    def test_threads_identical(self):
        spec = DgpSpec("iid-marginal", 64, 8, marginal="rademacher")
        a = ball_distance(spec, 20_000, 9, workers=1, block_size=1000)
        b = ball_distance(spec, 20_000, 9, workers=4, block_size=1000)
        assert a == b

    def test_coupled_gaussian_is_zero(self):
        est = coupled_ball_distance(DgpSpec("iid-marginal", 50, 5), 5000, seed=1)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_halfspace_gaussian_null(self):
        est = halfspace_distance_mc(DgpSpec("iid-marginal", 50, 3), 100_000, seed=2)
        assert est.value <= 1.63 / math.sqrt(100_000)
        assert est.family == "half-space"

    def test_halfspace_direction_invariance(self, rng):
        spec = DgpSpec("iid-marginal", 50, 3)
        u = rng.standard_normal(3)
        u /= np.linalg.norm(u)
        a = halfspace_distance_mc(spec, 50_000, seed=2)
        b = halfspace_distance_mc(spec, 50_000, seed=2, direction=u)
        assert abs(a.value - b.value) <= 2 * 1.63 / math.sqrt(50_000)

    def test_halfspace_requires_unit(self):
        with pytest.raises(ContractError):
            halfspace_distance(np.zeros((3, 2)), [1.0, 1.0])

    def test_multiplier_floor(self):
        est = ball_distance(DgpSpec("multiplier", 200, 200), 20_000, seed=4)
        assert est.value > 0.05
