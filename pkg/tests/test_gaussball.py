import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hdgauss.exceptions import ContractError, DomainError, RankDeficiencyError
from hdgauss.gaussball import (
    WeightedChiSquare,
    anti_concentration_ratio,
    ball_prob,
    ball_prob_sq,
    imhof_cdf,
    squared_norm_cdf,
    to_weighted_chi2,
)
from hdgauss.special import chi2_cdf
from oracles import dense_convolution_cdf, two_weight_cdf


class TestToWeightedChi2:
    def test_identity(self):
        w = to_weighted_chi2(np.eye(3), np.zeros(3))
        np.testing.assert_allclose(w.weights, 1.0)
        np.testing.assert_allclose(w.noncentralities, 0.0)
        assert w.offset == 0.0

    def test_rank_one_with_offset(self):
        w = to_weighted_chi2(np.diag([4.0, 0.0]), [0.0, 3.0])
        np.testing.assert_allclose(w.weights, [4.0])
        assert w.offset == pytest.approx(9.0)

    def test_sampling_oracle(self, rng):
        a = rng.standard_normal((4, 4))
        sigma = a @ a.T + 0.2 * np.eye(4)
        mu = rng.standard_normal(4)
        m = 20000
        z = rng.multivariate_normal(mu, sigma, size=m)
        direct = np.sum(z * z, axis=1)
        w = to_weighted_chi2(sigma, mu)
        g = rng.standard_normal((m, w.weights.size))
        rep = np.sum(w.weights * (g + np.sqrt(w.noncentralities)) ** 2, axis=1) + w.offset
        assert stats.ks_2samp(direct, rep).statistic <= 1.63 * math.sqrt(2 / m)

    def test_not_psd(self):
        with pytest.raises(DomainError):
            to_weighted_chi2(np.diag([1.0, -1.0]))

    def test_invalid_weights(self):
        with pytest.raises(ContractError):
            WeightedChiSquare([1.0, 0.0], [0.0, 0.0])


class TestImhof:
    @pytest.mark.parametrize("d", [1, 2, 5, 50])
    def test_unit_weights_match_chi2(self, d):
        w = WeightedChiSquare(np.ones(d), np.zeros(d))
        xs = np.array([d / 2, d, 2 * d], dtype=float)
        np.testing.assert_allclose(imhof_cdf(w, xs, tol=1e-8), chi2_cdf(d, xs), atol=1e-8)

    def test_single_weight(self):
        w = WeightedChiSquare([4.0], [0.0])
        assert imhof_cdf(w, 4.0) == pytest.approx(2 * stats.norm.cdf(1) - 1, abs=1e-8)

    def test_two_weights_against_convolution(self):
        w = WeightedChiSquare([2.0, 1.0], [0.0, 0.0])
        val = imhof_cdf(w, 3.0, tol=1e-9)
        assert val == pytest.approx(two_weight_cdf(2.0, 1.0, 3.0), abs=1e-6)
        assert val == pytest.approx(dense_convolution_cdf(2.0, 1.0, 3.0), abs=1e-6)
        assert val == pytest.approx(0.6422322444533699, abs=1e-8)

    def test_noncentral_against_scipy(self):
        w = WeightedChiSquare([1.0, 1.0, 1.0], [0.5, 1.0, 0.25])
        lam = 1.75
        xs = np.array([0.5, 2.0, 5.0, 12.0])
        np.testing.assert_allclose(imhof_cdf(w, xs), stats.ncx2.cdf(xs, 3, lam), atol=1e-8)

    def test_error_estimate_returned(self):
        w = WeightedChiSquare([3.0, 1.0, 0.2], [0.0, 0.0, 0.0])
        val, err = imhof_cdf(w, 2.0, tol=1e-8, return_error=True)
        assert 0.0 <= val <= 1.0
        assert err <= 1e-8

    def test_nonpositive_x(self):
        w = WeightedChiSquare([1.0, 2.0], [0.0, 0.0])
        assert imhof_cdf(w, 0.0) == 0.0
        assert imhof_cdf(w, -3.0) == 0.0

    def test_tol_floor(self):
        with pytest.raises(ContractError):
            imhof_cdf(WeightedChiSquare([1.0], [0.0]), 1.0, tol=1e-10)

    def test_monotone_on_grid(self):
        w = WeightedChiSquare([5.0, 1.0, 0.3, 0.1], [0.2, 0.0, 1.0, 0.0])
        xs = np.linspace(0.01, 40, 200)
        vals = imhof_cdf(w, xs, tol=1e-8)
        assert np.all(np.diff(vals) >= -1e-8)


class TestBallProb:
    def test_identity_dispatch(self):
        assert ball_prob(np.eye(2), None, math.sqrt(2)) == pytest.approx(1 - math.exp(-1), abs=1e-12)

    def test_zero_radius(self):
        assert ball_prob(np.eye(2), [1.0, 0.0], 0.0) == 0.0
        assert ball_prob(np.diag([2.0, 1.0]), None, 0.0) == 0.0

    def test_diag_matches_derived_example(self):
        assert ball_prob(np.diag([2.0, 1.0]), None, math.sqrt(3)) == pytest.approx(
            two_weight_cdf(2.0, 1.0, 3.0), abs=1e-7)

    def test_negative_radius(self):
        with pytest.raises(DomainError):
            ball_prob(np.eye(2), None, -1.0)

    def test_squared_norm_cdf_callable(self):
        f = squared_norm_cdf(np.eye(3))
        assert f(3.0) == pytest.approx(chi2_cdf(3, 3.0))

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), r=st.floats(0.1, 4.0))
    def test_rotation_invariance(self, seed, r):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((3, 3))
        sigma = a @ a.T + 0.3 * np.eye(3)
        mu = rng.standard_normal(3)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        p1 = ball_prob(sigma, mu, r, tol=1e-8)
        p2 = ball_prob(q @ sigma @ q.T, q @ mu, r, tol=1e-8)
        assert abs(p1 - p2) <= 2e-8


class TestAntiConcentration:
    def test_identity_two_small_eps(self):
        ratio = anti_concentration_ratio(np.eye(2), eps=0.01)
        assert ratio == pytest.approx(2 ** -0.75, rel=0.02)

    def test_rank_deficient(self):
        with pytest.raises(RankDeficiencyError):
            anti_concentration_ratio(np.diag([1.0, 0.0]))

    def test_bounded_in_d(self):
        ratios = [anti_concentration_ratio(np.eye(d), eps=0.1 * 1.0) for d in (5, 20, 100, 400)]
        assert all(np.isfinite(ratios))
        assert max(ratios) < 1.0

    def test_eps_halving_smooth(self):
        r1 = anti_concentration_ratio(np.eye(5), eps=0.2)
        r2 = anti_concentration_ratio(np.eye(5), eps=0.1)
        assert abs(r1 - r2) <= 0.1 * r1
