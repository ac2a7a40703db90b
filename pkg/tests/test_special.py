import math

import numpy as np
import pytest
from scipy import special as sp

from hdgauss.exceptions import DomainError
from hdgauss.special import chi2_cdf, gammainc_lower, normal_cdf


class TestChi2Cdf:
    def test_closed_forms(self):
        assert chi2_cdf(2, 2.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)
        assert chi2_cdf(4, 2.0) == pytest.approx(1 - 2 * math.exp(-1), abs=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 7, 100])
    def test_zero(self, d):
        assert chi2_cdf(d, 0.0) == 0.0

    def test_negative_is_zero(self):
        assert chi2_cdf(3, -1.0) == 0.0

    def test_infinity(self):
        assert chi2_cdf(3, np.inf) == 1.0

    def test_bad_dof(self):
        with pytest.raises(DomainError):
            chi2_cdf(0, 1.0)

    def test_vectorised_shape(self):
        out = chi2_cdf(3, np.array([[0.5, 1.0], [2.0, 3.0]]))
        assert out.shape == (2, 2)


class TestGammaincAgainstScipy:
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.5, 10.0, 25.0, 200.0, 5000.0])
    def test_grid(self, a):
        x = a * np.linspace(0.01, 3.0, 301)
        np.testing.assert_allclose(gammainc_lower(a, x), sp.gammainc(a, x), atol=2e-14, rtol=0)

    def test_far_tails(self):
        assert gammainc_lower(3.0, 1e-8) == pytest.approx(sp.gammainc(3.0, 1e-8), rel=1e-12)
        assert gammainc_lower(3.0, 200.0) == 1.0

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            gammainc_lower(2.0, np.nan)

    def test_bad_shape(self):
        with pytest.raises(DomainError):
            gammainc_lower(0.0, 1.0)


def test_normal_cdf():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.0) == pytest.approx(0.8413447460685429, abs=1e-15)
