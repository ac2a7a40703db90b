import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hdgauss.estimators import BootstrapNormQuantile, GaussianApproximationBounds, Whitener


def test_whitener_sample_covariance(rng):
    x = rng.standard_normal((500, 3)) @ np.array([[2.0, 0, 0], [0.5, 1.0, 0], [0, 0.3, 0.2]])
    z = Whitener().fit_transform(x)
    np.testing.assert_allclose(np.cov(z.T, bias=True), np.eye(3), atol=1e-10)


def test_whitener_target(rng):
    x = rng.standard_normal((5, 2))
    w = Whitener(target=np.diag([4.0, 9.0])).fit(x)
    np.testing.assert_allclose(w.transform(x), x / [2.0, 3.0])
    with pytest.raises(ValueError):
        w.transform(np.ones((2, 3)))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        Whitener().transform(np.ones((2, 2)))
    with pytest.raises(NotFittedError):
        BootstrapNormQuantile().predict(np.ones((2, 2)))


def test_bounds_report(rng):
    x = rng.standard_normal((200, 4))
    est = GaussianApproximationBounds().fit(x)
    d = est.to_dict()
    assert est.n_features_in_ == 4
    assert d["deltaA"] > 0 and d["rhsCor3"] == pytest.approx(200 ** -0.125 + 0.02 ** (1 / 6))


def test_bootstrap_quantile_predict(rng):
    x = rng.standard_normal((100, 3))
    est = BootstrapNormQuantile(kind="wild", n_boot=300, alpha=0.1, random_state=2).fit(x)
    assert np.mean(est.stat_values_ > est.quantile_) <= 0.1
    flags = est.predict(np.array([[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]]))
    assert flags.tolist() == [False, True]


def test_clone_params():
    est = BootstrapNormQuantile(kind="wild", n_boot=10)
    assert clone(est).get_params() == est.get_params()
