import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from shaipa.estimators import IPAGradientEstimator, IPAOptimizer
from shaipa.exceptions import ConfigError
from shaipa.validation import check_bounds, check_horizon, check_replications, check_theta


def test_params_round_trip():
    est = IPAGradientEstimator(theta=(1.2,), horizon=20.0, cost="loss")
    p = est.get_params()
    assert p["cost"] == "loss" and p["horizon"] == 20.0
    est.set_params(cost="workload")
    assert clone(est).get_params()["cost"] == "workload"


def test_fit_transform():
    est = IPAGradientEstimator(theta=(1.5,), horizon=10.0, seed=2).fit(np.arange(6))
    assert est.gradients_.shape == (6, 1)
    assert est.gradient_ == pytest.approx(est.gradients_.mean(axis=0))
    assert np.array_equal(est.transform(np.arange(6)), est.gradients_)
    assert np.array_equal(est.transform([[2], [3]]), est.gradients_[2:4])


def test_deterministic_gradient():
    est = IPAGradientEstimator(model_params={"alpha0": 2.0, "beta0": 1.0, "alpha_jumps": None, "beta_jumps": None},
                               theta=(1.0,), horizon=3.0).fit(1)
    assert est.gradient_[0] == pytest.approx(2.0)
    assert est.cost_ == pytest.approx(2.5)


def test_transform_before_fit():
    with pytest.raises(NotFittedError):
        IPAGradientEstimator().transform([0])


def test_bad_inputs():
    with pytest.raises(ConfigError):
        IPAGradientEstimator(cost="delay").fit(2)
    with pytest.raises(ConfigError):
        IPAGradientEstimator(horizon=-1.0).fit(2)
    with pytest.raises(ConfigError):
        IPAGradientEstimator().fit([0.5, 1.0])


def test_optimizer_estimator():
    opt = IPAOptimizer(weights={"workload": 1.0, "loss": 10.0}, theta0=(1.0,), bounds=((1.0, 1.0),), iters=2,
                       replications=1, horizon=5.0)
    assert opt.fit().predict()[0] == 1.0
    assert opt.predict(np.arange(3)).shape == (3, 1)
    assert len(opt.trace_.iterations) == 2


def test_validation_helpers():
    assert np.array_equal(check_theta([1.0]), [1.0])
    with pytest.raises(ConfigError):
        check_theta([np.nan])
    with pytest.raises(ConfigError):
        check_theta([1.0], 2)
    with pytest.raises(ConfigError):
        check_theta([9.0], 1, [(0, 5)])
    lo, hi = check_bounds([(0, 1)], 1)
    assert lo[0] == 0 and hi[0] == 1
    with pytest.raises(ConfigError):
        check_bounds([(1, 0)], 1)
    with pytest.raises(ConfigError):
        check_horizon(0.0)
    assert np.array_equal(check_replications(3), [0, 1, 2])
    with pytest.raises(ConfigError):
        check_replications(-1)
