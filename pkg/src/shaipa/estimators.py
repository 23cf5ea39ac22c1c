"""scikit-learn style wrappers around simulation, IPA and optimization.

Samples are replication indices: ``fit(X)`` simulates one path per index
in ``X`` and ``transform(X)`` maps indices to per-path IPA gradients.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .catalog import build_model
from .model import AutomatonModel
from .optimizer import ObjectiveSpec, StepRule, optimize
from .simulator import IntegratorConfig, simulate
from .validation import check_bounds, check_horizon, check_replications, check_theta

__all__ = ["IPAGradientEstimator", "IPAOptimizer"]


def _resolve(model, model_params):
    if isinstance(model, AutomatonModel):
        return model
    return build_model(model, model_params)


class IPAGradientEstimator(TransformerMixin, BaseEstimator):
    """Monte Carlo IPA gradient of one cost.

    Parameters
    ----------
    model : str or AutomatonModel
        Catalog name or a model instance.
    model_params : dict, optional
        Parameters for a catalog model.
    theta : array-like
        Point at which the gradient is estimated.
    horizon : float
    cost : str
        Registered cost integrand.
    normalization : {"raw", "per-T"}
    step : float
        Integrator step.
    seed : int
        Master seed; samples are replication indices under it.

    Attributes
    ----------
    gradients_ : ndarray of shape (n_samples, n_theta)
    costs_ : ndarray of shape (n_samples,)
    gradient_ : ndarray of shape (n_theta,)
        Mean gradient.
    stderr_ : ndarray of shape (n_theta,)
    cost_ : float
        Mean cost.
    """

    def __init__(self, model="single-node-sfm", model_params=None, theta=(1.0,), horizon=50.0, cost="workload",
                 normalization="raw", step=0.5, seed=0):
        self.model = model
        self.model_params = model_params
        self.theta = theta
        self.horizon = horizon
        self.cost = cost
        self.normalization = normalization
        self.step = step
        self.seed = seed

    def _setup(self):
        model = _resolve(self.model, self.model_params)
        theta = check_theta(self.theta, model.n_theta)
        horizon = check_horizon(self.horizon)
        ObjectiveSpec({self.cost: 1.0}, self.normalization).check_model(model)
        return model, theta, horizon, IntegratorConfig(step=self.step)

    def _estimate(self, X):
        from .ipa import run_ipa

        model, theta, horizon, cfg = self._setup()
        reps = check_replications(X)
        grads = np.empty((reps.size, model.n_theta))
        costs = np.empty(reps.size)
        for i, r in enumerate(reps):
            rep = run_ipa(model, simulate(model, theta, horizon, cfg, seed=self.seed, replication=int(r)), self.cost)
            grads[i] = rep.gradient(self.normalization)
            costs[i] = rep.value(self.normalization)
        return grads, costs

    def fit(self, X, y=None):
        """Simulate one path per replication index in ``X`` (or a count)."""
        self.gradients_, self.costs_ = self._estimate(X)
        n = self.gradients_.shape[0]
        self.gradient_ = self.gradients_.mean(axis=0)
        self.stderr_ = (self.gradients_.std(axis=0, ddof=1) / math.sqrt(n)) if n > 1 else np.zeros_like(self.gradient_)
        self.cost_ = float(self.costs_.mean())
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        """Per-replication gradients, shape (n_samples, n_theta)."""
        check_is_fitted(self, "gradient_")
        return self._estimate(X)[0]


class IPAOptimizer(BaseEstimator):
    """Projected SGD on a weighted cost objective.

    Parameters
    ----------
    model, model_params : see :class:`IPAGradientEstimator`
    weights : dict
        Cost name to weight.
    theta0 : array-like
    bounds : sequence of (low, high)
    iters, replications : int
    step_rule : {"constant", "harmonic"}
    step_constant : float
    horizon, normalization, step, seed : see :class:`IPAGradientEstimator`

    Attributes
    ----------
    theta_ : ndarray
        Final iterate.
    trace_ : OptimizerTrace
    """

    def __init__(self, model="single-node-sfm", model_params=None, weights=None, theta0=(1.0,),
                 bounds=((0.2, 5.0),), iters=200, replications=10, step_rule="harmonic", step_constant=0.1,
                 horizon=50.0, normalization="raw", step=0.5, seed=0):
        self.model = model
        self.model_params = model_params
        self.weights = weights
        self.theta0 = theta0
        self.bounds = bounds
        self.iters = iters
        self.replications = replications
        self.step_rule = step_rule
        self.step_constant = step_constant
        self.horizon = horizon
        self.normalization = normalization
        self.step = step
        self.seed = seed

    def fit(self, X=None, y=None):
        model = _resolve(self.model, self.model_params)
        theta0 = check_theta(self.theta0, model.n_theta, self.bounds)
        lo, hi = check_bounds(self.bounds, model.n_theta)
        objective = ObjectiveSpec(dict(self.weights or {"workload": 1.0}), self.normalization)
        self.trace_ = optimize(model, objective, self.iters, self.replications,
                               StepRule(self.step_rule, self.step_constant), seed=self.seed, theta0=theta0,
                               bounds=np.column_stack([lo, hi]), horizon=check_horizon(self.horizon),
                               config=IntegratorConfig(step=self.step))
        self.theta_ = self.trace_.theta_final
        return self

    def predict(self, X=None):
        """The fitted parameter, repeated per row of ``X`` when given."""
        check_is_fitted(self, "theta_")
        if X is None:
            return self.theta_.copy()
        return np.tile(self.theta_, (len(check_replications(X)), 1))
