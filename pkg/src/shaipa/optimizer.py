"""Projected stochastic gradient descent driven by IPA estimates."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, NumericalError, ShaipaError
from .ipa import propagate, cost_gradient
from .simulator import simulate
from .validation import check_replications

__all__ = [
    "ObjectiveSpec",
    "StepRule",
    "IterationRecord",
    "OptimizerTrace",
    "sgd_step",
    "estimate_objective",
    "optimize",
]

NORMALIZATIONS = ("raw", "per-T")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Weighted sum of registered cost integrands, ``J = sum_i w_i L_i``.

    Zero weights are allowed; an all-zero objective has a zero gradient
    and leaves the optimizer at its starting point.
    """

    weights: dict
    normalization: str = "raw"

    def __post_init__(self):
        if not isinstance(self.weights, dict) or not self.weights:
            raise ConfigError("objective needs at least one weighted cost")
        clean = {}
        for name, w in self.weights.items():
            try:
                w = float(w)
            except (TypeError, ValueError):
                raise ConfigError(f"weight for {name!r} must be a number") from None
            if not math.isfinite(w):
                raise ConfigError(f"weight for {name!r} must be finite")
            clean[str(name)] = w
        object.__setattr__(self, "weights", clean)
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")

    def check_model(self, model):
        missing = [c for c in self.weights if c not in model.costs]
        if missing:
            raise ConfigError(f"model {model.name!r} has no cost {missing}; available: {sorted(model.costs)}")

    def evaluate(self, model, path):
        """``(J, dJ/dtheta)`` on one sample path."""
        trace = propagate(model, path)
        J, grad = 0.0, np.zeros(model.n_theta)
        for name, w in self.weights.items():
            if w == 0.0:
                continue
            rep = cost_gradient(model, path, trace, name)
            J += w * rep.value(self.normalization)
            grad = grad + w * rep.gradient(self.normalization)
        return J, grad


@dataclass(frozen=True)
class StepRule:
    """``constant``: step ``c``; ``harmonic``: step ``c / k`` at iteration ``k`` (1-based)."""

    kind: str = "harmonic"
    c: float = 0.1

    def __post_init__(self):
        if self.kind not in ("constant", "harmonic"):
            raise ConfigError(f"step rule must be 'constant' or 'harmonic', got {self.kind!r}")
        c = float(self.c)
        if not (math.isfinite(c) and c >= 0):
            raise ConfigError(f"step constant must be non-negative, got {self.c!r}")
        object.__setattr__(self, "c", c)

    def __call__(self, k):
        return self.c if self.kind == "constant" else self.c / k

    def to_dict(self):
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class IterationRecord:
    iter: int
    theta: np.ndarray
    J_hat: float
    grad: np.ndarray
    step: float


@dataclass
class OptimizerTrace:
    iterations: list = field(default_factory=list)
    theta_final: np.ndarray = None
    converged: bool = False
    stop_reason: str = "max_iters"

    def to_csv(self, fh=None):
        """Write ``iter,theta_0..,J_hat,grad_0..,step``; returns text when ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        n = len(self.iterations[0].theta) if self.iterations else 0
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["iter"] + [f"theta_{j}" for j in range(n)] + ["J_hat"] + [f"grad_{j}" for j in range(n)] + ["step"])
        for r in self.iterations:
            w.writerow([r.iter] + [repr(float(v)) for v in r.theta] + [repr(float(r.J_hat))]
                       + [repr(float(v)) for v in r.grad] + [repr(float(r.step))])
        return out.getvalue() if fh is None else None


def _bounds_arrays(bounds, n):
    b = np.asarray(bounds, dtype=float)
    if b.shape != (n, 2):
        raise ConfigError(f"bounds must be {n} (low, high) pairs")
    if np.any(np.isnan(b)) or np.any(b[:, 0] > b[:, 1]):
        raise ConfigError("each bound pair must satisfy low <= high")
    return b[:, 0], b[:, 1]


def sgd_step(theta, gradient, step_size, bounds):
    """One projected gradient step, ``clip(theta - step * grad, bounds)``.

    Examples
    --------
    >>> float(sgd_step([1.0], [2.0], 0.1, [(0.2, 5.0)])[0])
    0.8
    >>> float(sgd_step([0.25], [2.0], 0.1, [(0.2, 5.0)])[0])
    0.2
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    gradient = np.atleast_1d(np.asarray(gradient, dtype=float))
    if not np.all(np.isfinite(gradient)):
        raise NumericalError(f"non-finite gradient {gradient.tolist()}")
    lo, hi = _bounds_arrays(bounds, theta.size)
    return np.clip(theta - step_size * gradient, lo, hi)


def estimate_objective(model, objective, theta, horizon, replications, config=None, seed=0):
    """Average ``(J, grad)`` over replication indices (or the first ``replications`` when an int)."""
    J, grad = 0.0, np.zeros(model.n_theta)
    reps = [int(r) for r in check_replications(replications)]
    for r in reps:
        path = simulate(model, theta, horizon, config, seed=seed, replication=r)
        j, g = objective.evaluate(model, path)
        J += j
        grad = grad + g
    return J / len(reps), grad / len(reps)


def optimize(model, objective, iters, replications_per_iter, step_rule, seed=0, *, theta0=None,
             bounds=None, horizon=50.0, config=None, grad_tol=None):
    """Projected SGD on ``objective`` over a box.

    Iteration ``k`` (1-based) simulates ``replications_per_iter`` fresh
    paths (replication indices ``(k - 1) * R .. k * R - 1``), averages
    their IPA gradients and takes one projected step. Deterministic in
    ``seed``. Errors propagate with the partial trace attached as
    ``exc.partial_trace``.

    Returns
    -------
    OptimizerTrace
    """
    if int(iters) != iters or iters < 1:
        raise ConfigError("iters must be an integer >= 1")
    if int(replications_per_iter) != replications_per_iter or replications_per_iter < 1:
        raise ConfigError("replications_per_iter must be an integer >= 1")
    if not isinstance(step_rule, StepRule):
        step_rule = StepRule(**step_rule)
    objective.check_model(model)
    theta = np.atleast_1d(np.asarray(model.nominal_theta if theta0 is None else theta0, dtype=float)).copy()
    if theta.size != model.n_theta:
        raise ConfigError(f"theta must have {model.n_theta} entries")
    if bounds is None:
        bounds = [(-np.inf, np.inf)] * theta.size
    lo, hi = _bounds_arrays(bounds, theta.size)
    theta = np.clip(theta, lo, hi)
    R = int(replications_per_iter)
    trace = OptimizerTrace()
    try:
        for k in range(1, int(iters) + 1):
            J, grad = estimate_objective(model, objective, theta, horizon, range((k - 1) * R, k * R), config, seed)
            step = step_rule(k)
            trace.iterations.append(IterationRecord(k, theta.copy(), J, grad.copy(), step))
            theta = sgd_step(theta, grad, step, bounds)
            if grad_tol is not None and float(np.linalg.norm(grad)) <= grad_tol:
                trace.converged, trace.stop_reason = True, "grad_tol"
                break
    except ShaipaError as exc:
        trace.theta_final = theta
        trace.stop_reason = "error"
        exc.partial_trace = trace
        raise
    trace.theta_final = theta
    return trace

