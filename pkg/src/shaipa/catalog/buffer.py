"""Small buffer models that exercise parts of the sensitivity engine.

* ``two-mode-buffer``: infinite buffer fed by a jump-driven inflow rate
  whose drift scales with ``theta``, so the continuous update matters.
* ``parametric-rate-buffer``: content grows at ``theta * c - beta``.
  Inside the growing mode the sensitivity is ``c`` times the time since
  mode entry.
* ``reset-test``: a timer resets ``x`` to ``gamma * theta``.
* ``chattering-switch``: a deliberately broken model whose follow-up
  transitions never settle, used to check the chain-length guard.
"""
from __future__ import annotations

import math

import numpy as np

from ..exceptions import ConfigError
from ..model import (
    AutomatonModel,
    CostIntegrand,
    GuardFunction,
    InitialCondition,
    ResetMap,
    TransitionFunction,
    VectorField,
)
from ..stochastic import ClockStructure, Distribution, JumpProcess
from .sfm import IDLE_TIMER, parse_jump_spec

__all__ = [
    "build_two_mode_buffer",
    "build_parametric_rate_buffer",
    "build_reset_test",
    "build_chattering_switch",
]


def _check_keys(params, allowed, name):
    unknown = set(params) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown {name} parameters {sorted(unknown)}")
    return {**allowed, **params}


def _finite(value, label, positive=False, nonneg=False):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{label} must be a number") from None
    if not math.isfinite(v) or (positive and v <= 0) or (nonneg and v < 0):
        cond = "positive" if positive else ("non-negative" if nonneg else "finite")
        raise ConfigError(f"{label} must be {cond}, got {value!r}")
    return v


def _clock(spec, label):
    try:
        d = spec if isinstance(spec, Distribution) else Distribution.from_dict(spec)
        return ClockStructure(label, d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{label}: {exc}") from None


def _unit(n, j):
    v = np.zeros(n)
    v[j] = 1.0
    v.setflags(write=False)
    return v


def _timer_reset(n_x, timer_idx, extra=None):
    """(r, dr_dx, dr_dtheta, mask) for a reset that redraws a timer and optionally sets ``extra`` components."""
    extra = dict(extra or {})
    mask = [False] * n_x
    mask[timer_idx] = True
    for j in extra:
        mask[j] = True
    keep = np.diag([0.0 if m else 1.0 for m in mask])
    keep.setflags(write=False)
    return mask, keep, extra


def build_two_mode_buffer(params=None):
    """Infinite buffer with state ``(alpha, x, y)``.

    Modes 0 (empty) and 1 (non-empty). E1 ``alpha - beta``, E2 ``x``,
    E3 timer ``y`` of the inflow jump process. Between jumps the inflow
    rate drifts at ``alpha_drift * theta``.

    Parameters
    ----------
    params : dict, optional
        ``beta`` (service rate, default 2), ``alpha0`` (None draws it),
        ``alpha_jumps`` (``{"clock", "values"}`` or None), ``alpha_drift``
        (default 0, which makes the model theta-free) and ``x0``.
    """
    defaults = {
        "beta": 2.0,
        "alpha0": None,
        "alpha_jumps": {"clock": {"kind": "exponential", "rate": 1.0},
                        "values": {"kind": "uniform", "a": 0.0, "b": 4.0}},
        "alpha_drift": 0.0,
        "x0": 0.0,
    }
    p = _check_keys(params or {}, defaults, "two-mode-buffer")
    beta = _finite(p["beta"], "beta", nonneg=True)
    drift = _finite(p["alpha_drift"], "alpha_drift")
    x0 = _finite(p["x0"], "x0", nonneg=True)
    jumps = parse_jump_spec(p["alpha_jumps"], "alpha_jumps")
    alpha0 = p["alpha0"]
    if alpha0 is None and jumps is None:
        raise ConfigError("alpha0 is required when alpha_jumps is null")
    if alpha0 is not None:
        alpha0 = _finite(alpha0, "alpha0", nonneg=True)
    n_x, n_theta = 3, 1
    AL, X, Y = 0, 1, 2

    def make_field(mode):
        def f(t, x, u, th):
            return np.array([drift * th[0], x[AL] - beta if mode == 1 else 0.0, -1.0])

        jac = np.zeros((n_x, n_x))
        if mode == 1:
            jac[X, AL] = 1.0
        jac.setflags(write=False)
        dth = np.zeros((n_x, n_theta))
        dth[AL, 0] = drift
        dth.setflags(write=False)
        return VectorField(mode, f, lambda t, x, u, th: jac, df_dtheta=lambda t, x, u, th: dth)

    e_al, e_x, e_y = _unit(n_x, AL), _unit(n_x, X), _unit(n_x, Y)
    guards = [
        GuardFunction(1, lambda t, x, u, th: x[AL] - beta, lambda t, x, u, th: e_al, name="rate balance"),
        GuardFunction(2, lambda t, x, u, th: x[X], lambda t, x, u, th: e_x, name="buffer empty"),
        GuardFunction(3, lambda t, x, u, th: x[Y], lambda t, x, u, th: e_y, timer_index=Y, name="inflow jump"),
    ]
    table = {(0, 1): 1, (1, 2): 0, (0, 3): 0, (1, 3): 1}
    followups = {0: ((lambda t, x, u, th: x[AL] > beta, 1),)}
    sources, resets, init_draws = {}, [], []
    if jumps is not None:
        clock = ClockStructure("alpha_clock", jumps["clock"])
        proc = JumpProcess("alpha_jump", jumps["values"], clock)
        sources = {proc.name: proc, clock.name: clock}
        mask, keep, _ = _timer_reset(n_x, Y, {AL: None})

        def r(x, u, th, d):
            out = np.array(x, dtype=float)
            out[AL] = d["alpha_jump"].value
            out[Y] = d["alpha_clock"].value
            return out

        def dr_dtheta(x, u, th, d):
            out = np.zeros((n_x, n_theta))
            out[Y] = d["alpha_clock"].grad
            return out

        for q in (0, 1):
            resets.append(ResetMap(q, q, 3, r, lambda x, u, th, d: keep, mask, dr_dtheta=dr_dtheta,
                                   draws=("alpha_jump", "alpha_clock")))
        init_draws.append("alpha_clock")
        if alpha0 is None:
            init_draws.insert(0, "alpha_jump")

    def init_state(th, d):
        a = alpha0 if alpha0 is not None else d["alpha_jump"].value
        return np.array([a, x0, d["alpha_clock"].value if "alpha_clock" in d else IDLE_TIMER])

    def init_prime(th, d):
        out = np.zeros((n_x, n_theta))
        if "alpha_clock" in d:
            out[Y] = d["alpha_clock"].grad
        return out

    def init_mode(xs, th):
        return 1 if xs[X] > 0 or xs[AL] > beta else 0

    def sampler(rng, th):
        return rng.uniform(0, 1), np.array([rng.uniform(0, 4), rng.uniform(0, 5), rng.uniform(0.1, 2)])

    return AutomatonModel(
        name="two-mode-buffer",
        n_modes=2,
        n_x=n_x,
        n_theta=n_theta,
        fields=[make_field(0), make_field(1)],
        guards=guards,
        resets=resets,
        transitions=TransitionFunction(table, followups),
        initial=InitialCondition(init_state, init_mode, tuple(init_draws), init_prime),
        costs={"workload": CostIntegrand("workload", lambda q, t, x, u, th: x[X], lambda q, t, x, u, th: e_x)},
        sources=sources,
        timer_mask=(False, False, True),
        nominal_theta=(1.0,),
        state_sampler=sampler,
        state_labels=("alpha", "x", "y"),
        mode_labels=("empty", "non-empty"),
    )


def build_parametric_rate_buffer(params=None):
    """Buffer with state ``(x, y)`` filling at ``theta * c - beta``.

    Mode 1 grows (or drains) the buffer; E1 ``x`` empties it into mode 0;
    the timer E2 refills it to ``x0`` and returns to mode 1.
    """
    defaults = {"c": 1.0, "beta": 0.5, "x0": 1.0, "clock": {"kind": "exponential", "rate": 1.0}}
    p = _check_keys(params or {}, defaults, "parametric-rate-buffer")
    c = _finite(p["c"], "c")
    beta = _finite(p["beta"], "beta")
    x0 = _finite(p["x0"], "x0", positive=True)
    clock = _clock(p["clock"], "restart_clock")
    n_x, n_theta = 2, 1
    X, Y = 0, 1

    def make_field(mode):
        jac = np.zeros((n_x, n_x))
        jac.setflags(write=False)
        dth = np.zeros((n_x, n_theta))
        if mode == 1:
            dth[X, 0] = c
        dth.setflags(write=False)

        def f(t, x, u, th):
            return np.array([th[0] * c - beta if mode == 1 else 0.0, -1.0])

        return VectorField(mode, f, lambda t, x, u, th: jac, df_dtheta=lambda t, x, u, th: dth)

    e_x, e_y = _unit(n_x, X), _unit(n_x, Y)
    guards = [
        GuardFunction(1, lambda t, x, u, th: x[X], lambda t, x, u, th: e_x, name="buffer empty"),
        GuardFunction(2, lambda t, x, u, th: x[Y], lambda t, x, u, th: e_y, timer_index=Y, name="restart"),
    ]
    mask, keep, _ = _timer_reset(n_x, Y, {X: None})

    def r(x, u, th, d):
        return np.array([x0, d["restart_clock"].value])

    zero_th = np.zeros((n_x, n_theta))
    resets = [ResetMap(q, 1, 2, r, lambda x, u, th, d: keep, mask, dr_dtheta=lambda x, u, th, d: zero_th,
                       draws=("restart_clock",)) for q in (0, 1)]
    return AutomatonModel(
        name="parametric-rate-buffer",
        n_modes=2,
        n_x=n_x,
        n_theta=n_theta,
        fields=[make_field(0), make_field(1)],
        guards=guards,
        resets=resets,
        transitions=TransitionFunction({(1, 1): 0, (0, 2): 1, (1, 2): 1}),
        initial=InitialCondition(lambda th, d: np.array([x0, d["restart_clock"].value]), 1, ("restart_clock",)),
        costs={"workload": CostIntegrand("workload", lambda q, t, x, u, th: x[X], lambda q, t, x, u, th: e_x)},
        sources={"restart_clock": clock},
        timer_mask=(False, True),
        nominal_theta=(1.0,),
        state_sampler=lambda rng, th: (rng.uniform(0, 1), np.array([rng.uniform(0.1, 3), rng.uniform(0.1, 2)])),
        state_labels=("x", "y"),
        mode_labels=("empty", "filling"),
    )


def build_reset_test(params=None):
    """Single-mode model with state ``(x, y)``; the timer sets ``x = gamma * theta``."""
    defaults = {"gamma": 2.0, "x0": 0.0, "clock": {"kind": "deterministic", "value": 1.0}}
    p = _check_keys(params or {}, defaults, "reset-test")
    gamma = _finite(p["gamma"], "gamma")
    x0 = _finite(p["x0"], "x0")
    clock = _clock(p["clock"], "reset_clock")
    n_x, n_theta = 2, 1
    X, Y = 0, 1
    rate = np.array([0.0, -1.0])
    jac = np.zeros((n_x, n_x))
    e_x, e_y = _unit(n_x, X), _unit(n_x, Y)
    mask, keep, _ = _timer_reset(n_x, Y, {X: None})

    def r(x, u, th, d):
        return np.array([gamma * th[0], d["reset_clock"].value])

    def dr_dtheta(x, u, th, d):
        return np.array([[gamma], d["reset_clock"].grad])

    return AutomatonModel(
        name="reset-test",
        n_modes=1,
        n_x=n_x,
        n_theta=n_theta,
        fields=[VectorField(0, lambda t, x, u, th: rate.copy(), lambda t, x, u, th: jac)],
        guards=[GuardFunction(1, lambda t, x, u, th: x[Y], lambda t, x, u, th: e_y, timer_index=Y, name="reset")],
        resets=[ResetMap(0, 0, 1, r, lambda x, u, th, d: keep, mask, dr_dtheta=dr_dtheta, draws=("reset_clock",))],
        transitions=TransitionFunction({(0, 1): 0}),
        initial=InitialCondition(lambda th, d: np.array([x0, d["reset_clock"].value]), 0, ("reset_clock",)),
        costs={"workload": CostIntegrand("workload", lambda q, t, x, u, th: x[X], lambda q, t, x, u, th: e_x)},
        sources={"reset_clock": clock},
        timer_mask=(False, True),
        nominal_theta=(1.0,),
        state_labels=("x", "y"),
    )


def build_chattering_switch(params=None):
    """Two modes whose invariants contradict each other above ``threshold``.

    The timer sets ``x = 1``; from then on each mode's follow-up sends the
    path to the other one at the same instant, so the transition chain is
    unbounded.
    """
    defaults = {"threshold": 0.5, "clock": {"kind": "deterministic", "value": 1.0}}
    p = _check_keys(params or {}, defaults, "chattering-switch")
    thr = _finite(p["threshold"], "threshold")
    clock = _clock(p["clock"], "switch_clock")
    n_x = 2
    X, Y = 0, 1
    rate = np.array([0.0, -1.0])
    jac = np.zeros((n_x, n_x))
    e_x, e_y = _unit(n_x, X), _unit(n_x, Y)
    mask, keep, _ = _timer_reset(n_x, Y, {X: None})

    def r(x, u, th, d):
        return np.array([1.0, d["switch_clock"].value])

    resets = [ResetMap(q, q, 1, r, lambda x, u, th, d: keep, mask, draws=("switch_clock",)) for q in (0, 1)]
    above = lambda t, x, u, th: x[X] > thr  # noqa: E731
    return AutomatonModel(
        name="chattering-switch",
        n_modes=2,
        n_x=n_x,
        n_theta=1,
        fields=[VectorField(q, lambda t, x, u, th: rate.copy(), lambda t, x, u, th: jac) for q in (0, 1)],
        guards=[GuardFunction(1, lambda t, x, u, th: x[Y], lambda t, x, u, th: e_y, timer_index=Y, name="switch")],
        resets=resets,
        transitions=TransitionFunction({(0, 1): 0, (1, 1): 1}, {0: ((above, 1),), 1: ((above, 0),)}),
        initial=InitialCondition(lambda th, d: np.array([0.0, d["switch_clock"].value]), 0, ("switch_clock",)),
        costs={"workload": CostIntegrand("workload", lambda q, t, x, u, th: x[X], lambda q, t, x, u, th: e_x)},
        sources={"switch_clock": clock},
        timer_mask=(False, True),
        nominal_theta=(1.0,),
        state_labels=("x", "y"),
    )
