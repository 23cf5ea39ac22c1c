"""Single-node stochastic flow model with a finite buffer.

State ``(alpha, beta, x, y_alpha, y_beta)``: inflow rate, service rate,
buffer content and the two residual-lifetime timers of the rate jump
processes. Modes: 0 empty, 1 neither empty nor full, 2 full. Events:

====  ====================  ==================================
E1    ``alpha - beta``      rate balance crossing
E2    ``x - theta``         buffer fills
E3    ``x``                 buffer empties
E4    ``y_alpha``           inflow rate jump (timer)
E5    ``y_beta``            service rate jump (timer)
====  ====================  ==================================

The control parameter ``theta`` is the buffer capacity. Two cost
integrands are registered: ``workload`` (``x``) and ``loss`` (overflow
rate ``alpha - beta`` while full).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from ..exceptions import ConfigError, RateBalanceError
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

__all__ = [
    "SfmParams",
    "NepFpStructure",
    "build_single_node_sfm",
    "analyze_nep_fp",
    "closed_form_workload_grad",
    "closed_form_loss_grad",
    "parse_jump_spec",
]

EMPTY, PARTIAL, FULL = 0, 1, 2
A, B, X, YA, YB = range(5)
# Timer value for a rate with no jump process; never expires on practical horizons.
IDLE_TIMER = 1e12


def parse_jump_spec(spec, label):
    """Normalize ``{"clock": dist, "values": dist}`` (dicts or Distributions)."""
    if spec is None:
        return None
    if not isinstance(spec, dict) or set(spec) != {"clock", "values"}:
        raise ConfigError(f"{label} must be an object with exactly the keys 'clock' and 'values'")
    out = {}
    for key in ("clock", "values"):
        d = spec[key]
        try:
            out[key] = d if isinstance(d, Distribution) else Distribution.from_dict(d)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{label}.{key}: {exc}") from None
    lo, _ = out["values"].support
    if lo < 0:
        raise ConfigError(f"{label}.values: rates must be non-negative")
    return out


def _drift(spec, label):
    """Constant or callable drift ``d(rate)/dt``; returns (fn, dfn or None)."""
    if spec is None:
        return None, None
    if callable(spec):
        return spec, None
    if isinstance(spec, (tuple, list)) and len(spec) == 2 and all(callable(s) for s in spec):
        return spec[0], spec[1]
    try:
        c = float(spec)
    except (TypeError, ValueError):
        raise ConfigError(f"{label} must be a number or a callable") from None
    if not math.isfinite(c):
        raise ConfigError(f"{label} must be finite")
    if c == 0.0:
        return None, None
    return (lambda t, theta: c), None


@dataclass
class SfmParams:
    """Parameters of the single-node SFM (capacity ``theta`` and horizon are run inputs).

    Parameters
    ----------
    alpha0, beta0 : float or None
        Initial inflow and service rates; ``None`` draws them from the
        corresponding jump-value distribution.
    alpha_jumps, beta_jumps : dict or None
        ``{"clock": Distribution, "values": Distribution}``: lifetimes
        between rate changes and the new rate values. ``None`` keeps the
        rate at its initial value (plus drift).
    f_alpha, f_beta : float, callable or (callable, callable), optional
        Rate drift ``d(rate)/dt = f(t, theta)``; a pair adds its
        theta-gradient ``df(t, theta) -> (n_theta,)``. Default no drift.
    x0 : float
        Initial content; values at or above the capacity start the
        buffer full, tracking the capacity.
    """

    alpha0: Optional[float] = None
    beta0: Optional[float] = None
    alpha_jumps: Optional[dict] = field(default_factory=lambda: {
        "clock": Distribution.exponential(1.0), "values": Distribution.uniform(0.0, 4.0)})
    beta_jumps: Optional[dict] = field(default_factory=lambda: {
        "clock": Distribution.exponential(1.0), "values": Distribution.uniform(0.5, 2.5)})
    f_alpha: Union[None, float, Callable, tuple] = None
    f_beta: Union[None, float, Callable, tuple] = None
    x0: float = 0.0

    def __post_init__(self):
        self.alpha_jumps = parse_jump_spec(self.alpha_jumps, "alpha_jumps")
        self.beta_jumps = parse_jump_spec(self.beta_jumps, "beta_jumps")
        for name in ("alpha0", "beta0"):
            v = getattr(self, name)
            if v is None:
                jumps = self.alpha_jumps if name == "alpha0" else self.beta_jumps
                if jumps is None:
                    raise ConfigError(f"{name} is required when its rate has no jump process")
                continue
            v = float(v)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be a non-negative finite rate, got {v}")
            setattr(self, name, v)
        self.x0 = float(self.x0)
        if not (math.isfinite(self.x0) and self.x0 >= 0):
            raise ConfigError(f"x0 must be non-negative, got {self.x0}")

    @classmethod
    def from_dict(cls, d):
        allowed = {"alpha0", "beta0", "alpha_jumps", "beta_jumps", "alpha_drift", "beta_drift", "x0"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown single-node-sfm parameters {sorted(unknown)}")
        kw = {k: d[k] for k in ("alpha0", "beta0", "alpha_jumps", "beta_jumps", "x0") if k in d}
        if "alpha_drift" in d:
            kw["f_alpha"] = d["alpha_drift"]
        if "beta_drift" in d:
            kw["f_beta"] = d["beta_drift"]
        return cls(**kw)


@dataclass
class NepFpStructure:
    """Non-empty periods and the full periods nested in each.

    ``neps[n] = (start, end)``; ``fps[n]`` lists ``(start, end)`` of the
    full periods inside NEP ``n``; ``fp_entered[n]`` flags, per full
    period, whether it began by the buffer filling (as opposed to the path
    starting full).
    """

    neps: list
    fps: list
    fp_entered: list
    horizon: float

    @property
    def N(self):
        return len(self.neps)

    @property
    def M(self):
        return [len(f) for f in self.fps]

    @property
    def N_F(self):
        return sum(1 for f in self.fps if f)

    def to_dict(self):
        return {
            "N": self.N,
            "M": self.M,
            "N_F": self.N_F,
            "neps": [[float(a), float(b)] for a, b in self.neps],
            "fps": [[[float(a), float(b)] for a, b in f] for f in self.fps],
        }


def analyze_nep_fp(path, theta=None):
    """Reconstruct NEP and FP endpoints from the transition records of an SFM path."""
    if path.segments[0].x.shape[1] != 5:
        raise ValueError("path does not come from the single-node SFM (state dimension is not 5)")
    T = path.horizon
    q0 = path.segments[0].mode
    neps, fps, entered = [], [], []
    nep_start = 0.0 if q0 != EMPTY else None
    cur, cur_entered = [], []
    fp_start = 0.0 if q0 == FULL else None
    fp_via = False
    for rec in path.records:
        a, b = rec.from_mode, rec.to_mode
        if a == b:
            continue
        if a == EMPTY:
            nep_start = rec.tau
        if b == FULL:
            fp_start, fp_via = rec.tau, rec.event_id == 2
        if a == FULL:
            cur.append((fp_start, rec.tau))
            cur_entered.append(fp_via)
            fp_start = None
        if b == EMPTY:
            neps.append((nep_start, rec.tau))
            fps.append(cur)
            entered.append(cur_entered)
            cur, cur_entered, nep_start = [], [], None
    if fp_start is not None:
        cur.append((fp_start, T))
        cur_entered.append(fp_via)
    if nep_start is not None:
        neps.append((nep_start, T))
        fps.append(cur)
        entered.append(cur_entered)
    return NepFpStructure(neps, fps, entered, T)


def closed_form_workload_grad(structure, T=None):
    """Raw workload derivative: total time from each NEP's first FP start to the NEP end."""
    return float(sum(end - f[0][0] for (_, end), f in zip(structure.neps, structure.fps) if f))


def closed_form_loss_grad(structure):
    """Raw loss derivative: minus the number of NEPs whose first FP began by filling.

    Equals ``-N_F`` unless the path starts full; that initial period moves
    with the capacity and contributes no boundary term.
    """
    return -float(sum(1 for e in structure.fp_entered if e and e[0]))


def _make_jump(prefix, jumps):
    clock = ClockStructure(f"{prefix}_clock", jumps["clock"])
    proc = JumpProcess(f"{prefix}_jump", jumps["values"], clock)
    return proc, clock


def build_single_node_sfm(params=None):
    """Construct the single-node SFM automaton.

    Examples
    --------
    >>> m = build_single_node_sfm()
    >>> (m.n_modes, m.n_x, m.n_events)
    (3, 5, 5)
    """
    p = params if params is not None else SfmParams()
    if isinstance(p, dict):
        p = SfmParams.from_dict(p)
    n_theta = 1
    fa, dfa = _drift(p.f_alpha, "f_alpha")
    fb, dfb = _drift(p.f_beta, "f_beta")
    zero_th = np.zeros(n_theta)

    def make_field(mode):
        def f(t, x, u, theta):
            out = np.empty(5)
            out[A] = fa(t, theta) if fa else 0.0
            out[B] = fb(t, theta) if fb else 0.0
            out[X] = x[A] - x[B] if mode == PARTIAL else 0.0
            out[YA] = -1.0
            out[YB] = -1.0
            return out

        jac = np.zeros((5, 5))
        if mode == PARTIAL:
            jac[X, A], jac[X, B] = 1.0, -1.0
        jac.setflags(write=False)

        def df_dx(t, x, u, theta):
            return jac

        df_dtheta = None
        if dfa or dfb:
            def df_dtheta(t, x, u, theta):
                out = np.zeros((5, n_theta))
                if dfa:
                    out[A] = dfa(t, theta)
                if dfb:
                    out[B] = dfb(t, theta)
                return out
        return VectorField(mode, f, df_dx, df_dtheta=df_dtheta)

    def unit(j):
        v = np.zeros(5)
        v[j] = 1.0
        v.setflags(write=False)
        return v

    e_a, e_x, e_ya, e_yb = unit(A), unit(X), unit(YA), unit(YB)
    d_rate = e_a - unit(B)
    minus_one = np.full(n_theta, -1.0)
    guards = [
        GuardFunction(1, lambda t, x, u, th: x[A] - x[B], lambda t, x, u, th: d_rate, name="rate balance"),
        GuardFunction(2, lambda t, x, u, th: x[X] - th[0], lambda t, x, u, th: e_x,
                      d_dtheta=lambda t, x, u, th: minus_one, name="buffer full"),
        GuardFunction(3, lambda t, x, u, th: x[X], lambda t, x, u, th: e_x, name="buffer empty"),
        GuardFunction(4, lambda t, x, u, th: x[YA], lambda t, x, u, th: e_ya, timer_index=YA, name="inflow jump"),
        GuardFunction(5, lambda t, x, u, th: x[YB], lambda t, x, u, th: e_yb, timer_index=YB, name="service jump"),
    ]

    table = {(EMPTY, 1): PARTIAL, (PARTIAL, 1): PARTIAL, (FULL, 1): PARTIAL,
             (PARTIAL, 2): FULL, (PARTIAL, 3): EMPTY}
    for q in (EMPTY, PARTIAL, FULL):
        table[(q, 4)] = q
        table[(q, 5)] = q
    followups = {
        EMPTY: ((lambda t, x, u, th: x[A] > x[B], PARTIAL),),
        FULL: ((lambda t, x, u, th: x[A] < x[B], PARTIAL),),
    }

    sources = {}
    resets = []
    for rate_idx, timer_idx, event_id, jumps, prefix in ((A, YA, 4, p.alpha_jumps, "alpha"),
                                                         (B, YB, 5, p.beta_jumps, "beta")):
        if jumps is None:
            continue
        proc, clock = _make_jump(prefix, jumps)
        sources[proc.name] = proc
        sources[clock.name] = clock
        mask = [False] * 5
        mask[rate_idx] = mask[timer_idx] = True
        keep = np.diag([0.0 if m else 1.0 for m in mask])
        keep.setflags(write=False)

        def r(x, u, th, draws, rate_idx=rate_idx, timer_idx=timer_idx, jn=proc.name, cn=clock.name):
            out = np.array(x, dtype=float)
            out[rate_idx] = draws[jn].value
            out[timer_idx] = draws[cn].value
            return out

        def dr_dtheta(x, u, th, draws, timer_idx=timer_idx, cn=clock.name):
            out = np.zeros((5, n_theta))
            out[timer_idx] = draws[cn].grad
            return out

        for q in (EMPTY, PARTIAL, FULL):
            resets.append(ResetMap(q, q, event_id, r, lambda x, u, th, d, keep=keep: keep, tuple(mask),
                                   dr_dtheta=dr_dtheta, draws=(proc.name, clock.name)))

    init_draws = []
    if p.alpha0 is None:
        init_draws.append("alpha_jump")
    if p.alpha_jumps is not None:
        init_draws.append("alpha_clock")
    if p.beta0 is None:
        init_draws.append("beta_jump")
    if p.beta_jumps is not None:
        init_draws.append("beta_clock")

    def x_start(theta):
        return min(p.x0, float(theta[0]))

    def init_state(theta, draws):
        a = p.alpha0 if p.alpha0 is not None else draws["alpha_jump"].value
        b = p.beta0 if p.beta0 is not None else draws["beta_jump"].value
        ya = draws["alpha_clock"].value if "alpha_clock" in draws else IDLE_TIMER
        yb = draws["beta_clock"].value if "beta_clock" in draws else IDLE_TIMER
        return np.array([a, b, x_start(theta), ya, yb])

    def init_prime(theta, draws):
        out = np.zeros((5, n_theta))
        if p.x0 >= theta[0]:
            out[X, 0] = 1.0
        if "alpha_clock" in draws:
            out[YA] = draws["alpha_clock"].grad
        if "beta_clock" in draws:
            out[YB] = draws["beta_clock"].grad
        return out

    def init_mode(x0, theta):
        if x0[X] >= theta[0]:
            return FULL if x0[A] >= x0[B] else PARTIAL
        if x0[X] <= 0.0:
            return PARTIAL if x0[A] > x0[B] else EMPTY
        return PARTIAL

    workload = CostIntegrand(
        "workload",
        lambda q, t, x, u, th: x[X],
        lambda q, t, x, u, th: e_x,
    )
    zeros5 = np.zeros(5)
    loss = CostIntegrand(
        "loss",
        lambda q, t, x, u, th: x[A] - x[B] if q == FULL else 0.0,
        lambda q, t, x, u, th: d_rate if q == FULL else zeros5,
    )

    def step_check(q, t0, x0, t1, x1, theta):
        if x0[A] == x0[B] and x1[A] == x1[B]:
            raise RateBalanceError(f"inflow equals service rate over [{t0:.12g}, {t1:.12g}] in mode {q}")

    def sampler(rng, theta):
        cap = float(theta[0])
        return rng.uniform(0.0, 1.0), np.array([
            rng.uniform(0.0, 4.0), rng.uniform(0.5, 2.5), rng.uniform(0.0, cap),
            rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)])

    def counters(path):
        s = analyze_nep_fp(path)
        out = s.to_dict()
        out["workload_closed_form"] = closed_form_workload_grad(s)
        out["loss_closed_form"] = closed_form_loss_grad(s)
        return out

    return AutomatonModel(
        name="single-node-sfm",
        n_modes=3,
        n_x=5,
        n_theta=n_theta,
        fields=[make_field(q) for q in (EMPTY, PARTIAL, FULL)],
        guards=guards,
        resets=resets,
        transitions=TransitionFunction(table, followups),
        initial=InitialCondition(init_state, init_mode, tuple(init_draws), init_prime),
        costs={"workload": workload, "loss": loss},
        sources=sources,
        timer_mask=(False, False, False, True, True),
        nominal_theta=(1.0,),
        state_sampler=sampler,
        step_check=step_check,
        counters=counters,
        state_labels=("alpha", "beta", "x", "y_alpha", "y_beta"),
        mode_labels=("empty", "partial", "full"),
    )
