"""Sample-path generation for stochastic hybrid automata.

Fixed-step classical RK4 inside a mode, with guard signs monitored at
every step. A sign change is refined with Brent's method on the replayed
step; timer guards expire at analytically scheduled times. Each located
event runs the transition table, the reset map (drawing fresh lifetimes
and jumps) and then any invariant-driven follow-up transitions that fire
at the same instant.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .exceptions import (
    ChainLengthError,
    NumericalError,
    SimultaneousEventsError,
    TangentialContactError,
    UnboundedFlowError,
)
from .stochastic import DrawSource, RngStreamSet

__all__ = [
    "IntegratorConfig",
    "TransitionRecord",
    "Segment",
    "SamplePath",
    "integrate_step",
    "guard_rate",
    "locate_event",
    "apply_transition",
    "simulate",
]


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator and event-location tolerances.

    Parameters
    ----------
    step : float
        Base RK4 step (time units).
    event_tol : float
        Accepted ``|g|`` at a located crossing; guards within this band of
        zero right after a transition are not monitored until they leave it.
    time_tol : float
        Bracket width for crossing refinement, also the simultaneity window.
    max_chain : int
        Longest allowed chain of same-instant transitions.
    gdot_floor : float
        Smallest accepted ``|dg/dt|`` at an event.
    """

    step: float = 1e-3
    event_tol: float = 1e-9
    time_tol: float = 1e-10
    max_chain: int = 8
    gdot_floor: float = 1e-8

    def __post_init__(self):
        for name in ("step", "event_tol", "time_tol", "gdot_floor"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if int(self.max_chain) != self.max_chain or self.max_chain < 1:
            raise ValueError(f"max_chain must be an integer >= 1, got {self.max_chain!r}")


@dataclass(frozen=True)
class TransitionRecord:
    k: int
    tau: float
    event_id: int
    from_mode: int
    to_mode: int
    x_minus: np.ndarray
    x_plus: np.ndarray
    chain_position: int = 0
    draws: dict = field(default_factory=dict)

    @property
    def key(self):
        return (self.event_id, self.from_mode, self.to_mode)


@dataclass(frozen=True)
class Segment:
    """Samples of one inter-transition interval, endpoints included."""

    mode: int
    t: np.ndarray
    x: np.ndarray


@dataclass
class SamplePath:
    """Transition log plus the dense step-grid trajectory.

    ``segments[k]`` covers ``[tau_k, tau_{k+1}]`` in the mode entered by
    record ``k`` (``tau_0 = 0``, ``tau_{K+1} = T``), so there is always
    one more segment than records; same-instant chain links produce
    single-sample segments.
    """

    records: list
    segments: list
    horizon: float
    theta: np.ndarray
    seed: int
    replication: int = 0
    initial_draws: dict = field(default_factory=dict)

    @property
    def n_events(self):
        return len(self.records)

    @property
    def event_sequence(self):
        return [r.key for r in self.records]

    @property
    def final_state(self):
        seg = self.segments[-1]
        return seg.mode, seg.x[-1]

    def trajectory(self, stride=1):
        """Yield ``(t, q, x, event_id)`` rows: step-grid samples, and two
        rows per transition (left and right limits)."""
        stride = max(int(stride), 1)
        n_seg = len(self.segments)
        for k, seg in enumerate(self.segments):
            m = len(seg.t)
            lo = 1 if k > 0 else 0
            hi = m - 1 if k < n_seg - 1 else m
            for i in range(lo, hi):
                if (i - lo) % stride == 0 or (k == n_seg - 1 and i == m - 1):
                    yield float(seg.t[i]), seg.mode, seg.x[i], None
            if k < n_seg - 1:
                rec = self.records[k]
                yield rec.tau, rec.from_mode, rec.x_minus, rec.event_id
                yield rec.tau, rec.to_mode, rec.x_plus, rec.event_id

    def to_csv(self, fh=None, stride=1):
        """Write ``t,q,x_0..x_{n-1},event_id``; returns the text when ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        n_x = self.segments[0].x.shape[1]
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t", "q"] + [f"x_{j}" for j in range(n_x)] + ["event_id"])
        for t, q, x, e in self.trajectory(stride):
            w.writerow([repr(float(t)), q] + [repr(float(v)) for v in x] + ["" if e is None else e])
        if fh is None:
            return out.getvalue()
        return None


def integrate_step(model, mode, t, x, theta, h, u=None):
    """One classical RK4 step of the mode's vector field.

    Inputs are held at their left value when ``u`` is given; timer
    components decrease by exactly ``h``.
    """
    f = model.field(mode).f
    if u is None:
        u0 = model.inputs(t, theta)
        um = model.inputs(t + 0.5 * h, theta)
        u1 = model.inputs(t + h, theta)
    else:
        u0 = um = u1 = u
    k1 = f(t, x, u0, theta)
    k2 = f(t + 0.5 * h, x + (0.5 * h) * k1, um, theta)
    k3 = f(t + 0.5 * h, x + (0.5 * h) * k2, um, theta)
    k4 = f(t + h, x + h * k3, u1, theta)
    out = x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    tm = model._timer_idx
    if tm.size:
        out[tm] = x[tm] - h
    return out


def guard_rate(model, mode, event_id, t, x, theta, u=None):
    """Time derivative of a guard along the flow of ``mode`` (inputs frozen)."""
    if u is None:
        u = model.inputs(t, theta)
    gx, _, _, gt = model.guard_partials(event_id, t, x, u, theta)
    return gt + float(gx @ model.f(mode, t, x, u, theta))


def _sign(v):
    return 1.0 if v > 0 else (-1.0 if v < 0 else 0.0)


def _reference_signs(model, events, t, x, theta, tol):
    u = model.inputs(t, theta)
    ref = {}
    for e in events:
        g = model.guard(e).value(t, x, u, theta)
        ref[e] = _sign(g) if abs(g) > tol else 0.0
    return ref


def _refine(model, mode, e, t_lo, x_lo, t_hi, theta, cfg):
    gfun = model.guard(e).value

    def phi(s):
        xs = integrate_step(model, mode, t_lo, x_lo, theta, s - t_lo)
        return gfun(s, xs, model.inputs(s, theta), theta)

    try:
        tau = brentq(phi, t_lo, t_hi, xtol=cfg.time_tol * 1e-2, rtol=8.9e-16, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise NumericalError(f"E{e}: crossing refinement failed on [{t_lo}, {t_hi}]: {exc}") from None
    return tau


def locate_event(model, mode, t_lo, x_lo, t_hi, x_hi, theta, config=None, ref_signs=None,
                 timer_time=None, timer_event=None):
    """Find the earliest guard crossing on ``[t_lo, t_hi]``.

    Parameters
    ----------
    ref_signs : dict, optional
        Sign each monitored guard had before the step; zero means the guard
        sits on its surface after a transition and is not monitored.
        Defaults to the signs at ``t_lo``.
    timer_time, timer_event : optional
        Analytically scheduled timer expiry at or before ``t_hi``.

    Returns
    -------
    (tau, event_id, x_tau) or None
    """
    cfg = config or IntegratorConfig()
    _, others = model.active_events(mode)
    if ref_signs is None:
        ref_signs = _reference_signs(model, others, t_lo, x_lo, theta, cfg.event_tol)
    u_hi = model.inputs(t_hi, theta)
    hits = []
    for e in others:
        s = ref_signs.get(e, 0.0)
        if s == 0.0:
            continue
        g_hi = model.guard(e).value(t_hi, x_hi, u_hi, theta)
        if s * g_hi > 0:
            continue
        if g_hi == 0.0:
            hits.append((t_hi, e))
        else:
            hits.append((_refine(model, mode, e, t_lo, x_lo, t_hi, theta, cfg), e))
    if timer_time is not None:
        hits.append((timer_time, timer_event))
    if not hits:
        return None
    hits.sort()
    tau, e = hits[0]
    if len(hits) > 1 and hits[1][0] - tau <= cfg.time_tol:
        raise SimultaneousEventsError(
            f"independent events E{e} and E{hits[1][1]} at t={tau:.12g} in mode {mode}")
    if timer_time is not None and e == timer_event and tau == t_hi:
        x_tau = x_hi
    else:
        x_tau = integrate_step(model, mode, t_lo, x_lo, theta, tau - t_lo)
    return tau, e, x_tau


def apply_transition(model, mode, tau, x_minus, event_id, draws, theta, config=None, k0=1):
    """Execute a transition and its same-instant follow-up chain.

    Returns
    -------
    (new_mode, x_plus, records)
    """
    cfg = config or IntegratorConfig()
    target = model.transitions.target(mode, event_id)
    if target is None:
        raise NumericalError(f"E{event_id} fired in mode {mode} without a table entry")
    u = model.inputs(tau, theta)
    reset = model.reset(mode, target, event_id)
    if reset is not None:
        got = draws.take(reset.draws) if reset.draws else {}
        x_plus = np.asarray(reset.r(x_minus, u, theta, got), dtype=float)
    else:
        got = {}
        x_plus = x_minus.copy()
    records = [TransitionRecord(k0, tau, event_id, mode, target, x_minus, x_plus, 0, got)]
    q, x = target, x_plus
    while True:
        nxt = model.transitions.followup(q, tau, x, u, theta)
        if nxt is None:
            break
        if len(records) >= cfg.max_chain:
            raise ChainLengthError(
                f"more than {cfg.max_chain} simultaneous transitions at t={tau:.12g} triggered by E{event_id}")
        records.append(TransitionRecord(k0 + len(records), tau, event_id, q, nxt, x, x, len(records), {}))
        q = nxt
    return q, x, records


def simulate(model, theta, T, config=None, seed=0, replication=0):
    """Generate one sample path on ``[0, T]``.

    Deterministic in ``(model, theta, T, config, seed, replication)``.

    Raises
    ------
    AssumptionViolation
        Non-finite state (1), simultaneous independent events (2), an
        over-long transition chain (3) or a tangential guard contact (4).
    """
    cfg = config or IntegratorConfig()
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    T = float(T)
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"horizon must be positive and finite, got {T}")
    src = DrawSource(dict(model.sources), RngStreamSet(seed), theta, replication)
    init_draws = src.take(model.initial.draws)
    x = np.asarray(model.initial.state(theta, init_draws), dtype=float)
    q = model.initial.resolve_mode(x, theta)
    t = 0.0
    records = []
    segments = []
    seg_t, seg_x = [t], [x]
    timers, others = model.active_events(q)
    ref = _reference_signs(model, others, t, x, theta, cfg.event_tol)
    step_check = model.step_check
    guard = model.guard

    while t < T:
        h = cfg.step
        t_end = t + h
        if t_end >= T:
            t_end, h = T, T - t
        # earliest timer expiry
        t_timer = ev_timer = None
        for e in timers:
            y = x[guard(e).timer_index]
            te = t + y
            if y <= 0 or te > T:
                continue
            if t_timer is not None and abs(te - t_timer) <= cfg.time_tol:
                raise SimultaneousEventsError(f"timers E{ev_timer} and E{e} expire together at t={te:.12g}")
            if t_timer is None or te < t_timer:
                t_timer, ev_timer = te, e
        hit_timer = t_timer is not None and t_timer <= t_end
        if hit_timer:
            t_end, h = t_timer, t_timer - t
        x_new = integrate_step(model, q, t, x, theta, h)
        if not np.all(np.isfinite(x_new)):
            raise UnboundedFlowError(f"non-finite state in mode {q} at t={t_end:.12g}")
        if step_check is not None:
            step_check(q, t, x, t_end, x_new, theta)
        found = locate_event(model, q, t, x, t_end, x_new, theta, cfg, ref,
                             t_timer if hit_timer else None, ev_timer)
        if found is None:
            t, x = t_end, x_new
            seg_t.append(t)
            seg_x.append(x)
            u = model.inputs(t, theta)
            for e in others:
                g = guard(e).value(t, x, u, theta)
                if abs(g) > cfg.event_tol:
                    ref[e] = _sign(g)
            continue

        tau, e, x_minus = found
        u = model.inputs(tau, theta)
        g_val = guard(e).value(tau, x_minus, u, theta)
        if abs(g_val) > cfg.event_tol:
            raise NumericalError(f"E{e} located at t={tau:.12g} with residual {g_val:.3g}")
        gdot = guard_rate(model, q, e, tau, x_minus, theta, u)
        if not abs(gdot) >= cfg.gdot_floor:
            raise TangentialContactError(
                f"E{e} touches its guard tangentially at t={tau:.12g} (|dg/dt|={abs(gdot):.3g})")
        seg_t.append(tau)
        seg_x.append(x_minus)
        segments.append(Segment(q, np.array(seg_t), np.array(seg_x)))
        q_new, x_plus, chain = apply_transition(model, q, tau, x_minus, e, src, theta, cfg, len(records) + 1)
        for rec in chain[:-1]:
            records.append(rec)
            segments.append(Segment(rec.to_mode, np.array([tau]), np.array([rec.x_plus])))
        records.append(chain[-1])
        t, x, q = tau, x_plus, q_new
        seg_t, seg_x = [t], [x]
        timers, others = model.active_events(q)
        ref = _reference_signs(model, others, t, x, theta, cfg.event_tol)

    segments.append(Segment(q, np.array(seg_t), np.array(seg_x)))
    return SamplePath(records, segments, T, theta.copy(), int(seed), int(replication), init_draws)
