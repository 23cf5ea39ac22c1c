"""Matrix infinitesimal perturbation analysis along a recorded sample path.

One forward pass over a :class:`~shaipa.simulator.SamplePath` carries the
state Jacobian ``x'(t) = dx/dtheta`` (n_x by n_theta):

* at each transition the active row of the event-time derivative matrix
  is ``tau' = -(dg/dx x' + dg/du u' + dg/dtheta) / gdot``;
* the jump update keeps non-reset components as ``x' + (f- - f+) tau'``
  and gives reset components the total derivative of the reset map;
* between transitions ``x'`` follows ``d/dt x' = df/dx x' + df/du u' + df/dtheta``,
  integrated with the trapezoidal rule on the simulator's step grid.

The cost gradient adds the jump terms ``[l(tau-) - l(tau+)] tau'`` to the
integral of ``dl/dtheta``. All quantities are raw (not divided by T).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import NumericalError, TangentialContactError

__all__ = [
    "TauPrimeRow",
    "GuardDiagonal",
    "ResetMatrices",
    "SensitivityTrace",
    "GradientReport",
    "guard_diagonal",
    "event_time_derivative",
    "reset_matrices",
    "state_derivative_jump",
    "state_derivative_flow",
    "propagate",
    "cost_gradient",
    "sample_cost",
    "run_ipa",
    "run_ipa_all",
]


@dataclass(frozen=True)
class TauPrimeRow:
    event_id: int
    values: np.ndarray
    k: int = 0
    tau: float = float("nan")


@dataclass(frozen=True)
class GuardDiagonal:
    """Guard values and their time derivatives, one entry per event."""

    g_values: np.ndarray
    g_dot: np.ndarray


@dataclass(frozen=True)
class ResetMatrices:
    C: np.ndarray
    C_bar: np.ndarray
    dr_dx: np.ndarray = None
    dr_du: np.ndarray = None
    dr_dtheta: np.ndarray = None

    @classmethod
    def identity(cls, n_x):
        return cls(np.eye(n_x), np.zeros((n_x, n_x)))


@dataclass
class SensitivityTrace:
    """``x'`` at every sample of every segment, plus per-record data."""

    segments: list
    tau_prime: list
    x_prime_minus: list
    x_prime_plus: list


@dataclass
class GradientReport:
    cost: str
    theta: np.ndarray
    horizon: float
    L: float
    dL_dtheta: np.ndarray
    per_event: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    @property
    def num_events(self):
        return len(self.per_event)

    @property
    def L_normalized(self):
        return self.L / self.horizon

    @property
    def dL_dtheta_normalized(self):
        return self.dL_dtheta / self.horizon

    def value(self, normalization="raw"):
        return self.L if normalization == "raw" else self.L_normalized

    def gradient(self, normalization="raw"):
        return self.dL_dtheta if normalization == "raw" else self.dL_dtheta_normalized

    def to_dict(self):
        return {
            "cost": self.cost,
            "theta": [float(v) for v in self.theta],
            "L_raw": float(self.L),
            "dL_dtheta_raw": [float(v) for v in self.dL_dtheta],
            "L_normalized": float(self.L_normalized),
            "dL_dtheta_normalized": [float(v) for v in self.dL_dtheta_normalized],
            "num_events": self.num_events,
            "counters": self.counters,
            "per_event_tau_prime": [
                {"k": r.k, "tau": float(r.tau), "event_id": r.event_id, "values": [float(v) for v in r.values]}
                for r in self.per_event
            ],
        }


def guard_diagonal(model, mode, t, x, theta, u=None):
    """All guard values and their rates along the flow of ``mode``."""
    if u is None:
        u = model.inputs(t, theta)
    fx = model.f(mode, t, x, u, theta)
    vals, dots = [], []
    for g in sorted(model.guards, key=lambda g: g.event_id):
        gx, _, _, gt = model.guard_partials(g.event_id, t, x, u, theta)
        vals.append(g.value(t, x, u, theta))
        dots.append(gt + float(gx @ fx))
    return GuardDiagonal(np.array(vals), np.array(dots))


def event_time_derivative(model, event_id, tau, x_minus, u, theta, x_prime_minus, u_prime, f_minus,
                          gdot_floor=1e-8, k=0):
    """Active row of the event-time derivative matrix.

    Returns ``-(dg/dx x' + dg/du u' + dg/dtheta) / gdot`` where
    ``gdot = dg/dt + dg/dx f(tau-)`` (inputs piecewise constant).
    """
    gx, gu, gth, gt = model.guard_partials(event_id, tau, x_minus, u, theta)
    gdot = gt + float(gx @ f_minus)
    if not abs(gdot) >= gdot_floor:
        raise TangentialContactError(f"E{event_id} at t={tau:.12g}: |dg/dt|={abs(gdot):.3g} below floor")
    dg = gx @ x_prime_minus + gth
    if gu.size:
        dg = dg + gu @ u_prime
    values = -dg / gdot
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"non-finite event-time derivative for E{event_id} at t={tau:.12g}")
    return TauPrimeRow(event_id, np.asarray(values, dtype=float), k, tau)


def reset_matrices(model, record, theta, u):
    """C, C-bar and reset-map partials for one transition record."""
    n_x = model.n_x
    reset = None
    if record.chain_position == 0:
        reset = model.reset(record.from_mode, record.to_mode, record.event_id)
    if reset is None:
        return ResetMatrices.identity(n_x)
    mask = np.array(reset.reset_mask, dtype=float)
    rx, ru, rth = model.reset_partials(reset, record.x_minus, u, theta, record.draws)
    return ResetMatrices(np.diag(1.0 - mask), np.diag(mask), rx, ru, rth)


def state_derivative_jump(x_prime_minus, f_minus, f_plus, tau_prime, resets, u_prime=None):
    """State Jacobian right after a transition.

    Components kept by the transition get ``x' + (f- - f+) tau'``. Reset
    components get the total derivative of ``r(x(tau-), u, theta)`` taken
    along the shifted event time, ``dr/dx (x' + f- tau') + dr/du u' +
    dr/dtheta - f+ tau'``; the tau' terms vanish whenever the event time
    does not depend on theta.
    """
    tp = tau_prime.values if isinstance(tau_prime, TauPrimeRow) else np.asarray(tau_prime, dtype=float)
    f_minus = np.asarray(f_minus, dtype=float)
    f_plus = np.asarray(f_plus, dtype=float)
    kept = x_prime_minus + np.outer(f_minus - f_plus, tp)
    if resets.dr_dx is None:
        return resets.C @ kept
    along = resets.dr_dx @ (x_prime_minus + np.outer(f_minus, tp)) + resets.dr_dtheta - np.outer(f_plus, tp)
    if u_prime is not None and resets.dr_du is not None and resets.dr_du.size:
        along = along + resets.dr_du @ u_prime
    return resets.C @ kept + resets.C_bar @ along


def state_derivative_flow(model, mode, times, states, x_prime0, theta):
    """Propagate ``x'`` across one inter-transition segment.

    Returns an array of shape ``(len(times), n_x, n_theta)`` holding ``x'``
    at every sample; the first entry is ``x_prime0``.
    """
    times = np.asarray(times, dtype=float)
    m = len(times)
    out = np.empty((m,) + np.shape(x_prime0))
    out[0] = x_prime0
    if m == 1:
        return out
    xp = np.asarray(x_prime0, dtype=float)

    def rate(i, xp):
        t = times[i]
        u = model.inputs(t, theta)
        A = model.df_dx(mode, t, states[i], u, theta)
        b = model.df_dtheta(mode, t, states[i], u, theta)
        if model.n_u:
            b = b + model.df_du(mode, t, states[i], u, theta) @ model.inputs_prime(t, theta)
        return A, b

    A0, b0 = rate(0, xp)
    for i in range(1, m):
        h = times[i] - times[i - 1]
        A1, b1 = rate(i, xp)
        d0 = A0 @ xp + b0
        pred = xp + h * d0
        xp = xp + 0.5 * h * (d0 + A1 @ pred + b1)
        out[i] = xp
        A0, b0 = A1, b1
    if not np.all(np.isfinite(out)):
        raise NumericalError(f"non-finite state sensitivity in mode {mode}")
    return out


def propagate(model, path, gdot_floor=1e-8):
    """State sensitivities and event-time derivatives for a whole path."""
    theta = path.theta
    xp = model.initial_prime(theta, path.initial_draws)
    seg_out, taus, before, after = [], [], [], []
    current = None
    for k, seg in enumerate(path.segments):
        xs = state_derivative_flow(model, seg.mode, seg.t, seg.x, xp, theta)
        seg_out.append(xs)
        xp = xs[-1]
        if k == len(path.records):
            break
        rec = path.records[k]
        u = model.inputs(rec.tau, theta)
        up = model.inputs_prime(rec.tau, theta)
        f_minus = model.f(rec.from_mode, rec.tau, rec.x_minus, u, theta)
        f_plus = model.f(rec.to_mode, rec.tau, rec.x_plus, u, theta)
        if rec.chain_position == 0 or current is None:
            current = event_time_derivative(model, rec.event_id, rec.tau, rec.x_minus, u, theta, xp, up,
                                            f_minus, gdot_floor, rec.k)
            row = current
        else:
            row = TauPrimeRow(rec.event_id, current.values, rec.k, rec.tau)
        taus.append(row)
        before.append(xp)
        xp = state_derivative_jump(xp, f_minus, f_plus, row, reset_matrices(model, rec, theta, u), up)
        after.append(xp)
    return SensitivityTrace(seg_out, taus, before, after)


def _trapezoid(t, y):
    """Trapezoidal integral of samples ``y`` (first axis) over grid ``t``."""
    if len(t) < 2:
        return np.zeros(np.shape(y)[1:]) if np.ndim(y) > 1 else 0.0
    dt = t[1:] - t[:-1]
    return 0.5 * (dt @ (y[1:] + y[:-1]))


def cost_gradient(model, path, trace, cost):
    """Sample cost and its raw gradient for one registered cost integrand."""
    c = model.cost(cost)
    theta = path.theta
    L = 0.0
    grad = np.zeros(model.n_theta)
    for seg, xs in zip(path.segments, trace.segments):
        q = seg.mode
        m = len(seg.t)
        if m < 2:
            continue
        vals = np.empty(m)
        dl = np.empty((m, model.n_theta))
        for i in range(m):
            t = seg.t[i]
            x = seg.x[i]
            u = model.inputs(t, theta)
            vals[i] = c.value(q, t, x, u, theta)
            lx, lu, lth = model.cost_partials(cost, q, t, x, u, theta)
            d = lx @ xs[i] + lth
            if model.n_u:
                d = d + lu @ model.inputs_prime(t, theta)
            dl[i] = d
        L += float(_trapezoid(seg.t, vals))
        grad += _trapezoid(seg.t, dl)
    for rec, row in zip(path.records, trace.tau_prime):
        u = model.inputs(rec.tau, theta)
        jump = c.value(rec.from_mode, rec.tau, rec.x_minus, u, theta) - c.value(rec.to_mode, rec.tau, rec.x_plus, u, theta)
        if jump != 0.0:
            grad = grad + jump * row.values
    if not np.all(np.isfinite(grad)):
        raise NumericalError(f"non-finite gradient for cost {cost!r}")
    counters = model.counters(path) if model.counters is not None else {}
    return GradientReport(cost, np.array(theta), path.horizon, L, grad, list(trace.tau_prime), counters)


def sample_cost(model, path, cost):
    """Raw sample cost ``L`` alone (no sensitivities)."""
    c = model.cost(cost)
    theta = path.theta
    total = 0.0
    for seg in path.segments:
        if len(seg.t) < 2:
            continue
        vals = np.array([c.value(seg.mode, t, x, model.inputs(t, theta), theta) for t, x in zip(seg.t, seg.x)])
        total += float(_trapezoid(seg.t, vals))
    return total


def run_ipa(model, path, cost=None, trace=None):
    """Gradient report for ``cost`` (default: the model's first cost)."""
    if cost is None:
        cost = next(iter(model.costs))
    if trace is None:
        trace = propagate(model, path)
    return cost_gradient(model, path, trace, cost)


def run_ipa_all(model, path):
    """Gradient reports for every registered cost, sharing one forward pass."""
    trace = propagate(model, path)
    return {name: cost_gradient(model, path, trace, name) for name in model.costs}
