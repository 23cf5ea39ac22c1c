"""Parameterized stochastic hybrid automaton representation.

A model is a finite mode table with per-mode vector fields, one guard
function per event, reset maps attached to (source, target, event)
transitions, and predicate-driven follow-up transitions that fire at the
same instant when a reset leaves the state outside the mode invariant.
All derivative information is supplied by the model author as evaluators.

Evaluator signatures (``t`` float, ``x`` state array, ``u`` input array,
``theta`` parameter array, ``q`` mode index)::

    guard.value(t, x, u, theta) -> float
    field.f(t, x, u, theta) -> (n_x,)
    reset.r(x, u, theta, draws) -> (n_x,)
    cost.value(q, t, x, u, theta) -> float
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .stochastic import ClockStructure, Draw, DrawSource, JumpProcess, RngStreamSet, redraw

__all__ = [
    "ParameterVector",
    "GuardFunction",
    "VectorField",
    "ResetMap",
    "TransitionFunction",
    "CostIntegrand",
    "InitialCondition",
    "AutomatonModel",
    "CheckResult",
    "ValidationReport",
    "EventClass",
    "validate_model",
    "classify_event",
]


@dataclass(frozen=True)
class ParameterVector:
    """Control parameter values with optional box bounds."""

    values: np.ndarray
    bounds: Optional[tuple] = None

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=float)).copy()
        if values.ndim != 1 or values.size < 1:
            raise ValueError("theta must be a non-empty vector")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.bounds is not None:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if len(bounds) != values.size:
                raise ValueError("one (low, high) pair per coordinate is required")
            for j, (lo, hi) in enumerate(bounds):
                if lo > hi:
                    raise ValueError(f"empty interval for coordinate {j}: [{lo}, {hi}]")
                if not lo <= values[j] <= hi:
                    raise ValueError(f"theta[{j}]={values[j]} outside [{lo}, {hi}]")
            object.__setattr__(self, "bounds", bounds)

    def __len__(self):
        return self.values.size

    def project(self, values):
        values = np.asarray(values, dtype=float)
        if self.bounds is None:
            return values.copy()
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        return np.clip(values, lo, hi)


@dataclass(frozen=True)
class GuardFunction:
    """Guard of one event; the event fires at the first zero of ``value``.

    ``timer_index`` marks guards that are exactly a timer state component,
    whose expiry the simulator schedules analytically. Unset partials are
    taken as zero.
    """

    event_id: int
    value: Callable
    d_dx: Callable
    d_du: Optional[Callable] = None
    d_dtheta: Optional[Callable] = None
    d_dt_explicit: Optional[Callable] = None
    timer_index: Optional[int] = None
    name: str = ""


@dataclass(frozen=True)
class VectorField:
    mode: int
    f: Callable
    df_dx: Callable
    df_du: Optional[Callable] = None
    df_dtheta: Optional[Callable] = None


@dataclass(frozen=True)
class ResetMap:
    """State reset on transition (source, target) caused by ``event_id``.

    ``draws`` names the stochastic sources consumed (one fresh draw each)
    whenever the reset executes; they reach ``r`` and its partials as a
    ``{name: Draw}`` mapping.
    """

    source: int
    target: int
    event_id: int
    r: Callable
    dr_dx: Callable
    reset_mask: tuple
    dr_du: Optional[Callable] = None
    dr_dtheta: Optional[Callable] = None
    draws: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "reset_mask", tuple(bool(b) for b in self.reset_mask))
        object.__setattr__(self, "draws", tuple(self.draws))


@dataclass(frozen=True)
class TransitionFunction:
    """Finite transition table plus invariant-driven follow-ups.

    ``followups[q]`` is a sequence of ``(predicate, target)`` pairs checked
    in order right after a transition lands in ``q``; the first predicate
    that holds fires an immediate transition to ``target``.
    """

    table: Mapping
    followups: Mapping = field(default_factory=dict)

    def target(self, mode, event_id):
        return self.table.get((mode, event_id))

    def events_in(self, mode):
        return tuple(sorted(e for (q, e) in self.table if q == mode))

    def followup(self, mode, t, x, u, theta):
        for predicate, target in self.followups.get(mode, ()):
            if predicate(t, x, u, theta):
                return target
        return None


@dataclass(frozen=True)
class CostIntegrand:
    name: str
    value: Callable
    d_dx: Callable
    d_du: Optional[Callable] = None
    d_dtheta: Optional[Callable] = None


@dataclass(frozen=True)
class InitialCondition:
    """Initial state built from theta and a set of initial draws.

    ``mode`` is either a fixed index or ``mode(x0, theta) -> int``.
    ``state_prime`` returns dx0/dtheta; None means zero.
    """

    state: Callable
    mode: object = 0
    draws: tuple = ()
    state_prime: Optional[Callable] = None

    def resolve_mode(self, x0, theta):
        return int(self.mode(x0, theta)) if callable(self.mode) else int(self.mode)


@dataclass(frozen=True, eq=False)
class AutomatonModel:
    """Immutable parameterized stochastic hybrid automaton.

    Parameters
    ----------
    name : str
    n_modes, n_x, n_theta : int
        Numbers of modes, continuous states and parameters.
    fields : sequence of VectorField
        One per mode.
    guards : sequence of GuardFunction
        One per event id in ``1..n_events``.
    resets : sequence of ResetMap
    transitions : TransitionFunction
    initial : InitialCondition
    costs : mapping of str to CostIntegrand
    sources : mapping of str to ClockStructure or JumpProcess
    timer_mask : sequence of bool
        Which state components are timers (unit decay).
    nominal_theta : array-like
        Parameter value used for static validation.
    n_u : int
        Input dimension; ``input_fn(t, theta)`` and ``input_prime(t, theta)``
        supply the inputs and their theta-Jacobian when ``n_u > 0``.
    state_sampler : callable, optional
        ``state_sampler(rng, theta) -> (t, x)``, admissible points for
        finite-difference checks.
    step_check : callable, optional
        ``step_check(q, t0, x0, t1, x1, theta)`` raising
        :class:`AssumptionViolation` on model-specific degeneracies.
    counters : callable, optional
        ``counters(path) -> dict`` of model-specific tallies for reports.
    """

    name: str
    n_modes: int
    n_x: int
    n_theta: int
    fields: Sequence
    guards: Sequence
    resets: Sequence
    transitions: TransitionFunction
    initial: InitialCondition
    costs: Mapping
    sources: Mapping
    timer_mask: Sequence
    nominal_theta: Sequence = (1.0,)
    n_u: int = 0
    input_fn: Optional[Callable] = None
    input_prime: Optional[Callable] = None
    state_sampler: Optional[Callable] = None
    step_check: Optional[Callable] = None
    counters: Optional[Callable] = None
    state_labels: Optional[Sequence] = None
    mode_labels: Optional[Sequence] = None

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "guards", tuple(self.guards))
        object.__setattr__(self, "resets", tuple(self.resets))
        object.__setattr__(self, "timer_mask", tuple(bool(b) for b in self.timer_mask))
        object.__setattr__(self, "nominal_theta", tuple(float(v) for v in self.nominal_theta))
        if len(self.timer_mask) != self.n_x:
            raise ValueError("timer_mask length must equal n_x")
        if len(self.nominal_theta) != self.n_theta:
            raise ValueError("nominal_theta length must equal n_theta")
        field_by_mode = {}
        for vf in self.fields:
            if vf.mode in field_by_mode:
                raise ValueError(f"duplicate vector field for mode {vf.mode}")
            field_by_mode[vf.mode] = vf
        missing = [q for q in range(self.n_modes) if q not in field_by_mode]
        if missing:
            raise ValueError(f"no vector field for modes {missing}")
        object.__setattr__(self, "_field_by_mode", field_by_mode)
        object.__setattr__(self, "_guard_by_id", {g.event_id: g for g in self.guards})
        object.__setattr__(self, "_reset_by_key", {(r.source, r.target, r.event_id): r for r in self.resets})
        active = {}
        for q in range(self.n_modes):
            evs = self.transitions.events_in(q)
            timers = tuple(e for e in evs if e in self._guard_by_id and self._guard_by_id[e].timer_index is not None)
            others = tuple(e for e in evs if e in self._guard_by_id and e not in timers)
            active[q] = (timers, others)
        object.__setattr__(self, "_active", active)
        object.__setattr__(self, "_timer_idx", np.flatnonzero(self.timer_mask))
        object.__setattr__(self, "_zero_u", np.zeros(self.n_u))
        object.__setattr__(self, "_zero_uprime", np.zeros((self.n_u, self.n_theta)))

    # -- lookups -------------------------------------------------------
    @property
    def n_events(self):
        return len(self.guards)

    def field(self, mode):
        return self._field_by_mode[mode]

    def guard(self, event_id):
        try:
            return self._guard_by_id[event_id]
        except KeyError:
            raise KeyError(f"unknown event id {event_id}") from None

    def reset(self, source, target, event_id):
        return self._reset_by_key.get((source, target, event_id))

    def active_events(self, mode):
        """(timer events, other events) enabled in ``mode``."""
        return self._active[mode]

    # -- evaluators with zero defaults --------------------------------
    def inputs(self, t, theta):
        if self.n_u == 0 or self.input_fn is None:
            return self._zero_u
        return np.asarray(self.input_fn(t, theta), dtype=float)

    def inputs_prime(self, t, theta):
        if self.n_u == 0 or self.input_prime is None:
            return self._zero_uprime
        return np.asarray(self.input_prime(t, theta), dtype=float)

    def f(self, mode, t, x, u, theta):
        return self._field_by_mode[mode].f(t, x, u, theta)

    def df_dx(self, mode, t, x, u, theta):
        return np.asarray(self._field_by_mode[mode].df_dx(t, x, u, theta), dtype=float)

    def df_du(self, mode, t, x, u, theta):
        fn = self._field_by_mode[mode].df_du
        return np.zeros((self.n_x, self.n_u)) if fn is None else np.asarray(fn(t, x, u, theta), dtype=float)

    def df_dtheta(self, mode, t, x, u, theta):
        fn = self._field_by_mode[mode].df_dtheta
        return np.zeros((self.n_x, self.n_theta)) if fn is None else np.asarray(fn(t, x, u, theta), dtype=float)

    def guard_partials(self, event_id, t, x, u, theta):
        """(dg/dx, dg/du, dg/dtheta, dg/dt) at a point."""
        g = self.guard(event_id)
        gx = np.asarray(g.d_dx(t, x, u, theta), dtype=float)
        gu = np.zeros(self.n_u) if g.d_du is None else np.asarray(g.d_du(t, x, u, theta), dtype=float)
        gth = np.zeros(self.n_theta) if g.d_dtheta is None else np.asarray(g.d_dtheta(t, x, u, theta), dtype=float)
        gt = 0.0 if g.d_dt_explicit is None else float(g.d_dt_explicit(t, x, u, theta))
        return gx, gu, gth, gt

    def reset_partials(self, reset, x, u, theta, draws):
        """(dr/dx, dr/du, dr/dtheta) of a reset map."""
        rx = np.asarray(reset.dr_dx(x, u, theta, draws), dtype=float)
        ru = np.zeros((self.n_x, self.n_u)) if reset.dr_du is None else np.asarray(reset.dr_du(x, u, theta, draws), dtype=float)
        rth = (np.zeros((self.n_x, self.n_theta)) if reset.dr_dtheta is None
               else np.asarray(reset.dr_dtheta(x, u, theta, draws), dtype=float))
        return rx, ru, rth

    def cost(self, name):
        try:
            return self.costs[name]
        except KeyError:
            raise KeyError(f"model {self.name!r} has no cost {name!r}; available: {sorted(self.costs)}") from None

    def cost_partials(self, name, q, t, x, u, theta):
        c = self.cost(name)
        lx = np.asarray(c.d_dx(q, t, x, u, theta), dtype=float)
        lu = np.zeros(self.n_u) if c.d_du is None else np.asarray(c.d_du(q, t, x, u, theta), dtype=float)
        lth = np.zeros(self.n_theta) if c.d_dtheta is None else np.asarray(c.d_dtheta(q, t, x, u, theta), dtype=float)
        return lx, lu, lth

    def initial_prime(self, theta, draws):
        fn = self.initial.state_prime
        if fn is None:
            return np.zeros((self.n_x, self.n_theta))
        return np.asarray(fn(theta, draws), dtype=float).reshape(self.n_x, self.n_theta)

    def sample_point(self, rng, theta):
        if self.state_sampler is not None:
            t, x = self.state_sampler(rng, theta)
            return float(t), np.asarray(x, dtype=float)
        src = DrawSource(dict(self.sources), RngStreamSet(int(rng.integers(2 ** 32))), theta)
        x0 = np.asarray(self.initial.state(theta, src.take(self.initial.draws)), dtype=float)
        x = x0 + rng.uniform(-0.5, 0.5, size=self.n_x)
        mask = np.array(self.timer_mask)
        x[mask] = np.abs(x[mask]) + 0.1
        return float(rng.uniform(0.0, 1.0)), x


# ---------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    message: str = ""


@dataclass
class ValidationReport:
    model: str
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def add(self, name, passed, message=""):
        self.checks.append(CheckResult(name, bool(passed), message))

    def __str__(self):
        lines = [f"model {self.model}: {'PASS' if self.ok else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}" + (f": {c.message}" if c.message else ""))
        return "\n".join(lines)


def _fd_gradient(fn, z, h):
    z = np.asarray(z, dtype=float)
    base = np.asarray(fn(z), dtype=float)
    out = np.zeros(base.shape + (z.size,))
    for j in range(z.size):
        zp = z.copy()
        zm = z.copy()
        zp[j] += h
        zm[j] -= h
        out[..., j] = (np.asarray(fn(zp), dtype=float) - np.asarray(fn(zm), dtype=float)) / (2 * h)
    return out


def _mismatch(analytic, numeric, rtol=1e-4, atol=1e-6):
    analytic = np.asarray(analytic, dtype=float).reshape(np.shape(numeric))
    err = np.abs(analytic - numeric)
    bad = err > atol + rtol * np.abs(numeric)
    return float(err.max()) if err.size and bad.any() else None


def _sample_draws(model, theta, rng, names):
    src = DrawSource(dict(model.sources), RngStreamSet(int(rng.integers(2 ** 32))), theta)
    return src.take(names)


def validate_model(model, theta=None, n_points=100, seed=0, fd_step=1e-6):
    """Run static consistency checks on ``model``; never raises for failures.

    Checks guard non-nullity, transition-table completeness, reset-mask
    consistency, unit timer decay in every mode, and every supplied
    partial against central finite differences at sampled points.
    """
    theta = np.asarray(model.nominal_theta if theta is None else theta, dtype=float)
    rng = np.random.default_rng(seed)
    report = ValidationReport(model.name)
    h = fd_step
    points = [model.sample_point(rng, theta) for _ in range(n_points)]
    u_of = [model.inputs(t, theta) for t, _ in points]

    # structure
    ids = sorted(g.event_id for g in model.guards)
    report.add("one guard per event id", ids == list(range(1, len(ids) + 1)),
               "" if ids == list(range(1, len(ids) + 1)) else f"guard ids {ids}")
    problems = []
    for (q, e), tgt in model.transitions.table.items():
        if not 0 <= q < model.n_modes or not 0 <= tgt < model.n_modes:
            problems.append(f"({q},E{e})->{tgt} refers to an unknown mode")
        if e not in model._guard_by_id:
            problems.append(f"({q},E{e}) has no guard")
    for q in range(model.n_modes):
        if not model.transitions.events_in(q):
            problems.append(f"mode {q} has no enabled event")
        for _, tgt in model.transitions.followups.get(q, ()):
            if not 0 <= tgt < model.n_modes:
                problems.append(f"follow-up from {q} to unknown mode {tgt}")
    for r in model.resets:
        if model.transitions.target(r.source, r.event_id) != r.target:
            problems.append(f"reset ({r.source},{r.target},E{r.event_id}) is not a transition of the table")
        if len(r.reset_mask) != model.n_x:
            problems.append(f"reset ({r.source},{r.target},E{r.event_id}) mask has wrong length")
        for name in r.draws:
            if name not in model.sources:
                problems.append(f"reset ({r.source},{r.target},E{r.event_id}) draws unknown source {name!r}")
    report.add("transition table complete", not problems, "; ".join(problems))

    # guard non-nullity
    for g in model.guards:
        vals = [g.value(t, x, u, theta) for (t, x), u in zip(points, u_of)]
        report.add(f"E{g.event_id} guard not identically zero", any(v != 0 for v in vals),
                   "" if any(v != 0 for v in vals) else "guard identically zero")

    # timers
    timer_idx = [j for j, m in enumerate(model.timer_mask) if m]
    bad = []
    for q in range(model.n_modes):
        for (t, x), u in zip(points[:10], u_of):
            fx = np.asarray(model.f(q, t, x, u, theta))
            for j in timer_idx:
                if fx[j] != -1.0:
                    bad.append(f"mode {q} timer x[{j}] rate {fx[j]}")
    report.add("timer dynamics equal -1", not bad, "; ".join(sorted(set(bad))))
    for g in model.guards:
        if g.timer_index is not None and not model.timer_mask[g.timer_index]:
            report.add(f"E{g.event_id} timer guard", False, f"x[{g.timer_index}] is not a timer")

    # guard partials
    for g in model.guards:
        msgs = []
        for (t, x), u in zip(points, u_of):
            gx, gu, gth, gt = model.guard_partials(g.event_id, t, x, u, theta)
            checks = [
                ("d_dx", gx, _fd_gradient(lambda z: g.value(t, z, u, theta), x, h)),
                ("d_dtheta", gth, _fd_gradient(lambda z: g.value(t, x, u, z), theta, h)),
                ("d_dt", gt, _fd_gradient(lambda z: g.value(z[0], x, u, theta), [t], h)[0]),
            ]
            if model.n_u:
                checks.append(("d_du", gu, _fd_gradient(lambda z: g.value(t, x, z, theta), u, h)))
            for label, a, n in checks:
                err = _mismatch(a, n)
                if err is not None:
                    msgs.append(f"{label} off by {err:.3g}")
        report.add(f"E{g.event_id} guard partials", not msgs, "partial mismatch: " + msgs[0] if msgs else "")

    # vector field partials
    for q in range(model.n_modes):
        msgs = []
        for (t, x), u in zip(points, u_of):
            fx = lambda z: model.f(q, t, z, u, theta)
            fth = lambda z: model.f(q, t, x, u, z)
            checks = [("df_dx", model.df_dx(q, t, x, u, theta), _fd_gradient(fx, x, h)),
                      ("df_dtheta", model.df_dtheta(q, t, x, u, theta), _fd_gradient(fth, theta, h))]
            if model.n_u:
                checks.append(("df_du", model.df_du(q, t, x, u, theta),
                               _fd_gradient(lambda z: model.f(q, t, x, z, theta), u, h)))
            for label, a, n in checks:
                fin = np.all(np.isfinite(model.f(q, t, x, u, theta)))
                if not fin:
                    msgs.append("non-finite vector field")
                err = _mismatch(a, n)
                if err is not None:
                    msgs.append(f"{label} off by {err:.3g}")
        report.add(f"mode {q} vector field partials", not msgs, "partial mismatch: " + msgs[0] if msgs else "")

    # resets
    for r in model.resets:
        msgs = []
        mask = np.array(r.reset_mask)
        for (t, x), u in zip(points[:25], u_of):
            draws = _sample_draws(model, theta, rng, r.draws)
            out = np.asarray(r.r(x, u, theta, draws), dtype=float)
            if np.any(out[~mask] != x[~mask]):
                msgs.append("component with reset_mask false is modified")
            rx, ru, rth = model.reset_partials(r, x, u, theta, draws)
            num_x = _fd_gradient(lambda z: r.r(z, u, theta, draws), x, h)

            def r_of_theta(z, x=x, u=u, draws=draws):
                moved = {k: redraw(model.sources[k], d, z) for k, d in draws.items()}
                return r.r(x, u, z, moved)

            num_th = _fd_gradient(r_of_theta, theta, h)
            for label, a, n in (("dr_dx", rx, num_x), ("dr_dtheta", rth, num_th)):
                err = _mismatch(a, n)
                if err is not None:
                    msgs.append(f"partial mismatch: {label} off by {err:.3g}")
        report.add(f"reset ({r.source},{r.target},E{r.event_id})", not msgs, msgs[0] if msgs else "")

    # cost integrands
    for name, c in model.costs.items():
        msgs = []
        for q in range(model.n_modes):
            for (t, x), u in zip(points[:25], u_of):
                lx, lu, lth = model.cost_partials(name, q, t, x, u, theta)
                for label, a, n in (("d_dx", lx, _fd_gradient(lambda z: c.value(q, t, z, u, theta), x, h)),
                                    ("d_dtheta", lth, _fd_gradient(lambda z: c.value(q, t, x, u, z), theta, h))):
                    err = _mismatch(a, n)
                    if err is not None:
                        msgs.append(f"mode {q} {label} off by {err:.3g}")
        report.add(f"cost {name!r} partials", not msgs, "partial mismatch: " + msgs[0] if msgs else "")

    # initial condition
    try:
        src = DrawSource(dict(model.sources), RngStreamSet(seed), theta)
        x0 = np.asarray(model.initial.state(theta, src.take(model.initial.draws)), dtype=float)
        q0 = model.initial.resolve_mode(x0, theta)
        ok = x0.shape == (model.n_x,) and 0 <= q0 < model.n_modes
        follow = model.transitions.followup(q0, 0.0, x0, model.inputs(0.0, theta), theta) if ok else None
        report.add("initial state admissible", ok and follow is None,
                   "" if ok and follow is None else f"initial mode {q0} invariant violated")
    except Exception as exc:  # noqa: BLE001 - report, do not raise
        report.add("initial state admissible", False, f"{type(exc).__name__}: {exc}")
    return report


# ---------------------------------------------------------------------
# event classification
# ---------------------------------------------------------------------

class EventClass(str, enum.Enum):
    EXOGENOUS = "exogenous"
    ENDOGENOUS = "endogenous"
    INDUCED = "induced"


def _guard_component(model, g, theta, points):
    """State index j if the guard is x_j plus a constant, else None."""
    idx = None
    for (t, x), u in points:
        gx, gu, gth, gt = model.guard_partials(g.event_id, t, x, u, theta)
        nz = np.flatnonzero(gx)
        if len(nz) != 1 or gx[nz[0]] != 1.0 or np.any(gu) or np.any(gth) or gt != 0:
            return None
        if idx is None:
            idx = int(nz[0])
        elif idx != nz[0]:
            return None
    return idx


def classify_event(model, event_id, theta=None, n_points=20, seed=0):
    """Classify an event as exogenous, endogenous or induced.

    Exogenous: the guard is a timer component whose guard, resets and
    initial value carry no theta dependence. Induced: the guard is a state
    component that another event's reset initializes. Endogenous otherwise.
    """
    g = model.guard(event_id)
    theta = np.asarray(model.nominal_theta if theta is None else theta, dtype=float)
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(n_points):
        t, x = model.sample_point(rng, theta)
        points.append(((t, x), model.inputs(t, theta)))
    j = _guard_component(model, g, theta, points)
    if j is None:
        return EventClass.ENDOGENOUS
    if model.timer_mask[j]:
        theta_free = True
        for r in model.resets:
            if not r.reset_mask[j]:
                continue
            for (t, x), u in points[:5]:
                draws = _sample_draws(model, theta, rng, r.draws)
                _, _, rth = model.reset_partials(r, x, u, theta, draws)
                if np.any(rth[j] != 0):
                    theta_free = False
        src = DrawSource(dict(model.sources), RngStreamSet(seed), theta)
        d0 = src.take(model.initial.draws)
        if np.any(model.initial_prime(theta, d0)[j] != 0):
            theta_free = False
        return EventClass.EXOGENOUS if theta_free else EventClass.ENDOGENOUS
    if any(r.reset_mask[j] and r.event_id != event_id for r in model.resets):
        return EventClass.INDUCED
    return EventClass.ENDOGENOUS
