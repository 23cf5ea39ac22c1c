"""Independent reference computations used as test oracles.

``sfm_event_driven`` re-simulates the single-node SFM with piecewise
constant rates by jumping from one rate change to the next and solving
the buffer trajectory in closed form. It pulls variates from the same
named streams as the hybrid simulator, so both see identical randomness,
but shares none of its event-location or sensitivity code. Its
derivatives use the busy-period bookkeeping directly: the content
sensitivity is 0 until a non-empty period first fills, 1 afterwards, and
the loss derivative drops by one at each such first fill.
"""
from __future__ import annotations

import math

from shaipa.stochastic import Distribution, RngStreamSet

DEFAULT_ALPHA = (Distribution.exponential(1.0), Distribution.uniform(0.0, 4.0))
DEFAULT_BETA = (Distribution.exponential(1.0), Distribution.uniform(0.5, 2.5))


class _Rate:
    def __init__(self, prefix, spec, streams, rep):
        self.clock, self.values = spec
        self.cs = streams.stream(f"{prefix}_clock", rep)
        self.vs = streams.stream(f"{prefix}_jump", rep)
        self.n = 0

    def draw(self):
        self.n += 1
        v = self.values.from_uniform(self.vs.uniform(self.n), self.n)
        life = self.clock.from_uniform(self.cs.uniform(self.n), self.n)
        return v, life


def sfm_event_driven(theta, T, seed, replication=0, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA, x0=0.0):
    """Return ``(Q, Loss, dQ, dLoss)`` (raw) for one SFM replication.

    Rates change only at their own jump epochs; the buffer content is
    piecewise linear and clipped to ``[0, theta]``.
    """
    streams = RngStreamSet(seed)
    ra, rb = _Rate("alpha", alpha, streams, replication), _Rate("beta", beta, streams, replication)
    a, la = ra.draw()
    b, lb = rb.draw()
    ta, tb = la, lb
    t, x = 0.0, min(x0, theta)
    Q = loss = dQ = dL = 0.0
    xp = 1.0 if x0 >= theta else 0.0
    while t < T:
        t_next = min(ta, tb, T)
        r = a - b
        while t < t_next:
            if x <= 0.0 and r <= 0:
                t = t_next
                break
            if x >= theta and r >= 0:
                loss += r * (t_next - t)
                Q += theta * (t_next - t)
                dQ += xp * (t_next - t)
                t = t_next
                break
            if r > 0:
                hit = t + (theta - x) / r
            elif r < 0:
                hit = t + x / -r
            else:
                hit = math.inf
            end = min(hit, t_next)
            dt = end - t
            Q += x * dt + 0.5 * r * dt * dt
            dQ += xp * dt
            x += r * dt
            t = end
            if end == hit:
                if r > 0:
                    x = theta
                    if xp == 0.0:
                        dL -= 1.0
                    xp = 1.0
                else:
                    x = 0.0
                    xp = 0.0
        if t >= T:
            break
        if ta <= tb:
            a, life = ra.draw()
            ta = t + life
        else:
            b, life = rb.draw()
            tb = t + life
    return Q, loss, dQ, dL


def deterministic_sfm(theta, T, alpha=2.0, beta=1.0):
    """Closed-form costs for constant rates with ``alpha > beta`` from an empty buffer."""
    r = alpha - beta
    t_fill = theta / r
    if t_fill >= T:
        return r * T * T / 2, 0.0, 0.0, 0.0
    Q = theta * t_fill / 2 + theta * (T - t_fill)
    loss = r * (T - t_fill)
    dQ = T - t_fill
    return Q, loss, dQ, -1.0
