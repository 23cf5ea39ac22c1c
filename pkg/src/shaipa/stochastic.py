"""Clock structures, jump processes and replayable random streams.

Every named source owns an independent substream derived from a master
seed, so the n-th lifetime of a clock is the same number regardless of the
parameter value at which a path is simulated. That is what makes
common-random-number finite differences line up with IPA estimates.

Variates are produced by inverse transform from uniform base draws; a
lifetime that depends on ``theta`` is a smooth function of the same base
draw, which gives a well-defined per-draw derivative.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

__all__ = [
    "Distribution",
    "ClockStructure",
    "JumpProcess",
    "Draw",
    "RngStreamSet",
    "VariateStream",
    "DrawSource",
    "draw_lifetime",
    "draw_jump",
]

_BLOCK = 64
_TINY = 2.0 ** -53


@dataclass(frozen=True)
class Distribution:
    """Sampler specification.

    ``kind`` is one of ``exponential`` (params: rate), ``uniform`` (a, b),
    ``deterministic`` (value) or ``empirical`` (values, replayed cyclically).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        self.check()

    @classmethod
    def exponential(cls, rate=1.0):
        return cls("exponential", (float(rate),))

    @classmethod
    def uniform(cls, a, b):
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def deterministic(cls, value):
        return cls("deterministic", (float(value),))

    @classmethod
    def empirical(cls, values):
        return cls("empirical", tuple(float(v) for v in values))

    def check(self):
        k, p = self.kind, self.params
        if k == "exponential":
            if len(p) != 1 or not p[0] > 0 or not math.isfinite(p[0]):
                raise ValueError(f"exponential rate must be positive, got {p}")
        elif k == "uniform":
            if len(p) != 2 or not (p[0] < p[1]):
                raise ValueError(f"uniform requires a < b, got {p}")
        elif k == "deterministic":
            if len(p) != 1 or not math.isfinite(p[0]):
                raise ValueError(f"deterministic value must be finite, got {p}")
        elif k == "empirical":
            if len(p) == 0 or not all(math.isfinite(v) for v in p):
                raise ValueError("empirical distribution needs a non-empty finite list")
        else:
            raise ValueError(f"unknown distribution kind {k!r}")

    @property
    def needs_randomness(self):
        return self.kind in ("exponential", "uniform")

    @property
    def support(self):
        k, p = self.kind, self.params
        if k == "exponential":
            return (0.0, math.inf)
        if k == "uniform":
            return (p[0], p[1])
        if k == "deterministic":
            return (p[0], p[0])
        return (min(p), max(p))

    def from_uniform(self, u, n):
        """Map a base uniform ``u`` in [0, 1) (and index ``n``) to a variate."""
        k, p = self.kind, self.params
        if k == "exponential":
            return max(-math.log1p(-u), _TINY) / p[0]
        if k == "uniform":
            return p[0] + (p[1] - p[0]) * u
        if k == "deterministic":
            return p[0]
        return p[(n - 1) % len(p)]

    def to_dict(self):
        k, p = self.kind, self.params
        if k == "exponential":
            return {"kind": k, "rate": p[0]}
        if k == "uniform":
            return {"kind": k, "a": p[0], "b": p[1]}
        if k == "deterministic":
            return {"kind": k, "value": p[0]}
        return {"kind": k, "values": list(p)}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind", None)
        try:
            if kind == "exponential":
                out = cls.exponential(d.pop("rate"))
            elif kind == "uniform":
                out = cls.uniform(d.pop("a"), d.pop("b"))
            elif kind == "deterministic":
                out = cls.deterministic(d.pop("value"))
            elif kind == "empirical":
                out = cls.empirical(d.pop("values"))
            else:
                raise ValueError(f"unknown distribution kind {kind!r}")
        except KeyError as exc:
            raise ValueError(f"distribution {kind!r} missing field {exc}") from None
        if d:
            raise ValueError(f"unknown distribution fields {sorted(d)}")
        return out


@dataclass(frozen=True)
class ClockStructure:
    """Lifetime sequence of one event.

    With ``scale_index`` set, lifetimes are ``theta[scale_index] * w`` for a
    theta-free base variate ``w``; otherwise they do not depend on theta.
    """

    name: str
    sampler: Distribution
    scale_index: Optional[int] = None

    def __post_init__(self):
        lo, _ = self.sampler.support
        if self.sampler.kind != "exponential" and lo <= 0:
            raise ValueError(f"clock {self.name!r}: lifetimes must be strictly positive, support starts at {lo}")
        if self.scale_index is not None and self.scale_index < 0:
            raise ValueError("scale_index must be non-negative")

    @property
    def theta_free(self):
        return self.scale_index is None

    def lifetime(self, w, theta):
        if self.scale_index is None:
            return w
        return w * float(theta[self.scale_index])

    def lifetime_derivative(self, w, n_theta):
        grad = np.zeros(n_theta)
        if self.scale_index is not None:
            grad[self.scale_index] = w
        return grad


@dataclass(frozen=True)
class JumpProcess:
    """Jump magnitudes (``values``) occurring at the epochs of ``clock``."""

    name: str
    values: Distribution
    clock: ClockStructure


@dataclass(frozen=True)
class Draw:
    """One realized variate with its theta-gradient and base draw."""

    source: str
    index: int
    value: float
    grad: np.ndarray
    base: float


def _stream_key(name):
    return zlib.crc32(name.encode("utf-8"))


class VariateStream:
    """Random-access view of one substream's uniform variates (1-based)."""

    def __init__(self, generator):
        self._gen = generator
        self._cache = []

    def uniform(self, n):
        if n < 1:
            raise ValueError("draw index n must be >= 1")
        while len(self._cache) < n:
            self._cache.extend(self._gen.random(_BLOCK).tolist())
        return self._cache[n - 1]


class RngStreamSet:
    """Independent substreams keyed by (source name, replication)."""

    def __init__(self, master_seed):
        seed = int(master_seed)
        if seed < 0 or seed >= 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        self.master_seed = seed
        self._streams = {}

    def stream(self, name, replication=0):
        key = (name, int(replication))
        s = self._streams.get(key)
        if s is None:
            ss = np.random.SeedSequence(self.master_seed, spawn_key=(_stream_key(name), int(replication)))
            s = VariateStream(np.random.Generator(np.random.PCG64(ss)))
            self._streams[key] = s
        return s


def _as_theta(theta, n_theta=None):
    if theta is None:
        return np.ones(n_theta or 1)
    return np.atleast_1d(np.asarray(theta, dtype=float))


def draw_lifetime(clock, n, streams, theta=None, replication=0):
    """Return the n-th lifetime of ``clock`` and its theta-gradient.

    Examples
    --------
    >>> streams = RngStreamSet(42)
    >>> v, dv = draw_lifetime(ClockStructure("c", Distribution.deterministic(2.0)), 1, streams)
    >>> v, dv.tolist()
    (2.0, [0.0])
    """
    theta = _as_theta(theta)
    dist = clock.sampler
    u = streams.stream(clock.name, replication).uniform(n) if dist.needs_randomness else 0.0
    w = dist.from_uniform(u, n)
    return clock.lifetime(w, theta), clock.lifetime_derivative(w, theta.size)


def draw_jump(process, n, streams, replication=0):
    """Return the n-th jump magnitude of ``process``."""
    dist = process.values
    u = streams.stream(process.name, replication).uniform(n) if dist.needs_randomness else 0.0
    return dist.from_uniform(u, n)


@dataclass
class DrawSource:
    """Per-simulation dispenser of named draws with running counters."""

    sources: dict
    streams: RngStreamSet
    theta: np.ndarray
    replication: int = 0
    counters: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = _as_theta(self.theta)
        self._zero = np.zeros(self.theta.size)

    def next(self, name):
        src = self.sources.get(name)
        if src is None:
            raise KeyError(f"unknown stochastic source {name!r}")
        n = self.counters.get(name, 0) + 1
        self.counters[name] = n
        if isinstance(src, ClockStructure):
            dist = src.sampler
            u = self.streams.stream(name, self.replication).uniform(n) if dist.needs_randomness else 0.0
            w = dist.from_uniform(u, n)
            return Draw(name, n, src.lifetime(w, self.theta), src.lifetime_derivative(w, self.theta.size), w)
        dist = src.values
        u = self.streams.stream(name, self.replication).uniform(n) if dist.needs_randomness else 0.0
        w = dist.from_uniform(u, n)
        return Draw(name, n, w, self._zero, w)

    def take(self, names):
        return {name: self.next(name) for name in names}


def redraw(source, draw, theta):
    """Re-evaluate ``draw`` at another theta keeping its base variate fixed."""
    if isinstance(source, ClockStructure):
        theta = _as_theta(theta)
        return Draw(draw.source, draw.index, source.lifetime(draw.base, theta),
                    source.lifetime_derivative(draw.base, theta.size), draw.base)
    return draw


SourceSpec = Union[ClockStructure, JumpProcess]
