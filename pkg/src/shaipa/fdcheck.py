"""Finite-difference checks of IPA gradients.

With common random numbers (``mode="crn"``) the perturbed paths replay
the base path's streams, so a central difference isolates the effect of
``theta``. Seeds where a perturbation changes the event sequence are
flagged and excluded from the pass criterion: there IPA and the finite
difference estimate different one-sided quantities.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .ipa import run_ipa_all, sample_cost
from .simulator import simulate

__all__ = ["FdConfig", "FdRow", "FdReport", "validate_gradients", "MonteCarloCheck", "monte_carlo_check"]

# Replication offset for the independent-stream finite differences.
_INDEPENDENT_OFFSET = 1_000_003


@dataclass(frozen=True)
class FdConfig:
    """Finite-difference settings.

    Parameters
    ----------
    h : float
        Central-difference half width.
    mode : {"crn", "independent"}
        Replay the base streams on both sides, or use fresh ones.
    replications : int
        Number of seeds (replication indices ``0..replications-1``).
    tolerance : float
        Relative-error bound on unchanged-sequence seeds.
    min_unchanged : float
        Smallest acceptable fraction of unchanged-sequence seeds.
    """

    h: float = 1e-5
    mode: str = "crn"
    replications: int = 100
    tolerance: float = 1e-3
    min_unchanged: float = 0.8

    def __post_init__(self):
        if not (isinstance(self.h, (int, float)) and math.isfinite(self.h) and self.h > 0):
            raise ConfigError(f"finite-difference step h must be positive, got {self.h!r}")
        if self.mode not in ("crn", "independent"):
            raise ConfigError(f"mode must be 'crn' or 'independent', got {self.mode!r}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError("replications must be an integer >= 1")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if not 0 <= self.min_unchanged <= 1:
            raise ConfigError("min_unchanged must lie in [0, 1]")

    def to_dict(self):
        return {"h": self.h, "mode": self.mode, "replications": self.replications,
                "tolerance": self.tolerance, "min_unchanged": self.min_unchanged}


@dataclass(frozen=True)
class FdRow:
    replication: int
    cost: str
    coord: int
    ipa: float
    fd: float
    seq_changed: bool

    @property
    def abs_err(self):
        return abs(self.ipa - self.fd)

    @property
    def rel_err(self):
        return self.abs_err / max(abs(self.fd), 1e-8)


@dataclass
class FdReport:
    rows: list = field(default_factory=list)
    tolerance: float = 1e-3
    min_unchanged: float = 0.8

    @property
    def replications(self):
        return sorted({r.replication for r in self.rows})

    @property
    def unchanged_fraction(self):
        reps = {}
        for r in self.rows:
            reps[r.replication] = reps.get(r.replication, False) or r.seq_changed
        return sum(1 for c in reps.values() if not c) / len(reps) if reps else 0.0

    @property
    def max_rel_err(self):
        errs = [r.rel_err for r in self.rows if not r.seq_changed]
        return max(errs) if errs else float("nan")

    @property
    def failures(self):
        return [r for r in self.rows if not r.seq_changed and not r.rel_err < self.tolerance]

    @property
    def passed(self):
        return not self.failures and self.unchanged_fraction >= self.min_unchanged

    def to_csv(self, fh=None):
        out = io.StringIO() if fh is None else fh
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["replication", "cost", "coord", "ipa", "fd", "abs_err", "rel_err", "seq_changed"])
        for r in self.rows:
            w.writerow([r.replication, r.cost, r.coord, repr(float(r.ipa)), repr(float(r.fd)),
                        repr(float(r.abs_err)), repr(float(r.rel_err)), int(r.seq_changed)])
        return out.getvalue() if fh is None else None

    def summary(self):
        return (f"{len(self.replications)} replications, {self.unchanged_fraction:.0%} with unchanged event "
                f"sequence, max relative error {self.max_rel_err:.3g} (tolerance {self.tolerance:g}): "
                + ("PASS" if self.passed else "FAIL"))


def validate_gradients(model, theta, horizon, fd=None, config=None, seed=0, costs=None, replications=None):
    """Compare IPA with central finite differences, per replication and coordinate."""
    fd = fd or FdConfig()
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    costs = list(model.costs) if costs is None else list(costs)
    reps = range(fd.replications) if replications is None else replications
    report = FdReport(tolerance=fd.tolerance, min_unchanged=fd.min_unchanged)
    for rep in reps:
        base = simulate(model, theta, horizon, config, seed=seed, replication=rep)
        ipa = run_ipa_all(model, base)
        seq = base.event_sequence
        side_rep = rep if fd.mode == "crn" else rep + _INDEPENDENT_OFFSET
        for j in range(theta.size):
            e = np.zeros_like(theta)
            e[j] = fd.h
            plus = simulate(model, theta + e, horizon, config, seed=seed, replication=side_rep)
            minus = simulate(model, theta - e, horizon, config, seed=seed,
                             replication=side_rep + (_INDEPENDENT_OFFSET if fd.mode == "independent" else 0))
            changed = plus.event_sequence != seq or minus.event_sequence != seq
            for c in costs:
                d = (sample_cost(model, plus, c) - sample_cost(model, minus, c)) / (2 * fd.h)
                report.rows.append(FdRow(rep, c, j, float(ipa[c].dL_dtheta[j]), d, changed))
    return report


@dataclass
class MonteCarloCheck:
    """Mean IPA gradient against a central difference of the mean cost."""

    cost: str
    coord: int
    ipa_mean: float
    ipa_stderr: float
    fd_mean: float
    fd_stderr: float

    @property
    def stderr(self):
        return math.hypot(self.ipa_stderr, self.fd_stderr)

    @property
    def z(self):
        return (self.ipa_mean - self.fd_mean) / self.stderr if self.stderr > 0 else 0.0


def monte_carlo_check(model, theta, horizon, n_ipa=1000, n_fd=1000, h=0.05, config=None, seed=0, costs=None):
    """Unbiasedness check over independent replications.

    The IPA mean uses replications ``0..n_ipa-1``; the finite difference
    pairs ``theta +- h`` on replications ``n_ipa..n_ipa+n_fd-1`` (common
    random numbers within a pair). The standard error of the difference
    combines both sample standard errors.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    costs = list(model.costs) if costs is None else list(costs)
    grads = {c: [] for c in costs}
    for rep in range(n_ipa):
        reports = run_ipa_all(model, simulate(model, theta, horizon, config, seed=seed, replication=rep))
        for c in costs:
            grads[c].append(reports[c].dL_dtheta)
    out = []
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        diffs = {c: [] for c in costs}
        for rep in range(n_ipa, n_ipa + n_fd):
            plus = simulate(model, theta + e, horizon, config, seed=seed, replication=rep)
            minus = simulate(model, theta - e, horizon, config, seed=seed, replication=rep)
            for c in costs:
                diffs[c].append((sample_cost(model, plus, c) - sample_cost(model, minus, c)) / (2 * h))
        for c in costs:
            g = np.array(grads[c])[:, j]
            d = np.array(diffs[c])
            out.append(MonteCarloCheck(c, j, float(g.mean()), float(g.std(ddof=1) / math.sqrt(len(g))),
                                       float(d.mean()), float(d.std(ddof=1) / math.sqrt(len(d)))))
    return out
