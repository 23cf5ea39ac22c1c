"""Scenario configuration documents (JSON)."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

from .exceptions import ConfigError
from .fdcheck import FdConfig
from .optimizer import NORMALIZATIONS, ObjectiveSpec, StepRule
from .simulator import IntegratorConfig

__all__ = ["ScenarioConfig", "OptimizeSettings", "load_config", "parse_config"]

OUTPUT_DEFAULTS = {
    "path_csv": "path.csv",
    "report_json": "ipa.json",
    "validate_csv": "validate.csv",
    "trace_csv": "trace.csv",
    "stride": 1,
}


def _reject_unknown(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _number(v, where, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where} must be a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v) or (positive and v <= 0):
        raise ConfigError(f"{where} must be {'positive and ' if positive else ''}finite, got {v!r}")
    return v


def _integer(v, where, minimum=0):
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{where} must be an integer >= {minimum}, got {v!r}")
    return v


@dataclass(frozen=True)
class OptimizeSettings:
    iters: int = 200
    replications: int = 10
    step_rule: StepRule = field(default_factory=StepRule)
    bounds: tuple = ()
    weights: tuple = (("workload", 1.0),)
    theta0: tuple = ()
    grad_tol: float = None

    @property
    def objective_weights(self):
        return dict(self.weights)

    def to_dict(self):
        return {
            "iters": self.iters,
            "replications": self.replications,
            "step_rule": self.step_rule.to_dict(),
            "bounds": [list(b) for b in self.bounds],
            "weights": dict(self.weights),
            "theta0": list(self.theta0),
            "grad_tol": self.grad_tol,
        }

    @classmethod
    def from_dict(cls, d, theta):
        keys = {f.name for f in fields(cls)}
        _reject_unknown(d, keys, "optimize")
        iters = _integer(d.get("iters", 200), "optimize.iters", 1)
        reps = _integer(d.get("replications", 10), "optimize.replications", 1)
        sr = d.get("step_rule", {"kind": "harmonic", "c": 0.1})
        _reject_unknown(sr, {"kind", "c"}, "optimize.step_rule")
        rule = StepRule(sr.get("kind", "harmonic"), _number(sr.get("c", 0.1), "optimize.step_rule.c"))
        bounds = d.get("bounds") or [[-math.inf, math.inf]] * len(theta)
        if len(bounds) != len(theta) or any(not isinstance(b, (list, tuple)) or len(b) != 2 for b in bounds):
            raise ConfigError("optimize.bounds must hold one [low, high] pair per theta coordinate")
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if any(lo > hi for lo, hi in bounds):
            raise ConfigError("optimize.bounds: low must not exceed high")
        weights = d.get("weights", {"workload": 1.0})
        ObjectiveSpec(weights)
        theta0 = d.get("theta0") or list(theta)
        if len(theta0) != len(theta):
            raise ConfigError("optimize.theta0 must match theta in length")
        theta0 = tuple(_number(v, "optimize.theta0") for v in theta0)
        gt = d.get("grad_tol")
        gt = None if gt is None else _number(gt, "optimize.grad_tol", positive=True)
        return cls(iters, reps, rule, bounds, tuple(sorted((str(k), float(v)) for k, v in weights.items())), theta0, gt)


@dataclass(frozen=True)
class ScenarioConfig:
    """A complete, reproducible run description.

    ``validate`` and ``optimize`` carry the settings of those subcommands;
    omitted blocks take their defaults.
    """

    model: str
    theta: tuple
    horizon: float
    model_params: dict = field(default_factory=dict)
    seed: int = 0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    outputs: dict = field(default_factory=lambda: dict(OUTPUT_DEFAULTS))
    normalization: str = "raw"
    validate: FdConfig = field(default_factory=FdConfig)
    optimize: OptimizeSettings = None

    def __post_init__(self):
        if self.optimize is None:
            object.__setattr__(self, "optimize", OptimizeSettings.from_dict({}, self.theta))

    def to_dict(self):
        return {
            "model": self.model,
            "model_params": self.model_params,
            "theta": list(self.theta),
            "horizon": self.horizon,
            "seed": self.seed,
            "integrator": asdict(self.integrator),
            "outputs": dict(self.outputs),
            "normalization": self.normalization,
            "validate": self.validate.to_dict(),
            "optimize": self.optimize.to_dict(),
        }

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)

    def with_seed(self, seed):
        d = self.to_dict()
        d["seed"] = seed
        return parse_config(d)


def parse_config(d):
    """Validate a decoded document and build a :class:`ScenarioConfig`."""
    top = {"model", "model_params", "theta", "horizon", "seed", "integrator", "outputs", "normalization",
           "validate", "optimize"}
    _reject_unknown(d, top, "config")
    for key in ("model", "theta", "horizon"):
        if key not in d:
            raise ConfigError(f"config is missing required key {key!r}")
    if not isinstance(d["model"], str):
        raise ConfigError("model must be a catalog name")
    theta = d["theta"]
    if isinstance(theta, (int, float)) and not isinstance(theta, bool):
        theta = [theta]
    if not isinstance(theta, list) or not theta:
        raise ConfigError("theta must be a non-empty list of numbers")
    theta = tuple(_number(v, "theta") for v in theta)
    horizon = _number(d["horizon"], "horizon", positive=True)
    seed = _integer(d.get("seed", 0), "seed")
    if seed >= 2 ** 64:
        raise ConfigError("seed must fit in 64 bits")
    params = d.get("model_params", {})
    if not isinstance(params, dict):
        raise ConfigError("model_params must be an object")
    integ = d.get("integrator", {})
    _reject_unknown(integ, {f.name for f in fields(IntegratorConfig)}, "integrator")
    try:
        integrator = IntegratorConfig(**integ)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"integrator: {exc}") from None
    outputs = d.get("outputs", {})
    _reject_unknown(outputs, OUTPUT_DEFAULTS, "outputs")
    outputs = {**OUTPUT_DEFAULTS, **outputs}
    outputs["stride"] = _integer(outputs["stride"], "outputs.stride", 1)
    for k, v in outputs.items():
        if k != "stride" and not isinstance(v, str):
            raise ConfigError(f"outputs.{k} must be a path string")
    norm = d.get("normalization", "raw")
    if norm not in NORMALIZATIONS:
        raise ConfigError(f"normalization must be one of {NORMALIZATIONS}")
    val = d.get("validate", {})
    _reject_unknown(val, {f.name for f in fields(FdConfig)}, "validate")
    for k in ("h", "tolerance", "min_unchanged"):
        if k in val:
            _number(val[k], f"validate.{k}")
    if "replications" in val:
        _integer(val["replications"], "validate.replications", 1)
    fd = FdConfig(**val)
    opt = OptimizeSettings.from_dict(d.get("optimize", {}), theta)
    return ScenarioConfig(d["model"], theta, horizon, params, seed, integrator, outputs, norm, fd, opt)


def load_config(path):
    """Read and validate a UTF-8 JSON scenario document."""
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(d)
