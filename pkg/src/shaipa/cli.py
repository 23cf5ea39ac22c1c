"""Command-line entry point: ``shaipa {simulate,ipa,validate,optimize,classify}``.

Exit codes: 0 success, 2 configuration error, 3 assumption violation,
4 numerical failure (including a failed finite-difference validation).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .catalog import build_model
from .config import load_config
from .exceptions import AssumptionViolation, ConfigError, NumericalError, ShaipaError
from .fdcheck import validate_gradients
from .ipa import run_ipa_all
from .model import classify_event
from .optimizer import ObjectiveSpec, optimize
from .simulator import simulate

EXIT_OK, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_NUMERICAL = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="scenario JSON document")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the configured seed")
    common.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS,
                        help="directory for relative output paths (default: current directory)")
    common.add_argument("--dump-config", action="store_true", default=argparse.SUPPRESS,
                        help="print the normalized configuration and exit")
    p = _Parser(prog="shaipa", description="Simulate stochastic hybrid automata and estimate IPA gradients.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="simulate one sample path and write it as CSV")
    sub.add_parser("ipa", parents=[common], help="write the IPA gradient report (JSON)")
    sub.add_parser("validate", parents=[common], help="compare IPA with central finite differences")
    sub.add_parser("optimize", parents=[common], help="run projected stochastic gradient descent")
    sub.add_parser("classify", parents=[common], help="print the class of every event")
    return p


def _output(cfg, out_dir, key):
    path = cfg.outputs[key]
    return path if os.path.isabs(path) else os.path.join(out_dir, path)


def _write(path, text):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _model(cfg):
    try:
        model = build_model(cfg.model, cfg.model_params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model_params: {exc}") from None
    if cfg.model == "single-node-sfm" and float(cfg.model_params.get("x0", 0.0)) > cfg.theta[0]:
        raise ConfigError("x0 must not exceed the buffer capacity theta")
    if len(cfg.theta) != model.n_theta:
        raise ConfigError(f"model {cfg.model!r} expects {model.n_theta} theta entries, got {len(cfg.theta)}")
    return model


def cmd_simulate(cfg, out_dir="."):
    model = _model(cfg)
    path = simulate(model, cfg.theta, cfg.horizon, cfg.integrator, seed=cfg.seed)
    target = _output(cfg, out_dir, "path_csv")
    _write(target, path.to_csv(stride=cfg.outputs["stride"]))
    q, x = path.final_state
    print(f"{path.n_events} events on [0, {cfg.horizon:g}]; final mode {q}, state "
          f"[{', '.join(f'{v:.6g}' for v in x)}]; wrote {target}")
    return EXIT_OK


def ipa_document(cfg, model, path):
    reports = run_ipa_all(model, path)
    first = next(iter(reports.values()))
    return {
        "model": cfg.model,
        "seed": cfg.seed,
        "horizon": cfg.horizon,
        "theta": [float(v) for v in cfg.theta],
        "normalization": cfg.normalization,
        "num_events": path.n_events,
        "counters": first.counters,
        "costs": {name: {k: v for k, v in rep.to_dict().items() if k != "counters"}
                  for name, rep in reports.items()},
    }


def cmd_ipa(cfg, out_dir="."):
    model = _model(cfg)
    path = simulate(model, cfg.theta, cfg.horizon, cfg.integrator, seed=cfg.seed)
    doc = ipa_document(cfg, model, path)
    target = _output(cfg, out_dir, "report_json")
    _write(target, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    key = "dL_dtheta_raw" if cfg.normalization == "raw" else "dL_dtheta_normalized"
    for name, rep in doc["costs"].items():
        print(f"{name}: d/dtheta = [{', '.join(f'{v:.10g}' for v in rep[key])}] ({cfg.normalization})")
    print(f"wrote {target}")
    return EXIT_OK


def cmd_validate(cfg, out_dir="."):
    model = _model(cfg)
    report = validate_gradients(model, cfg.theta, cfg.horizon, cfg.validate, cfg.integrator, seed=cfg.seed)
    target = _output(cfg, out_dir, "validate_csv")
    _write(target, report.to_csv())
    print(report.summary())
    print(f"wrote {target}")
    if not report.passed:
        for r in report.failures[:5]:
            print(f"  replication {r.replication} {r.cost}[{r.coord}]: ipa {r.ipa:.10g} fd {r.fd:.10g} "
                  f"rel err {r.rel_err:.3g}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_optimize(cfg, out_dir="."):
    model = _model(cfg)
    o = cfg.optimize
    objective = ObjectiveSpec(o.objective_weights, cfg.normalization)
    trace = optimize(model, objective, o.iters, o.replications, o.step_rule, seed=cfg.seed, theta0=o.theta0,
                     bounds=o.bounds, horizon=cfg.horizon, config=cfg.integrator, grad_tol=o.grad_tol)
    target = _output(cfg, out_dir, "trace_csv")
    _write(target, trace.to_csv())
    last = trace.iterations[-1]
    print(f"final theta [{', '.join(f'{v:.10g}' for v in trace.theta_final)}]; "
          f"last estimated J {last.J_hat:.10g}; stop: {trace.stop_reason}; wrote {target}")
    return EXIT_OK


def cmd_classify(cfg, out_dir="."):
    model = _model(cfg)
    for g in sorted(model.guards, key=lambda g: g.event_id):
        label = f" ({g.name})" if g.name else ""
        print(f"E{g.event_id}{label}: {classify_event(model, g.event_id, np.asarray(cfg.theta)).value}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "ipa": cmd_ipa,
    "validate": cmd_validate,
    "optimize": cmd_optimize,
    "classify": cmd_classify,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    opts = vars(args)
    try:
        if "config" not in opts:
            raise ConfigError("--config PATH is required")
        cfg = load_config(opts["config"])
        if "seed" in opts:
            if opts["seed"] < 0:
                raise ConfigError("--seed must be non-negative")
            cfg = cfg.with_seed(opts["seed"])
        if opts.get("dump_config"):
            print(cfg.dumps())
            return EXIT_OK
        return COMMANDS[args.command](cfg, opts.get("out", "."))
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"configuration error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ShaipaError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
