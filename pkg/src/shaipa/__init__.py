"""Simulation and infinitesimal perturbation analysis for stochastic hybrid automata."""
from .exceptions import (
    AssumptionViolation,
    ChainLengthError,
    ConfigError,
    NumericalError,
    RateBalanceError,
    ShaipaError,
    SimultaneousEventsError,
    TangentialContactError,
    UnboundedFlowError,
)
from .ipa import GradientReport, propagate, run_ipa, run_ipa_all
from .model import AutomatonModel, EventClass, classify_event, validate_model
from .simulator import IntegratorConfig, SamplePath, simulate
from .stochastic import ClockStructure, Distribution, JumpProcess, RngStreamSet

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolation",
    "AutomatonModel",
    "ChainLengthError",
    "ClockStructure",
    "ConfigError",
    "Distribution",
    "EventClass",
    "GradientReport",
    "IntegratorConfig",
    "JumpProcess",
    "NumericalError",
    "RateBalanceError",
    "RngStreamSet",
    "SamplePath",
    "ShaipaError",
    "SimultaneousEventsError",
    "TangentialContactError",
    "UnboundedFlowError",
    "classify_event",
    "propagate",
    "run_ipa",
    "run_ipa_all",
    "simulate",
    "validate_model",
]
