"""Built-in models addressable by name."""
from ..exceptions import ConfigError
from .buffer import (
    build_chattering_switch,
    build_parametric_rate_buffer,
    build_reset_test,
    build_two_mode_buffer,
)
from .sfm import (
    NepFpStructure,
    SfmParams,
    analyze_nep_fp,
    build_single_node_sfm,
    closed_form_loss_grad,
    closed_form_workload_grad,
)

CATALOG = {
    "single-node-sfm": lambda p: build_single_node_sfm(SfmParams.from_dict(p or {})),
    "two-mode-buffer": build_two_mode_buffer,
    "parametric-rate-buffer": build_parametric_rate_buffer,
    "reset-test": build_reset_test,
    "chattering-switch": build_chattering_switch,
}


def build_model(name, params=None):
    """Instantiate catalog model ``name`` from a plain parameter mapping."""
    try:
        builder = CATALOG[name]
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(CATALOG)}") from None
    if params is not None and not isinstance(params, dict):
        raise ConfigError("model_params must be an object")
    return builder(params)


__all__ = [
    "CATALOG",
    "build_model",
    "SfmParams",
    "NepFpStructure",
    "build_single_node_sfm",
    "analyze_nep_fp",
    "closed_form_workload_grad",
    "closed_form_loss_grad",
    "build_two_mode_buffer",
    "build_parametric_rate_buffer",
    "build_reset_test",
    "build_chattering_switch",
]
