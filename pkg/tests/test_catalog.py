import numpy as np
import pytest

from conftest import COARSE
from shaipa import simulate
from shaipa.catalog import (
    CATALOG,
    NepFpStructure,
    SfmParams,
    analyze_nep_fp,
    build_model,
    build_single_node_sfm,
    closed_form_loss_grad,
    closed_form_workload_grad,
)
from shaipa.exceptions import ConfigError
from shaipa.ipa import propagate, run_ipa
from shaipa.model import validate_model


def test_default_sfm_shape(sfm):
    assert validate_model(sfm).ok
    assert (sfm.n_events, sfm.n_x, sfm.n_modes) == (5, 5, 3)
    assert set(sfm.costs) == {"workload", "loss"}


def test_full_start():
    m = build_single_node_sfm(SfmParams(alpha0=2.0, beta0=1.0, alpha_jumps=None, beta_jumps=None, x0=1.0))
    path = simulate(m, [1.0], 2.0, COARSE)
    assert path.segments[0].mode == 2


def test_deterministic_structure(det_sfm):
    s = analyze_nep_fp(simulate(det_sfm, [1.0], 3.0, COARSE))
    assert s.N == 1 and s.M == [1] and s.N_F == 1
    assert s.fps[0][0][0] == pytest.approx(1.0)
    assert s.neps[0][1] == 3.0
    assert closed_form_workload_grad(s, 3.0) == pytest.approx(2.0)
    assert closed_form_loss_grad(s) == -1.0


def test_path_never_full():
    m = build_single_node_sfm(SfmParams(alpha0=2.0, beta0=1.0, alpha_jumps=None, beta_jumps=None))
    s = analyze_nep_fp(simulate(m, [10.0], 3.0, COARSE))
    assert s.N_F == 0 and s.M == [0]
    assert closed_form_workload_grad(s) == 0.0
    assert closed_form_loss_grad(s) == 0.0


def test_never_busy():
    m = build_single_node_sfm(SfmParams(alpha0=0.5, beta0=1.0, alpha_jumps=None, beta_jumps=None))
    assert analyze_nep_fp(simulate(m, [1.0], 3.0, COARSE)).N == 0


def test_closed_forms_by_formula():
    s = NepFpStructure([(0.0, 2.0), (3.0, 5.5)], [[], [(4.0, 5.5)]], [[], [True]], 6.0)
    assert closed_form_workload_grad(s) == pytest.approx(1.5)
    three = NepFpStructure([(0, 1), (2, 3), (4, 5)], [[(0.5, 1)], [(2.5, 3)], [(4.5, 5)]],
                           [[True], [True], [True]], 6.0)
    assert three.N_F == 3
    assert closed_form_loss_grad(three) == -3.0


def test_structure_rejects_other_models():
    m = build_model("two-mode-buffer")
    with pytest.raises(ValueError):
        analyze_nep_fp(simulate(m, [1.0], 2.0, COARSE))


def test_structure_nesting(sfm):
    for rep in range(5):
        s = analyze_nep_fp(simulate(sfm, [1.0], 50.0, COARSE, seed=2, replication=rep))
        for (a, b), fps in zip(s.neps, s.fps):
            assert a < b
            for c, d in fps:
                assert a <= c <= d <= b


def test_content_sensitivity_is_zero_or_one(sfm):
    for rep in range(5):
        path = simulate(sfm, [1.2], 50.0, COARSE, seed=4, replication=rep)
        tr = propagate(sfm, path)
        for xs in tr.segments:
            v = xs[:, 2, 0]
            assert np.all((np.abs(v) < 1e-12) | (np.abs(v - 1) < 1e-12))


def test_estimates_ignore_how_rates_evolve():
    # same rate levels realized by different processes give the same structure and gradients
    a = build_single_node_sfm(SfmParams(alpha0=2.0, beta0=1.0, alpha_jumps=None, beta_jumps=None))
    b = build_single_node_sfm(SfmParams(alpha0=2.0, beta0=1.0, alpha_jumps=None, beta_jumps={
        "clock": {"kind": "deterministic", "value": 1.7}, "values": {"kind": "deterministic", "value": 1.0}}))
    pa, pb = simulate(a, [1.0], 3.0, COARSE), simulate(b, [1.0], 3.0, COARSE)
    assert analyze_nep_fp(pa).to_dict() == analyze_nep_fp(pb).to_dict()
    assert run_ipa(a, pa, "workload").dL_dtheta == pytest.approx(run_ipa(b, pb, "workload").dL_dtheta)


def test_two_mode_buffer_without_drift_is_theta_free():
    m = build_model("two-mode-buffer")
    path = simulate(m, [1.0], 20.0, COARSE, seed=1)
    assert path.n_events > 0
    assert np.all(run_ipa(m, path).dL_dtheta == 0.0)


def test_parametric_rate_sensitivity_grows_linearly():
    m = build_model("parametric-rate-buffer", {"c": 2.0})
    path = simulate(m, [1.0], 0.4, COARSE)
    tr = propagate(m, path)
    seg, xs = path.segments[0], tr.segments[0]
    assert np.allclose(xs[:, 0, 0], 2.0 * seg.t)


@pytest.mark.parametrize("bad", [
    {"alpha0": -1.0},
    {"x0": -0.5},
    {"capacity": 2.0},
    {"alpha_jumps": {"clock": {"kind": "exponential", "rate": 1.0}}},
])
def test_invalid_sfm_params(bad):
    with pytest.raises(ConfigError):
        build_model("single-node-sfm", bad)


def test_unknown_model():
    with pytest.raises(ConfigError):
        build_model("tandem")


def test_catalog_names():
    assert {"single-node-sfm", "two-mode-buffer", "parametric-rate-buffer", "reset-test"} <= set(CATALOG)
