import io

import numpy as np
import pytest

from conftest import COARSE
from shaipa.exceptions import ConfigError, NumericalError
from shaipa.optimizer import ObjectiveSpec, StepRule, estimate_objective, optimize, sgd_step

BOX = [(0.2, 5.0)]


def test_sgd_step_examples():
    assert sgd_step([1.0], [2.0], 0.1, BOX)[0] == pytest.approx(0.8)
    assert sgd_step([0.25], [2.0], 0.1, BOX)[0] == 0.2
    assert sgd_step([1.3], [0.0], 0.1, BOX)[0] == 1.3


def test_sgd_step_rejects_nan():
    with pytest.raises(NumericalError):
        sgd_step([1.0], [np.nan], 0.1, BOX)


def test_step_rules():
    assert StepRule("harmonic", 0.5)(4) == 0.125
    assert StepRule("constant", 0.5)(4) == 0.5
    with pytest.raises(ConfigError):
        StepRule("adam")
    with pytest.raises(ConfigError):
        StepRule("constant", -1.0)


def test_objective_validation(det_sfm):
    with pytest.raises(ConfigError):
        ObjectiveSpec({})
    with pytest.raises(ConfigError):
        ObjectiveSpec({"workload": 1.0}, "per-hour")
    with pytest.raises(ConfigError):
        ObjectiveSpec({"delay": 1.0}).check_model(det_sfm)


def test_objective_combines_costs(det_sfm):
    J, g = estimate_objective(det_sfm, ObjectiveSpec({"workload": 1.0, "loss": 10.0}), [1.0], 3.0, 1, COARSE)
    assert J == pytest.approx(2.5 + 20.0)
    assert g[0] == pytest.approx(2.0 - 10.0)
    Jn, gn = estimate_objective(det_sfm, ObjectiveSpec({"workload": 1.0}, "per-T"), [1.0], 3.0, 1, COARSE)
    assert Jn == pytest.approx(2.5 / 3) and gn[0] == pytest.approx(2.0 / 3)


def test_monotone_objective_reaches_lower_bound(det_sfm):
    tr = optimize(det_sfm, ObjectiveSpec({"workload": 1.0}), 200, 1, StepRule("harmonic", 0.1),
                  theta0=[1.0], bounds=[(0.2, 2.0)], horizon=3.0, config=COARSE)
    assert tr.theta_final[0] == pytest.approx(0.2)


def test_zero_weights_keep_theta(det_sfm):
    tr = optimize(det_sfm, ObjectiveSpec({"workload": 0.0}), 5, 1, StepRule(), theta0=[1.3], bounds=BOX,
                  horizon=3.0, config=COARSE)
    assert all(r.theta[0] == 1.3 for r in tr.iterations)
    assert all(r.grad[0] == 0.0 for r in tr.iterations)


def test_zero_step_keeps_theta(sfm):
    tr = optimize(sfm, ObjectiveSpec({"workload": 1.0}), 1, 2, StepRule("constant", 0.0), theta0=[1.7],
                  bounds=BOX, horizon=10.0, config=COARSE)
    assert tr.theta_final[0] == 1.7


def test_degenerate_box_pins_theta(sfm):
    tr = optimize(sfm, ObjectiveSpec({"workload": 1.0, "loss": 10.0}), 10, 2, StepRule(), theta0=[1.0],
                  bounds=[(1.0, 1.0)], horizon=10.0, config=COARSE)
    assert all(r.theta[0] == 1.0 for r in tr.iterations)
    assert tr.theta_final[0] == 1.0


def test_iterates_stay_in_box_and_trace_is_deterministic(sfm):
    kw = dict(theta0=[0.3], bounds=[(0.2, 0.6)], horizon=10.0, config=COARSE, seed=5)
    a = optimize(sfm, ObjectiveSpec({"workload": 1.0, "loss": 10.0}), 15, 2, StepRule("constant", 0.2), **kw)
    b = optimize(sfm, ObjectiveSpec({"workload": 1.0, "loss": 10.0}), 15, 2, StepRule("constant", 0.2), **kw)
    assert all(0.2 <= r.theta[0] <= 0.6 for r in a.iterations)
    fa, fb = io.StringIO(), io.StringIO()
    a.to_csv(fa)
    b.to_csv(fb)
    assert fa.getvalue() == fb.getvalue()
    assert fa.getvalue().splitlines()[0] == "iter,theta_0,J_hat,grad_0,step"


def test_grad_tol_stops_early(det_sfm):
    tr = optimize(det_sfm, ObjectiveSpec({"workload": 0.0}), 50, 1, StepRule(), theta0=[1.0], bounds=BOX,
                  horizon=3.0, config=COARSE, grad_tol=1e-6)
    assert tr.converged and tr.stop_reason == "grad_tol"
    assert len(tr.iterations) == 1


def test_bad_arguments(det_sfm):
    obj = ObjectiveSpec({"workload": 1.0})
    with pytest.raises(ConfigError):
        optimize(det_sfm, obj, 0, 1, StepRule())
    with pytest.raises(ConfigError):
        optimize(det_sfm, obj, 1, 1, StepRule(), bounds=[(2.0, 1.0)])
    with pytest.raises(ConfigError):
        optimize(det_sfm, obj, 1, 1, StepRule(), theta0=[1.0, 2.0])


def test_error_carries_partial_trace():
    from shaipa.catalog import build_model

    m = build_model("chattering-switch")
    with pytest.raises(Exception) as info:
        optimize(m, ObjectiveSpec({next(iter(m.costs)): 1.0}), 3, 1, StepRule(), theta0=[1.0], horizon=3.0,
                 config=COARSE)
    assert info.value.partial_trace.stop_reason == "error"
