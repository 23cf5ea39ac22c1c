import io

import pytest

from conftest import COARSE
from shaipa.exceptions import ConfigError
from shaipa.fdcheck import FdConfig, FdRow, monte_carlo_check, validate_gradients


def test_deterministic_sfm_fd_agrees(det_sfm):
    rep = validate_gradients(det_sfm, [1.0], 3.0, FdConfig(h=1e-5, replications=1), COARSE)
    assert rep.passed
    assert rep.unchanged_fraction == 1.0
    assert rep.max_rel_err < 1e-6


def test_stochastic_sfm_crn(sfm):
    rep = validate_gradients(sfm, [1.5], 50.0, FdConfig(h=1e-5, replications=20), COARSE, seed=3)
    assert rep.unchanged_fraction >= 0.8
    assert rep.passed, rep.summary()


def test_report_csv(det_sfm):
    rep = validate_gradients(det_sfm, [1.0], 3.0, FdConfig(replications=1), COARSE)
    buf = io.StringIO()
    rep.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "replication,cost,coord,ipa,fd,abs_err,rel_err,seq_changed"
    assert len(lines) == 3


def test_relative_error_floor():
    row = FdRow(0, "x", 0, 1e-12, 0.0, False)
    assert row.rel_err == pytest.approx(1e-4)


@pytest.mark.parametrize("kw", [{"h": 0.0}, {"mode": "paired"}, {"replications": 0}, {"min_unchanged": 1.5}])
def test_fd_config_validation(kw):
    with pytest.raises(ConfigError):
        FdConfig(**kw)


def test_monte_carlo_check_small(sfm):
    res = monte_carlo_check(sfm, [1.5], 20.0, n_ipa=40, n_fd=40, h=0.05, config=COARSE, seed=1)
    assert {(r.cost, r.coord) for r in res} == {("workload", 0), ("loss", 0)}
    for r in res:
        assert r.stderr > 0
        assert abs(r.z) < 5
