import numpy as np
import pytest

from shaipa.stochastic import (
    ClockStructure,
    Distribution,
    DrawSource,
    JumpProcess,
    RngStreamSet,
    draw_jump,
    draw_lifetime,
    redraw,
)


def test_deterministic_clock_has_zero_derivative():
    v, dv = draw_lifetime(ClockStructure("c", Distribution.deterministic(2.0)), 5, RngStreamSet(1))
    assert v == 2.0
    assert np.array_equal(dv, [0.0])


def test_exponential_draw_is_reproducible():
    clock = ClockStructure("c", Distribution.exponential(1.0))
    v1, _ = draw_lifetime(clock, 1, RngStreamSet(42))
    v2, _ = draw_lifetime(clock, 1, RngStreamSet(42))
    assert v1 > 0
    assert v1 == v2


def test_scaled_clock_derivative_is_base_variate():
    clock = ClockStructure("c", Distribution.uniform(0.5, 1.5), scale_index=0)
    theta = np.array([2.0, 7.0])
    v, dv = draw_lifetime(clock, 3, RngStreamSet(5), theta)
    w = dv[0]
    assert 0.5 <= w <= 1.5
    assert v == pytest.approx(2.0 * w)
    assert dv[1] == 0.0


def test_empirical_jump_indexing():
    proc = JumpProcess("j", Distribution.empirical([1.5, 0.5, 2.0]), ClockStructure("c", Distribution.deterministic(1.0)))
    assert draw_jump(proc, 2, RngStreamSet(0)) == 0.5
    assert draw_jump(proc, 4, RngStreamSet(0)) == 1.5


def test_uniform_jump_in_support():
    proc = JumpProcess("j", Distribution.uniform(0.0, 4.0), ClockStructure("c", Distribution.exponential(1.0)))
    streams = RngStreamSet(3)
    vals = [draw_jump(proc, n, streams) for n in range(1, 200)]
    assert all(0.0 <= v <= 4.0 for v in vals)


def test_deterministic_jump():
    proc = JumpProcess("j", Distribution.deterministic(1.0), ClockStructure("c", Distribution.deterministic(1.0)))
    assert draw_jump(proc, 7, RngStreamSet(0)) == 1.0


@pytest.mark.parametrize("bad", [
    lambda: Distribution.uniform(2.0, 2.0),
    lambda: Distribution.exponential(0.0),
    lambda: Distribution.empirical([]),
    lambda: Distribution("gamma", (1.0,)),
])
def test_misconfigured_samplers_rejected(bad):
    with pytest.raises(ValueError):
        bad()


def test_clock_support_must_be_positive():
    with pytest.raises(ValueError):
        ClockStructure("c", Distribution.uniform(0.0, 1.0))


def test_draw_index_starts_at_one():
    with pytest.raises(ValueError):
        RngStreamSet(0).stream("c").uniform(0)


def test_streams_independent():
    s = RngStreamSet(11)
    a = np.array([s.stream("alpha_clock").uniform(n) for n in range(1, 10_001)])
    b = np.array([s.stream("beta_clock").uniform(n) for n in range(1, 10_001)])
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
    c = np.array([s.stream("alpha_clock", 1).uniform(n) for n in range(1, 10_001)])
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.05


def test_random_access_matches_sequential():
    s1, s2 = RngStreamSet(9).stream("x"), RngStreamSet(9).stream("x")
    seq = [s1.uniform(n) for n in range(1, 150)]
    assert s2.uniform(130) == seq[129]


def test_distribution_dict_round_trip():
    for d in (Distribution.exponential(2.0), Distribution.uniform(0.5, 2.5), Distribution.deterministic(1.0),
              Distribution.empirical([1.0, 2.0])):
        assert Distribution.from_dict(d.to_dict()) == d
    with pytest.raises(ValueError):
        Distribution.from_dict({"kind": "uniform", "a": 0, "b": 1, "c": 3})


def test_draw_source_counts_per_name_and_redraw():
    clock = ClockStructure("c", Distribution.uniform(0.5, 1.5), scale_index=0)
    src = DrawSource({"c": clock}, RngStreamSet(4), [2.0])
    d1, d2 = src.next("c"), src.next("c")
    assert (d1.index, d2.index) == (1, 2)
    moved = redraw(clock, d1, [3.0])
    assert moved.value == pytest.approx(3.0 * d1.base)
    assert moved.grad[0] == d1.base
