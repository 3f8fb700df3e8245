from __future__ import annotations

import pytest

from polylike.core import PolynomialFamily, RealInterval
from polylike.errors import HighReturn, PeriodicAttractor
from polylike.returns import (
    classify_return,
    critical_orbit_escapes,
    detect_renormalization,
    fibonacci_nice_points,
    fibonacci_return_times,
    first_entry_time,
    first_return_map,
    generalized_first_return,
    is_nice,
    nice_interval,
    nice_point_sequence,
    renorm_low,
)
from polylike.search import cascade_parameters

from conftest import FEIGENBAUM_C, FIBONACCI_C


def test_escaping_parameter_has_no_levels():
    f = PolynomialFamily(2, 0.5)
    assert critical_orbit_escapes(f)
    assert detect_renormalization(f, 8) == []


def test_basilica_period_two_interval():
    lv = detect_renormalization(PolynomialFamily(2, -1.0), 4)
    assert [l.period for l in lv] == [2]
    # f^2 fixes the golden-ratio endpoints
    assert lv[0].endpoint == pytest.approx((5 ** 0.5 - 1) / 2, abs=1e-14)


def test_feigenbaum_periods_and_half_period_flags():
    lv = detect_renormalization(PolynomialFamily(2, FEIGENBAUM_C), 64)
    assert [l.period for l in lv] == [2, 4, 8, 16, 32, 64]
    assert [l.half_period for l in lv] == [False, True, True, True, True, True]
    ends = [l.endpoint for l in lv]
    assert ends == sorted(ends, reverse=True)


def test_airplane_period_three():
    lv = detect_renormalization(PolynomialFamily(2, -1.7548776662466927), 6)
    assert [l.period for l in lv] == [3]


def test_cascade_param_periods_listed():
    c = cascade_parameters(2, 6)[-1]
    periods = [l.period for l in detect_renormalization(PolynomialFamily(2, c), 32)]
    assert periods == [2, 4, 8, 16, 32]


@pytest.mark.parametrize("degree", [2, 4])
def test_fibonacci_return_times(degree):
    S = fibonacci_return_times(PolynomialFamily(degree, FIBONACCI_C[degree]), 9)
    assert S == (1, 2, 3, 5, 8, 13, 21, 34, 55)


def test_non_fibonacci_returns_at_feigenbaum():
    S = fibonacci_return_times(PolynomialFamily(2, FEIGENBAUM_C), 6)
    assert S != (1, 2, 3, 5, 8, 13)


def test_nice_point_sequence_fibonacci():
    f = PolynomialFamily(2, FIBONACCI_C[2])
    us = nice_point_sequence(f, 4)
    assert us == pytest.approx([0.9562035029786398, 0.435017019864667, 0.17211538807853155,
                                0.1254816176695968, 0.047845442258299994], abs=1e-12)
    assert all(is_nice(f, u, 200) for u in us)


def test_nice_points_stop_at_attractor():
    with pytest.raises(PeriodicAttractor):
        nice_point_sequence(PolynomialFamily(2, -1.0), 3)


def test_fibonacci_nice_points_are_in_sequence():
    f = PolynomialFamily(2, FIBONACCI_C[2])
    fib = fibonacci_nice_points(f, 3)
    seq = nice_point_sequence(f, 6)
    for u in fib:
        assert min(abs(abs(u) - v) for v in seq) < 1e-10


def test_first_return_map_structure():
    f = PolynomialFamily(2, FIBONACCI_C[2])
    us = nice_point_sequence(f, 2)
    rms = first_return_map(f, nice_interval(f, us[1]))
    assert rms.central.is_central and rms.central.iterate == 5
    assert classify_return(rms).label == "high/non_central"
    for br in rms.branches:
        assert first_entry_time(f, br.domain.center, nice_interval(f, us[1]).interval, 1000) == br.iterate


def test_generalized_return_renormalizes_low_return():
    f = PolynomialFamily(2, -1.86)
    us = nice_point_sequence(f, 2)
    g = generalized_first_return(f, RealInterval.symmetric(us[1]), RealInterval.symmetric(us[0]))
    assert g.has_low_return()
    Rg = renorm_low(g)
    assert Rg.central.domain.length < g.central.domain.length
    assert not Rg.has_low_return()
    with pytest.raises(HighReturn):
        renorm_low(Rg)
