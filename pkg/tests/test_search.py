from __future__ import annotations

import pytest

from polylike.core import RealInterval
from polylike.errors import DomainError, NoParameterInBracket, NoRoot, WrongMinimalPeriod
from polylike.search import (
    ParameterQuery,
    cascade_limit,
    cascade_parameters,
    fibonacci_kneading,
    fibonacci_numbers,
    fibonacci_parameter,
    itinerary,
    kneading_compare,
    minimal_period,
    parameter_bounds,
    superstable_parameter,
    superstable_parameters,
)


def test_parameter_bounds_quadratic():
    b = parameter_bounds(2)
    assert b.lo == -2.0 and b.hi == pytest.approx(0.25)


def test_superstable_values():
    assert superstable_parameter(2, 2) == pytest.approx(-1.0, abs=1e-14)
    assert superstable_parameter(2, 3) == pytest.approx(-1.7548776662466927, abs=1e-13)
    assert superstable_parameters(2, 4) == pytest.approx([-1.9407998065294847, -1.3107026413368328], abs=1e-13)


def test_minimal_period_filters_divisors():
    assert minimal_period(2, -1.0, 4) == 2
    assert minimal_period(2, -1.3107026413368328, 4) == 4


def test_superstable_no_root():
    with pytest.raises(NoRoot):
        superstable_parameter(2, 3, RealInterval(-0.5, -0.1))


def test_superstable_wrong_minimal_period():
    # the only root of f^3(0) here is c = 0, of period 1
    with pytest.raises(WrongMinimalPeriod):
        superstable_parameter(2, 3, RealInterval(-0.5, 0.2))


def test_cascade_quadratic():
    cs = cascade_parameters(2, 7)
    expected = [0, -1, -1.3107026413368328, -1.3815474844320617, -1.396945359704561,
                -1.400253081214783, -1.400961962944841, -1.4011138049397756]
    assert cs == pytest.approx(expected, abs=1e-12)


def test_cascade_quartic():
    assert cascade_parameters(4, 4) == pytest.approx(
        [0, -1, -1.1457142071597122, -1.1652666400608298, -1.1679392129122041], abs=1e-12)
    with pytest.raises(DomainError):
        cascade_limit(4, 0)


def test_fibonacci_numbers_and_kneading():
    assert fibonacci_numbers(30)[:8] == [1, 2, 3, 5, 8, 13, 21, 34]
    k = fibonacci_kneading(20)
    assert k[0] == "L" and len(k) == 20


@pytest.mark.parametrize("degree,value", [(2, -1.8705286420872613), (4, -1.2492567458860382),
                                          (6, -1.1455757344641495)])
def test_fibonacci_parameters(degree, value):
    assert fibonacci_parameter(degree, 8) == pytest.approx(value, abs=1e-13)


def test_fibonacci_itinerary_matches():
    c = fibonacci_parameter(2, 8)
    assert itinerary(2, c, 40) == fibonacci_kneading(40)
    assert kneading_compare(itinerary(2, c, 40), fibonacci_kneading(40)) == 0


def test_fibonacci_bracket_must_straddle():
    with pytest.raises(NoParameterInBracket):
        fibonacci_parameter(2, 8, RealInterval(-1.5, -1.4))


def test_query_parse():
    q = ParameterQuery.parse("superstable:3@-1.8,-1.7", 2)
    assert q.target == "superstable" and q.order == 3 and q.bracket.as_tuple() == (-1.8, -1.7)
    assert q.solve() == pytest.approx(-1.7548776662466927)
    with pytest.raises(DomainError):
        ParameterQuery.parse("julia:3", 2)
    with pytest.raises(DomainError):
        ParameterQuery(2, "cascade", 3, RealInterval(-3.0, 0.0))
