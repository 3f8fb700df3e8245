from __future__ import annotations

import math

import pytest

from polylike.bounds import (
    BOUND_HIGH_RETURN,
    CrossRatioFrame,
    K_bound,
    K_star,
    K_star_limit,
    LevelData,
    cross_ratio_B,
    cross_ratio_C,
    find_expansion_point,
    invariant_interval,
    maximal_monotone_interval,
    measure_RI_ratio,
    measure_space_ratio,
    monotone_hull,
    y_from_space,
)
from polylike.core import PolynomialFamily, RealInterval
from polylike.errors import DomainError
from polylike.returns import detect_renormalization, generalized_first_return, nice_point_sequence, renorm_low
from polylike.search import cascade_parameters

from conftest import CASCADE_4, FEIGENBAUM_C, FIBONACCI_C


def test_K_star_closed_form_quadratic():
    # for l = 2 the supremum is 1 / (4 (1 - sqrt y))
    for y in (0.5, 0.625, 0.75):
        assert K_star(2, y) == pytest.approx(1.0 / (4.0 * (1.0 - math.sqrt(y))), rel=1e-14)


def test_K_star_is_supremum_of_K_bound():
    for ell in (2, 4, 6):
        y = 0.7
        grid = [K_bound(ell, y * k / 4000, y) for k in range(1, 4000)]
        assert max(grid) <= K_star(ell, y) * (1 + 1e-12)
        assert max(grid) == pytest.approx(K_star(ell, y), rel=1e-5)


def test_K_star_tends_to_limit():
    vals = [K_star(ell, 0.75) for ell in (2, 8, 64, 1024, 2 ** 16)]
    assert abs(vals[-1] - K_star_limit(0.75)) < 1e-4
    assert K_star_limit(0.75) == pytest.approx(1.0 / (math.e * math.log(4.0 / 3.0)))


def test_K_bound_domain():
    with pytest.raises(DomainError):
        K_bound(2, 0.8, 0.7)
    with pytest.raises(DomainError):
        K_star(3, 0.5)


def test_y_from_space():
    assert y_from_space(0.6) == pytest.approx(0.625)
    assert y_from_space(0.5) == pytest.approx(2.0 / 3.0)
    assert y_from_space(1.0 / 3.0) == pytest.approx(0.75)


def test_cross_ratios_on_symmetric_frame():
    T, J = RealInterval(0.0, 3.0), RealInterval(1.0, 2.0)
    assert cross_ratio_C(CrossRatioFrame(T, J)) == pytest.approx(3.0)
    assert cross_ratio_B(T, J) == pytest.approx(0.75)
    assert cross_ratio_B(T, T) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        CrossRatioFrame(J, T)


def test_invariant_interval_basilica():
    J = invariant_interval(PolynomialFamily(2, -1.0))
    assert J.hi == pytest.approx((1 + math.sqrt(5)) / 2)


def test_monotone_hull_avoids_critical_point():
    f = PolynomialFamily(2, -1.0)
    H = monotone_hull(f, RealInterval(0.3, 0.4), 1)
    assert H.lo == pytest.approx(0.0, abs=1e-12)
    r = maximal_monotone_interval(f, RealInterval(0.3, 0.4), 1, 1)
    assert r.lo == pytest.approx(0.4)


def test_space_ratio_basilica():
    f = PolynomialFamily(2, -1.0)
    lv = detect_renormalization(f, 2)[0]
    m = measure_space_ratio(f, LevelData.from_renormalization(f, lv))
    assert m.ratio == pytest.approx(5.854101966249684, rel=1e-10)
    assert m.satisfied


def test_space_ratio_feigenbaum_levels():
    f = PolynomialFamily(2, FEIGENBAUM_C)
    lvs = detect_renormalization(f, 16)
    ratios = [measure_space_ratio(f, LevelData.from_renormalization(f, lv, i)) for i, lv in enumerate(lvs)]
    assert ratios[0].ratio == pytest.approx(4.170873923636274, rel=1e-9)
    assert ratios[0].bound_class == 0.6 and ratios[1].bound_class == 0.5
    assert all(r.satisfied for r in ratios)


def test_space_ratio_high_return_fibonacci():
    f = PolynomialFamily(2, FIBONACCI_C[2])
    us = nice_point_sequence(f, 3)
    m = measure_space_ratio(f, LevelData.from_nice_interval(f, us[0], 0))
    assert m.bound_class == BOUND_HIGH_RETURN
    assert m.ratio == pytest.approx(13.011426635051391, rel=1e-9)
    assert dict(m.details)["fs_l_covers_L0"]


def test_expansion_point_frozen():
    assert cascade_parameters(4, 4)[-1] == pytest.approx(CASCADE_4, abs=1e-13)
    f = PolynomialFamily(4, CASCADE_4)
    lv = detect_renormalization(f, 16)[1]
    e = find_expansion_point(f, lv)
    assert e.u_tilde == pytest.approx(0.5244327720679636, rel=1e-8)
    assert e.fs_u_tilde == pytest.approx(0.6657365852589918, rel=1e-8)
    assert e.u_star == pytest.approx(-1.177688272278108, rel=1e-8)
    # the image of the expansion point is further out than the point itself
    assert abs(e.fs_u_tilde) > e.u_tilde
    assert e.C2 > 0 and e.C1 <= e.C0


def _cascade(c, n):
    f = PolynomialFamily(2, c)
    us = nice_point_sequence(f, n)
    g = generalized_first_return(f, RealInterval.symmetric(us[n]), RealInterval.symmetric(us[n - 1]))
    casc = [g]
    while casc[-1].has_low_return() and len(casc) < 12:
        casc.append(renorm_low(casc[-1]))
    return f, casc


@pytest.mark.parametrize("c,ratio", [(-1.86, 3.845265278518549), (-1.93, 17.796783296671016),
                                     (-1.72, 2.524906543272822)])
def test_RI_ratio_frozen(c, ratio):
    f, casc = _cascade(c, 1)
    r = measure_RI_ratio(f, casc)
    assert r.ratio == pytest.approx(ratio, rel=1e-8)
    assert r.exceeds_comparison
