from __future__ import annotations

import math

import numpy as np
import pytest

from polylike.bounds import LevelData
from polylike.builder import (
    VARIANTS,
    assemble_polylike,
    build_omega,
    central_trace,
    check_containment,
    epsilon_enlargement,
    extension_factor,
    filled_julia_membership,
    fitin_ratio,
    pullback_boundary,
    scan_theta,
    verify_containment,
)
from polylike.core import PolynomialFamily
from polylike.errors import VariantMismatch
from polylike.geometry import SampledCurve
from polylike.returns import detect_renormalization, nice_point_sequence

from conftest import CASCADE_4, FEIGENBAUM_C, FIBONACCI_C


@pytest.fixture(scope="module")
def feig_level():
    f = PolynomialFamily(2, FEIGENBAUM_C)
    lv = detect_renormalization(f, 8)[1]
    return f, LevelData.from_renormalization(f, lv, 1)


@pytest.fixture(scope="module")
def feig_map(feig_level):
    f, d = feig_level
    return assemble_polylike(f, d, build_omega(f, d, "doubling_13", 0.05))


@pytest.fixture(scope="module")
def fib4_level():
    f = PolynomialFamily(4, FIBONACCI_C[4])
    us = nice_point_sequence(f, 3)
    return f, LevelData.from_nice_interval(f, us[2], 2)


def test_extension_factors():
    assert extension_factor("quadratic_9", 2) == pytest.approx(1.2)
    assert extension_factor("large_degree_11", 4) == pytest.approx(1 + math.log(1.1) / 4)
    assert extension_factor("general_12", 4) == pytest.approx(1.07 ** 0.25)
    assert extension_factor("doubling_13", 2) == pytest.approx(1.09 ** 0.5)


def test_variant_checks(feig_level):
    f, d = feig_level
    with pytest.raises(VariantMismatch):
        build_omega(f, d, "general_12")
    with pytest.raises(VariantMismatch):
        build_omega(f, d, "round_disc_8")
    with pytest.raises(VariantMismatch):
        build_omega(f, d, "bogus")


def test_omega_is_symmetric(feig_level):
    f, d = feig_level
    om = build_omega(f, d, "doubling_13", 0.05)
    z = np.array([0.1 + 0.3j, 0.5 + 2.0j, 0.6 + 0.01j])
    assert np.allclose(om.margin(z), om.margin(z.conjugate()))
    assert np.allclose(om.margin(z), om.margin(-z))
    assert om.trace.hi == pytest.approx(1.09 ** 0.5 * d.V.hi)


def test_doubling_containment_period_four(feig_level):
    f, d = feig_level
    curve, rep = verify_containment(f, build_omega(f, d, "doubling_13", 0.05), d)
    assert rep.contained and rep.corrected_margin > 0
    assert rep.modulus_lower_bound == pytest.approx(1.546e-7, rel=0.05)
    assert rep.round_bound == 0.0
    assert curve.closed


def test_quadratic_variant_contained(feig_level):
    f, d = feig_level
    _, rep = verify_containment(f, build_omega(f, d, "quadratic_9"), d)
    assert rep.contained


def test_pullback_maps_back_to_boundary(feig_level):
    f, d = feig_level
    om = build_omega(f, d, "doubling_13", 0.05)
    curve = pullback_boundary(f, om, d, 1024)
    img = f.iterate(curve.points, d.s)
    # the images lie on the boundary of Omega
    assert np.max(np.abs(om.margin(img))) < 1e-9 * om.diameter()


def test_check_containment_rejects_outside_curve(feig_level):
    f, d = feig_level
    om = build_omega(f, d, "doubling_13", 0.05)
    big = SampledCurve(3.0 * om.sample_boundary(512).points, closed=True)
    rep = check_containment(big, om)
    assert not rep.contained and rep.modulus_lower_bound == 0.0


def test_assembled_map_traces(feig_map, feig_level):
    f, d = feig_level
    assert feig_map.fitin_ratio == pytest.approx(fitin_ratio(f, d))
    assert feig_map.fitin_ratio < 1
    assert feig_map.central.trace.hi < feig_map.range.trace.hi
    assert feig_map.central.trace == central_trace(f, feig_map.range, d)
    assert feig_map.off_central == ()


def test_critical_point_in_filled_julia_set(feig_map):
    m = filled_julia_membership(feig_map, 0.0, 60)
    assert m.inside and m.budget_limited


def test_far_point_escapes(feig_map):
    x = 0.5 * (feig_map.central.trace.hi + feig_map.range.trace.hi)
    m = filled_julia_membership(feig_map, complex(x), 60)
    assert not m.inside and m.steps == 0


def test_round_disc_quartic_cascade():
    f = PolynomialFamily(4, CASCADE_4)
    lv = detect_renormalization(f, 16)[1]
    d = LevelData.from_renormalization(f, lv, 1)
    om = build_omega(f, d, "round_disc_8")
    _, rep = verify_containment(f, om, d)
    assert rep.contained and rep.round_bound > 0


def test_general_scan_on_fibonacci_quartic(fib4_level):
    f, d = fib4_level
    best, reps = scan_theta(f, d, "general_12", thetas=(0.3, 0.05))
    assert best == 0.3
    assert all(r is not None and r.contained for _, r in reps)


def test_off_central_domains_fibonacci(fib4_level):
    f, d = fib4_level
    plm = assemble_polylike(f, d, build_omega(f, d, "general_12", 0.3))
    assert plm.off_central
    traces = sorted([plm.central.trace, *(r.trace for r in plm.off_central)], key=lambda t: t.lo)
    for a, b in zip(traces, traces[1:]):
        assert a.hi <= b.lo + 1e-12


def test_epsilon_enlargement_passes_first_try(feig_level):
    f, d = feig_level
    eps, enlarged, rep = epsilon_enlargement(
        d, lambda dd: verify_containment(f, build_omega(f, dd, "doubling_13", 0.05), dd)[1].contained)
    assert eps == pytest.approx(1e-3 * d.V.length)
    assert enlarged.V.length > d.V.length


def test_variants_constant():
    assert set(VARIANTS) == {"round_disc_8", "quadratic_9", "large_degree_11", "general_12", "doubling_13"}
