import cmath
import math

import numpy as np
import pytest

from sinedyn.core import (
    FamilyParams,
    MagnitudeOverflow,
    default_escape_radius,
    derivative,
    evaluate,
    growth_bound_check,
    iterate,
    periodicity_check,
    symmetry_check,
)

from conftest import FIG1, FIG6, FIG6_Z0, FIG7, FIG9, HALF_PI


def test_params_reject_zero_lambda():
    with pytest.raises(ValueError):
        FamilyParams(0, 1)


def test_params_reject_nonfinite():
    with pytest.raises(ValueError):
        FamilyParams(math.nan, 0)


def test_singular_data():
    sd = FIG6.singular_data(3)
    assert len(sd.critical_points) == 7
    assert sd.critical_values == (FIG6.a + FIG6.lam, FIG6.a - FIG6.lam)
    for c in sd.critical_points:
        assert abs(derivative(FIG6, c)) < 1e-12


class TestEvaluate:
    def test_origin(self):
        assert evaluate(FamilyParams(1, 0), 0) == 0

    def test_fig6_maps_minus_half_pi_to_half_pi(self):
        assert evaluate(FIG6, -HALF_PI) == pytest.approx(HALF_PI, abs=1e-15)

    def test_imaginary_axis(self):
        # 2 sinh(pi)
        assert evaluate(FamilyParams(2, 0), 1j * math.pi) == pytest.approx(23.0974 * 1j, abs=1e-4)
        assert evaluate(FamilyParams(2, 0), 1j * math.pi).imag == pytest.approx(2 * math.sinh(math.pi), rel=1e-15)

    def test_matches_cmath(self):
        rng = np.random.default_rng(1)
        for z in rng.uniform(-5, 5, 200) + 1j * rng.uniform(-5, 5, 200):
            assert evaluate(FIG7, z) == pytest.approx(FIG7.lam * cmath.sin(z) + FIG7.a, rel=1e-13)

    def test_overflow_is_explicit(self):
        with pytest.raises(MagnitudeOverflow):
            evaluate(FamilyParams(1, 0), 1000j)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            evaluate(FamilyParams(1, 0), complex(math.nan, 0))


class TestDerivative:
    def test_origin(self):
        assert derivative(FamilyParams(1, 0), 0) == 1

    def test_critical_point(self):
        assert abs(derivative(FIG6, HALF_PI)) < 1e-15

    def test_finite_difference(self):
        p = FamilyParams(1 + 1j, 0)
        z, h = 1 + 1j, 1e-6
        fd = (evaluate(p, z + h) - evaluate(p, z - h)) / (2 * h)
        assert abs(derivative(p, z) - fd) < 1e-6


class TestIterate:
    def test_attracted_to_zero(self):
        rec = iterate(FamilyParams(0.5, 0), 0.1, 1000)
        assert rec.verdict == "attracted"
        assert abs(rec.limit) < 1e-8

    def test_fig6_critical_point(self):
        rec = iterate(FIG6, HALF_PI, 5000)
        assert rec.verdict == "attracted"
        assert abs(rec.limit - FIG6_Z0) < 1e-4

    def test_escape(self):
        rec = iterate(FamilyParams(2, 0), 3j, 100)
        assert rec.verdict == "escaped"

    def test_orbit_record_invariant(self):
        rec = iterate(FIG9, 0.3 + 0.2j, 50)
        assert rec.points[0] == 0.3 + 0.2j
        for z, w in zip(rec.points, rec.points[1:]):
            assert w == evaluate(FIG9, z)

    def test_escape_radius_precondition(self):
        with pytest.raises(ValueError):
            iterate(FamilyParams(2, 1), 0, 10, escape_radius=3.0)

    def test_default_escape_radius(self):
        assert default_escape_radius(FamilyParams(20, 0)) == 80


class TestSymmetry:
    def test_zero_offset(self):
        u, v = symmetry_check(FIG7, 0)
        assert u == v == evaluate(FIG7, HALF_PI)

    def test_fig1_pair(self):
        u, v = symmetry_check(FIG1, 1 + 2j)
        assert abs(u - v) <= 1e-12 * abs(u)

    def test_fig7_pair(self):
        u, v = symmetry_check(FIG7, -2.3 + 0.7j)
        assert abs(u - v) <= 1e-12 * max(1, abs(u))

    def test_central_exact(self):
        rng = np.random.default_rng(2)
        p = FamilyParams(1.3 - 0.4j, 0)
        for z in rng.uniform(-30, 30, 500) + 1j * rng.uniform(-30, 30, 500):
            u, v = symmetry_check(p, z, "central")
            assert u == v


class TestPeriodicity:
    def test_origin(self):
        # the double nearest 2 pi is not a zero of sin
        u, v = periodicity_check(FamilyParams(1, 0), 0)
        assert u == 0 and abs(v) <= 1e-12

    def test_fig9(self):
        u, v = periodicity_check(FIG9, 1 + 1j)
        assert abs(u - v) <= 1e-12 * abs(u)

    def test_far_translate(self):
        u, v = periodicity_check(FamilyParams(1, 0), 100 * math.pi)
        assert abs(u) <= 1e-9 and abs(v) <= 1e-9


class TestGrowth:
    def test_origin(self):
        assert growth_bound_check(0) == (0, 1, 1)

    def test_i(self):
        s, c, e = growth_bound_check(1j)
        assert s == pytest.approx(1.1752, abs=1e-4)
        assert c == pytest.approx(1.5431, abs=1e-4)
        assert e == pytest.approx(2.7183, abs=1e-4)

    def test_monotone(self):
        s, c, e = growth_bound_check(3 + 4j)
        assert s <= c <= e

    def test_overflow(self):
        with pytest.raises(MagnitudeOverflow):
            growth_bound_check(800 + 800j)
