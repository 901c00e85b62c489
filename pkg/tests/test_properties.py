"""Randomised checks of the identities the constructions rest on."""
import cmath
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sinedyn.core import FamilyParams, derivative, evaluate, iterate_n
from sinedyn.escape import extended_induction_verify, post_singular_probe, random_extended_config
from sinedyn.hairs import inverse_branch
from sinedyn.periodic import classify_multiplier, solve_periodic_points

unit = st.floats(-1, 1)
real = st.floats(-20, 20)


@st.composite
def complexes(draw, lo=-20.0, hi=20.0):
    return complex(draw(st.floats(lo, hi)), draw(st.floats(lo, hi)))


@st.composite
def params(draw):
    lam = complex(draw(st.floats(-3, 3)), draw(st.floats(-3, 3)))
    assume(abs(lam) > 1e-3)
    return FamilyParams(lam, draw(complexes(-3, 3)))


@given(params(), complexes())
def test_identity_scale_relative(p, z):
    d, fa = derivative(p, z), evaluate(p, z) - p.a
    scale = abs(d) ** 2 + abs(fa) ** 2 + abs(p.lam) ** 2
    assert abs(d * d + fa * fa - p.lam**2) <= 1e-10 * scale


@given(params(), complexes())
def test_critical_mirror(p, w):
    u, v = evaluate(p, math.pi / 2 + w), evaluate(p, math.pi / 2 - w)
    assert abs(u - v) <= 1e-12 * max(1.0, abs(u))


@given(complexes(-3, 3), complexes())
def test_central_exact(lam, z):
    assume(abs(lam) > 1e-3)
    p = FamilyParams(lam, 0)
    assert evaluate(p, -z) == -evaluate(p, z)


@given(st.floats(-3, 3), st.floats(-3, 3), complexes())
def test_conjugation(lam, a, z):
    assume(abs(lam) > 1e-3)
    p = FamilyParams(lam, a)
    assert evaluate(p, z.conjugate()) == evaluate(p, z).conjugate()


@given(params(), complexes(-5, 5), st.integers(-10, 10))
def test_two_pi_period(p, z, k):
    u, v = evaluate(p, z), evaluate(p, z + 2 * math.pi * k)
    assert abs(u - v) <= 1e-10 * max(1.0, abs(u))


@given(complexes(-50, 50))
def test_growth_chain(z):
    assert abs(cmath.sin(z)) <= math.cosh(z.imag) * (1 + 1e-15) <= math.exp(abs(z)) * (1 + 1e-15)


@given(st.integers(-3, 3), st.floats(-1.5, 1.5), st.floats(1e-3, 8), st.booleans(), params())
def test_inverse_branch_roundtrip(k, dx, y, upper, p):
    z = complex(k * math.pi + dx, y if upper else -y)
    w = evaluate(p, z)
    back = inverse_branch(p, w, (k, "upper" if upper else "lower"))
    assert abs(back - z) <= 1e-9 * (1 + abs(z))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 2.5), st.floats(-math.pi, math.pi), st.floats(-1, 1))
def test_cycle_multiplier_rotation(r, arg, a):
    p = FamilyParams(r * cmath.exp(1j * arg), a)
    for rec in solve_periodic_points(p, 2, (-2, -1, 2, 1)):
        mults = [iterate_n(p, z, 2)[1] for z in rec.cycle]
        assert all(abs(m - mults[0]) <= 1e-8 * max(1.0, abs(mults[0])) for m in mults)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_stability_bands(m):
    kind = classify_multiplier(m)
    if abs(m) < 1 - 1e-9:
        assert kind == "attracting"
    elif abs(m) > 1 + 1e-9:
        assert kind == "repelling"
    else:
        assert kind in ("parabolic-rational", "indifferent-other")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_extended_induction_never_fails(seed):
    rep = extended_induction_verify(random_extended_config(np.random.default_rng(seed)), 4)
    assert rep.ok and len(rep.rows) >= 4


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(-math.pi, math.pi), complexes(-2, 2))
def test_probe_window_invariance(r, arg, a):
    p = FamilyParams(r * cmath.exp(1j * arg), a)
    base = post_singular_probe(p, 2000)
    assert post_singular_probe(p, 2000, k_window=2).verdict == base.verdict


@given(st.floats(3.01, 10), st.floats(10.01, 40), st.floats(-1, 1), st.floats(0, 1),
       st.floats(1, 3), st.floats(-math.pi, math.pi))
def test_first_escape_step(N, c1, fx, fy, r, arg):
    # |Re z| < N and sinh|Im z| > c1 N force |lam sin z| > c1 N for |lam| >= 1
    y = math.asinh(c1 * N) * (1 + 1e-9) + fy
    z = complex(fx * N * (1 - 1e-12), y)
    p = FamilyParams(r * cmath.exp(1j * arg), 0)
    assert abs(evaluate(p, z)) > c1 * N
