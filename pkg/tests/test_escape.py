import cmath
import math

import numpy as np
import pytest

from sinedyn.core import FamilyParams, evaluate
from sinedyn.escape import (
    EscapeChainConfig,
    ExtendedSeedConfig,
    chain_constants,
    default_probe_radius,
    extended_induction_verify,
    induction_margin,
    post_singular_probe,
    random_extended_config,
    recursion_grid_check,
    sinh_chain_verify,
    strip_escape_orbit,
)

from conftest import FIG6, FIG6_Z0, FIG7


class TestChainConfig:
    def test_rejects_small_N(self):
        with pytest.raises(ValueError):
            EscapeChainConfig(3, 11, 10)

    def test_rejects_small_c1(self):
        with pytest.raises(ValueError):
            EscapeChainConfig(4, 10, 10)

    def test_rejects_low_seed(self):
        with pytest.raises(ValueError):
            EscapeChainConfig(4, 11, 4.0)


class TestSinhChain:
    def test_first_bound(self):
        rep = sinh_chain_verify(EscapeChainConfig.minimal(4, 11), 1)
        assert rep.rows[1].lower_bound == pytest.approx(4 * math.sqrt(120), rel=1e-12)
        assert rep.rows[1].lower_bound == pytest.approx(43.818, abs=1e-3)

    def test_row_zero(self):
        rep = sinh_chain_verify(EscapeChainConfig.minimal(4, 11), 1)
        assert rep.rows[0].lower_bound == 44
        assert rep.rows[0].holds

    def test_recursion(self):
        cs, ok, _ = chain_constants(11, 4, 1)
        alpha = math.sqrt(120) * 4
        assert cs[1] == pytest.approx(2 * math.cosh(alpha / 2))
        assert cs[1] > 121 and ok == [True]

    def test_three_steps_hold(self):
        rep = sinh_chain_verify(EscapeChainConfig.minimal(4, 11), 3)
        assert [r.n for r in rep.rows] == [0, 1, 2, 3]
        assert rep.ok

    def test_log_form_past_double_range(self):
        rep = sinh_chain_verify(EscapeChainConfig.minimal(4, 11), 3)
        assert rep.rows[3].observed is None
        assert rep.rows[3].log_observed > 700

    def test_step_cap(self):
        with pytest.raises(ValueError):
            sinh_chain_verify(EscapeChainConfig.minimal(), 6)

    def test_grid(self):
        assert all(ok for _, _, ok in recursion_grid_check())

    def test_first_step_by_sampling(self):
        rng = np.random.default_rng(3)
        N, c1 = 4, 11.0
        ymin = math.asinh(c1 * N)
        for _ in range(500):
            lam = rng.uniform(1, 3) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
            z = complex(rng.uniform(-N, N), rng.choice([-1, 1]) * (ymin + rng.uniform(1e-6, 3)))
            assert abs(evaluate(FamilyParams(lam, 0), z)) > c1 * N


class TestStripOrbit:
    def test_imaginary_growth(self):
        so = strip_escape_orbit(FamilyParams(1, 0), 5j, 4)
        ims = so.im_abs
        assert all(b > a for a, b in zip(ims, ims[1:]))
        assert so.record.verdict == "escaped"

    def test_attracted(self):
        so = strip_escape_orbit(FamilyParams(0.5, 0), 0.1j, 4, budget=200, escape_radius=100)
        assert so.first_exit is None
        assert so.im_abs[-1] < 1e-10

    def test_rotated_lambda(self):
        so = strip_escape_orbit(FamilyParams(cmath.exp(2j * math.pi / 3), 0), 6j, 4)
        ys = so.im_abs
        assert so.record.verdict == "escaped"
        # the strip-contracted bound applies while the next point stays in the strip
        for a, b, inside in zip(ys, ys[1:], so.in_strip[1:]):
            if inside:
                assert b > math.sqrt(max(0.0, math.sinh(a) ** 2 - 16)) - 1e-9 * b

    def test_outside_strip(self):
        with pytest.raises(ValueError):
            strip_escape_orbit(FamilyParams(1, 0), 5 + 1j, 4)


class TestExtended:
    def test_precondition_names_inequality(self):
        with pytest.raises(ValueError, match="cosh"):
            ExtendedSeedConfig(FamilyParams(1.5, 0.2), 1.0, 5.0)

    def test_base_case(self):
        cfg = ExtendedSeedConfig(FIG7, 3.0, 3.0 + abs(FIG7.a) + 0.5)
        rep = extended_induction_verify(cfg, 3)
        assert rep.rows[0].v_abs > rep.rows[0].comparison

    def test_fig7_three_steps(self):
        y0 = math.asinh(3 * abs(FIG7.a)) + 0.3
        cfg = ExtendedSeedConfig(FIG7, y0, y0 + abs(FIG7.a) + 0.5)
        rep = extended_induction_verify(cfg, 3)
        assert len(rep.rows) >= 4
        assert rep.ok

    def test_needs_lambda_at_least_one(self):
        cfg = ExtendedSeedConfig(FamilyParams(0.9, 0.5), 3.0, 4.0)
        with pytest.raises(ValueError):
            extended_induction_verify(cfg)

    def test_case_split_margins(self):
        # |a| > 1: sinh y - eps - |a| > 3|a| - |a| - |a| = |a|
        a, y = 1.5, math.asinh(4.5) + 0.01
        assert induction_margin(1.2, a, a / 2, y, y) > a / 2
        # |a| < 1: |lam| cosh(y)|a| - ... > 4|a| - 3|a| = |a|
        a, y0 = 0.5, math.acosh(4) + 0.5
        assert induction_margin(1.0, a, a / 2, y0, y0) > 0

    def test_random_configs(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            rep = extended_induction_verify(random_extended_config(rng), 4)
            assert rep.ok and len(rep.rows) >= 4

    def test_rows_past_double_range(self):
        rep = extended_induction_verify(random_extended_config(np.random.default_rng(1)), 4)
        big = rep.rows[3]
        assert big.v_abs is None and big.log_v > 1e6 and big.holds


class TestProbe:
    def test_attracting(self):
        pr = post_singular_probe(FamilyParams(0.5, 0), 10_000)
        assert pr.verdict == "bounded-so-far"
        assert all(abs(z) < 1e-8 for z in pr.limits)

    def test_parabolic(self):
        pr = post_singular_probe(FamilyParams(1, 0), 10_000)
        assert pr.verdict in ("bounded-so-far", "undetermined")
        assert pr.max_modulus <= 1.0
        assert abs(pr.final[0]) < 0.05

    def test_fig6(self):
        pr = post_singular_probe(FIG6, 10_000)
        assert pr.verdict == "bounded-so-far"
        for z in pr.limits:
            assert abs(z - FIG6_Z0) < 1e-4

    def test_escapes(self):
        pr = post_singular_probe(FamilyParams(1, 3j), 1000)
        assert pr.verdict == "escaped"

    def test_k_window_changes_nothing(self):
        base = post_singular_probe(FIG6, 2000)
        wide = post_singular_probe(FIG6, 2000, k_window=3)
        assert base.verdict == wide.verdict

    def test_default_radius(self):
        assert default_probe_radius(FamilyParams(1, 0)) == 20
