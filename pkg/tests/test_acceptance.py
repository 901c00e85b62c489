"""Acceptance criteria 1-11, one PASS/FAIL line each with its runtime.

Run through pytest (lines appear in the terminal summary) or directly:

    python tests/test_acceptance.py
"""
import cmath
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import FIG1, FIG6, FIG6_Z0, FIG7, FIG8, FIG9, HALF_PI  # noqa: E402
from sinedyn.atlas import (  # noqa: E402
    GridSpec,
    boundedness_verdict,
    classify_grid,
    critical_containment_report,
    disjoint_type_check,
    interval_selfmap_check,
)
from sinedyn.core import FamilyParams, derivative, evaluate, symmetry_check  # noqa: E402
from sinedyn.escape import (  # noqa: E402
    EscapeChainConfig,
    ExtendedSeedConfig,
    extended_induction_verify,
    post_singular_probe,
    random_extended_config,
    sinh_chain_verify,
)
from sinedyn.hairs import Itinerary, invariance_residuals, trace_hair  # noqa: E402
from sinedyn.periodic import solve_fixed_points  # noqa: E402
from sinedyn.render import RenderJob, cmd_render  # noqa: E402

LINES: list[str] = []

# criterion 8 frame: [-2pi, 2pi] wide; square pixels make it 4 pi tall at 512 x 512
PARABOLIC = FamilyParams(1, 0)
C8_GRID = GridSpec.square(0, 4 * math.pi, 512)
C8_BUDGET = 10_000


def _record(n: int, ok: bool, seconds: float, limit: float, detail: str) -> None:
    verdict = "PASS" if ok and seconds < limit else "FAIL"
    LINES.append(f"criterion {n:2d} {verdict}  {seconds:7.2f} s (limit {limit:g} s)  {detail}")


def _info(text: str) -> None:
    LINES.append(f"             info  {text}")


def _check(n: int, limit: float, fn):
    t = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t
    _record(n, ok, dt, limit, detail)
    assert ok, detail
    assert dt < limit, f"took {dt:.1f} s"


def _disk(n: int, radius: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0, 1, n))
    return r * np.exp(1j * rng.uniform(-math.pi, math.pi, n))


# -- 1 ----------------------------------------------------------------------------

def c1():
    recs = solve_fixed_points(FIG6, (-2, -1, 2, 1))
    hits = [r for r in recs if abs(r.location - FIG6_Z0) <= 1e-4]
    ok = len(hits) == 1 and abs(FIG6.lam * cmath.cos(hits[0].location)) < 1
    z = hits[0].location if hits else None
    return ok, f"fixed point {z.real if z else None!r}, |lam cos z0| = {abs(FIG6.lam * cmath.cos(z)) if z else None:.6f}"


def test_c01_fixed_point():
    _check(1, 1.0, c1)


# -- 2 ----------------------------------------------------------------------------

def c2():
    lam2 = FIG8.lam**2
    worst, bad, scaled = 0.0, 0, 0.0
    zs = _disk(10_000, 20, 2)
    for z in zs:
        z = complex(z)
        d, fa = derivative(FIG8, z), evaluate(FIG8, z) - FIG8.a
        r = abs(d * d + fa * fa - lam2)
        worst = max(worst, r / abs(lam2))
        bad += r > 1e-10 * abs(lam2)
        scaled = max(scaled, r / (abs(d) ** 2 + abs(fa) ** 2 + abs(lam2)))
    c2.scaled = scaled
    c2.zs = zs
    return bad == 0, f"|(f')^2+(f-a)^2-lam^2|/|lam|^2 max {worst:.3g}; {bad} of 10000 points above 1e-10"


def _identity_mp(zs) -> float:
    import mpmath

    p = FIG8
    worst = 0
    for z in zs:
        z = complex(z)
        # enough digits to absorb cosh|Im z| ~ e^20 cancellation
        with mpmath.workdps(30 + int(2 * abs(z.imag) / 2.3)):
            lam, a, w = mpmath.mpc(p.lam), mpmath.mpc(p.a), mpmath.mpc(z)
            d, fa = lam * mpmath.cos(w), lam * mpmath.sin(w)
            worst = max(worst, abs(d * d + fa * fa - lam * lam) / abs(lam * lam))
    return float(worst)


def test_c02_multiplier_identity():
    try:
        _check(2, 1.0, c2)
    finally:
        _info(f"scale-relative residual (divided by |f'|^2+|f-a|^2+|lam|^2) max {c2.scaled:.3g}")
        t = time.perf_counter()
        mp = _identity_mp(c2.zs)
        _info(f"same 10^4 points in mpmath: max {mp:.3g} relative to |lam|^2 ({time.perf_counter() - t:.2f} s)")


# -- 3 ----------------------------------------------------------------------------

def _mirror_score(p, center) -> float:
    at = classify_grid(p, GridSpec.square(center, 4 * math.pi, 512), 10_000)
    cat = at.category()
    return float(np.mean(cat == cat[::-1, ::-1]))


def c3():
    zs = _disk(10_000, 20, 3)
    worst_m, worst_c = 0.0, 0.0
    for p in (FIG1, FIG6, FIG7, FIG8, FIG9):
        for w in zs:
            u, v = symmetry_check(p, complex(w), "critical")
            worst_m = max(worst_m, abs(u - v) / max(1.0, abs(u)))
    for p in (FIG1, PARABOLIC):
        for z in zs:
            u, v = symmetry_check(p, complex(z), "central")
            worst_c = max(worst_c, abs(u - v) / max(1.0, abs(u)))
    scores = {
        "lam=1 about 0": _mirror_score(PARABOLIC, 0),
        "fig1 about 0": _mirror_score(FIG1, 0),
        "fig6 about pi/2": _mirror_score(FIG6, HALF_PI),
        "fig8 about pi/2": _mirror_score(FIG8, HALF_PI),
    }
    ok = worst_m <= 1e-12 and worst_c <= 1e-12 and min(scores.values()) >= 0.999
    raster = ", ".join(f"{k} {v:.4f}" for k, v in scores.items())
    return ok, f"mirror {worst_m:.2g}, central {worst_c:.2g}; raster {raster}"


def test_c03_symmetry():
    try:
        _check(3, 30.0, c3)
    finally:
        _info(f"fig1 about pi/2 raster agreement {_mirror_score(FIG1, HALF_PI):.4f} (not part of the criterion)")


# -- 4 ----------------------------------------------------------------------------

def c4():
    cfg = EscapeChainConfig.minimal(4, 11)
    rep = sinh_chain_verify(cfg, 3)
    c2_ = rep.c[1]
    rows = " ".join(f"n={r.n}: log|y| {r.log_observed:.4g} > log bound {math.log(r.lower_bound):.4g}"
                    for r in rep.rows[1:])
    ok = rep.ok and c2_ > 121 and [r.n for r in rep.rows] == [0, 1, 2, 3]
    return ok, f"c2 = {c2_:.4g} > 121; {rows}"


def test_c04_escape_chain():
    _check(4, 1.0, c4)


# -- 5 ----------------------------------------------------------------------------

def c5():
    rng = np.random.default_rng(5)
    fewest, bad = 99, 0
    for _ in range(100):
        rep = extended_induction_verify(random_extended_config(rng), 4)
        fewest = min(fewest, len(rep.rows) - 1)
        bad += not rep.ok
    y0 = math.asinh(3 * abs(FIG7.a)) + 0.3
    fig7 = extended_induction_verify(ExtendedSeedConfig(FIG7, y0, y0 + abs(FIG7.a) + 0.5), 4)
    ok = bad == 0 and fewest >= 3 and fig7.ok and len(fig7.rows) >= 4
    return ok, f"100 configs, {bad} violations, fewest recorded steps {fewest}; fig7 seed {len(fig7.rows) - 1} steps"


def test_c05_extended_induction():
    _check(5, 5.0, c5)


# -- 6 ----------------------------------------------------------------------------

def c6():
    p = FamilyParams(2, 0)
    h = trace_hair(p, Itinerary.parse("0+"), depth=30, samples_per_step=32)
    re_max = float(np.max(np.abs(h.points.real)))
    res = float(invariance_residuals(p, h).max())
    land = abs(h.landing_point) if h.landing_point is not None else math.inf
    ok = len(h.samples) >= 500 and re_max < 1e-9 and land <= 1e-9 and res <= 1e-6
    return ok, f"{len(h.samples)} samples, max |Re| {re_max:.2g}, landing {land:.2g}, invariance {res:.2g}"


def test_c06_hair_invariance():
    _check(6, 5.0, c6)


# -- 7 ----------------------------------------------------------------------------

def c7():
    z, first = 1 + 0j, None
    top = 1.0
    mods = []
    for n in range(1, 10_001):
        z = evaluate(PARABOLIC, z)
        mods.append(abs(z))
        top = max(top, abs(z))
        if first is None and abs(z) < 0.05:
            first = n
    decreasing = all(b < a for a, b in zip(mods, mods[1:]))
    probe = post_singular_probe(PARABOLIC, 10_000)
    ok = first is not None and decreasing and probe.verdict == "bounded-so-far"
    return ok, f"|f^n(1)| < 0.05 at n={first}, strictly decreasing, max {top:.3g}; probe {probe.verdict}"


def test_c07_parabolic_probe():
    _check(7, 1.0, c7)


# -- 8 ----------------------------------------------------------------------------

def _all_bounded(grid):
    at = classify_grid(PARABOLIC, grid, C8_BUDGET)
    vs = boundedness_verdict(at, 3)
    levels = np.bincount([v.levels for v in vs], minlength=4)
    return at, all(v.verdict == "bounded" for v in vs), levels


def c8():
    at, ok512, lv512 = _all_bounded(C8_GRID)
    fine = GridSpec.square(0, 4 * math.pi, 1024)
    at2, ok1024, lv1024 = _all_bounded(fine)
    never_all = not any(r["contains_all"] for r in critical_containment_report(at))
    ok = ok512 and ok1024 and len(at.components) > 0 and never_all
    return ok, (f"512^2: {len(at.components)} components bounded (by level {lv512.tolist()}); "
                f"1024^2: {len(at2.components)} bounded (by level {lv1024.tolist()})")


def test_c08_parabolic_raster():
    _check(8, 300.0, c8)


# -- 9 ----------------------------------------------------------------------------

def c9():
    reps = {name: disjoint_type_check(p) for name, p in
            (("fig6", FIG6), ("fig7", FIG7), ("fig8", FIG8), ("fig9", FIG9))}
    inter = interval_selfmap_check(FIG6, (-HALF_PI, HALF_PI))
    ok = inter and all(r.verdict == "disjoint-type-evidence" for r in reps.values())
    return ok, ", ".join(f"{k} {r.verdict}" for k, r in reps.items()) + f"; fig6 interval {inter}"


def test_c09_disjoint_type():
    _check(9, 120.0, c9)


# -- 10 ---------------------------------------------------------------------------

def c10():
    at = classify_grid(FamilyParams(0.5, 0), GridSpec(0, 16, 8, 256, 128), 2000)
    ids = set(at.label_cycle)
    big = max(at.components, key=lambda c: c.pixel_count)
    v = {x.component_id: x for x in boundedness_verdict(at, 3)}[big.id]
    ok = (len(ids) == 1 and big.contains_critical_points == at.critical_points
          and v.verdict == "unbounded-suspected" and v.levels == 3)
    return ok, (f"cycle ids {sorted(ids)}, dominant component {big.pixel_count} px holding "
                f"{len(big.contains_critical_points)}/{len(at.critical_points)} critical points, {v.verdict}")


def test_c10_attracting_case():
    _check(10, 60.0, c10)


# -- 11 ---------------------------------------------------------------------------

def c11():
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for i, w in enumerate((1, 1, 8)):
            out = Path(tmp) / f"r{i}.ppm"
            cmd_render(RenderJob(PARABOLIC, C8_GRID, "basin-id", output_path=str(out),
                                 budget=C8_BUDGET, workers=w))
            blobs.append(out.read_bytes())
    ok = blobs[0] == blobs[1] == blobs[2]
    return ok, f"two 1-thread runs and an 8-thread run, {len(blobs[0])} bytes each, identical {ok}"


def test_c11_determinism():
    _check(11, 600.0, c11)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((k, v) for k, v in dict(globals()).items() if k.startswith("test_c")):
        try:
            fn()
        except AssertionError:
            failed += 1
    print("\n".join(LINES))
    sys.exit(1 if failed else 0)
