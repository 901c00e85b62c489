"""Periodic points, multipliers and stability classes."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from .core import FamilyParams, MagnitudeOverflow, derivative, evaluate, iterate_n

Stability = Literal["attracting", "repelling", "parabolic-rational", "indifferent-other"]

NEWTON_MAX = 60
DEDUP_RADIUS = 1e-8
MULTIPLE_RADIUS = 1e-5
RESIDUAL_MAX = 1e-10
ROOT_OF_UNITY_Q = 64


class NotAFixedPoint(ValueError):
    """Raised when the multiplier identity is requested away from a fixed point."""


def _pair(z: complex | None) -> list[float] | None:
    return None if z is None else [z.real, z.imag]


@dataclass(frozen=True)
class PeriodicPointRecord:
    location: complex
    period: int
    multiplier_chain: complex
    multiplier_identity: complex | None
    stability: Stability
    residual: float
    cycle: tuple[complex, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "location": _pair(self.location),
            "period": self.period,
            "multiplier_chain": _pair(self.multiplier_chain),
            "multiplier_identity": _pair(self.multiplier_identity),
            "stability": self.stability,
            "residual": self.residual,
        }


def rational_rotation(m: complex, max_q: int = ROOT_OF_UNITY_Q, tol: float = 1e-9) -> Fraction | None:
    """p/q with m = exp(2 pi i p/q) and q <= max_q, if any."""
    if abs(abs(m) - 1) > tol:
        return None
    turn = (cmath.phase(m) / (2 * math.pi)) % 1.0
    frac = Fraction(turn).limit_denominator(max_q)
    if abs(cmath.exp(2j * math.pi * float(frac)) - m) <= 10 * tol:
        return frac % 1
    return None


def classify_multiplier(m: complex, band: float = 1e-9) -> Stability:
    r = abs(m)
    if r < 1 - band:
        return "attracting"
    if r > 1 + band:
        return "repelling"
    if rational_rotation(m, tol=band) is not None:
        return "parabolic-rational"
    return "indifferent-other"


def _return_map(p: FamilyParams, z: complex, q: int) -> tuple[complex, complex, complex]:
    """(f^q(z), (f^q)'(z), (f^q)''(z)) using f'' = -(f - a)."""
    w, d1, d2 = z, 1 + 0j, 0j
    for _ in range(q):
        fw = evaluate(p, w)
        df = derivative(p, w)
        d2 = -(fw - p.a) * d1 * d1 + df * d2
        d1 = df * d1
        w = fw
    return w, d1, d2


def newton_polish(p: FamilyParams, z: complex, q: int, max_iter: int = NEWTON_MAX) -> complex | None:
    """Root of g = f^q - id by Newton applied to g/g'.

    This is ordinary Newton near simple roots and stays quadratic at the
    multiple roots that parabolic points produce.  None if the orbit
    overflows or the iteration degenerates.
    """
    z = complex(z)
    for _ in range(max_iter):
        try:
            w, d1, d2 = _return_map(p, z, q)
        except MagnitudeOverflow:
            return None
        g, g1 = w - z, d1 - 1
        if g == 0:
            break
        den = g1 * g1 - g * d2
        if den == 0:
            break
        step = g * g1 / den
        if not cmath.isfinite(step):
            return None
        z -= step
        if abs(step) <= 1e-13 * (1 + abs(z)):
            break
    return z


def _orbit(p: FamilyParams, z: complex, q: int) -> tuple[complex, ...]:
    pts = [z]
    for _ in range(q - 1):
        pts.append(evaluate(p, pts[-1]))
    return tuple(pts)


def minimal_period(p: FamilyParams, z: complex, q: int, tol: float = 1e-8) -> int:
    for d in range(1, q + 1):
        if q % d:
            continue
        try:
            w, _ = iterate_n(p, z, d)
        except MagnitudeOverflow:
            continue
        if abs(w - z) <= tol * (1 + abs(z)):
            return d
    return q


def multiplier_identity_detail(p: FamilyParams, z0: complex, tol: float = 1e-8) -> tuple[complex, float]:
    """(multiplier from lam^2 - (z0-a)^2 with the sign matching lam cos z0, |discrepancy|)."""
    z0 = complex(z0)
    try:
        res = abs(evaluate(p, z0) - z0)
    except MagnitudeOverflow as exc:
        raise NotAFixedPoint(f"{z0!r} is not a fixed point (overflow)") from exc
    if res > tol * (1 + abs(z0)):
        raise NotAFixedPoint(f"{z0!r} is not a fixed point (residual {res:.3g})")
    root = cmath.sqrt(p.lam**2 - (z0 - p.a) ** 2)
    chain = derivative(p, z0)
    best = min((root, -root), key=lambda r: abs(r - chain))
    return best, abs(best - chain)


def multiplier_via_identity(p: FamilyParams, z0: complex, tol: float = 1e-8) -> complex:
    return multiplier_identity_detail(p, z0, tol)[0]


def _record(p: FamilyParams, z: complex, period: int) -> PeriodicPointRecord | None:
    try:
        w, mult = iterate_n(p, z, period)
    except MagnitudeOverflow:
        return None
    residual = abs(w - z)
    if residual > RESIDUAL_MAX:
        return None
    ident = None
    if period == 1:
        try:
            ident = multiplier_via_identity(p, z)
        except NotAFixedPoint:
            return None
    return PeriodicPointRecord(
        location=z,
        period=period,
        multiplier_chain=mult,
        multiplier_identity=ident,
        stability=classify_multiplier(mult),
        residual=residual,
        cycle=_orbit(p, z, period),
    )


def _vector_newton(p: FamilyParams, z: np.ndarray, q: int) -> np.ndarray:
    lam, a = p.lam, p.a
    live = np.ones(z.shape, bool)
    with np.errstate(all="ignore"):
        for _ in range(NEWTON_MAX):
            w = z.copy()
            d = np.ones_like(z)
            for _ in range(q):
                d = d * lam * np.cos(w)
                w = lam * np.sin(w) + a
            step = (w - z) / (d - 1)
            live &= np.isfinite(step)
            step = np.where(live, step, 0)
            z = z - step
            if np.all(np.abs(step) <= 1e-13 * (1 + np.abs(z))):
                break
    return z[live & np.isfinite(z)]


def _merge_roots(p: FamilyParams, roots: list[complex], q: int) -> list[complex]:
    """Cluster at DEDUP_RADIUS, widened for multiple roots of f^q - id.

    At a parabolic point f^q - id vanishes to order >= 2 and double precision
    only pins the root down to about eps^(1/(nu+1)); such clusters are merged
    at MULTIPLE_RADIUS and represented by the member with (f^q)' closest to 1.
    """
    def near_one(z: complex) -> float:
        try:
            return abs(iterate_n(p, z, q)[1] - 1)
        except MagnitudeOverflow:
            return math.inf

    groups: list[list[complex]] = []
    for z in roots:
        r = MULTIPLE_RADIUS if near_one(z) < 1e-6 else DEDUP_RADIUS
        for g in groups:
            if any(abs(z - k) <= r * (1 + abs(z)) for k in g):
                g.append(z)
                break
        else:
            groups.append([z])
    return [min(g, key=lambda z: (near_one(z), z.real, z.imag)) for g in groups]


def solve_periodic_points(
    p: FamilyParams,
    q: int,
    search_box: tuple[float, float, float, float],
    grid: int = 24,
) -> list[PeriodicPointRecord]:
    """Points of minimal period dividing q inside ``search_box`` = (xmin, ymin, xmax, ymax).

    Seeds form a grid x grid lattice; roots are polished one by one and merged
    at ``DEDUP_RADIUS`` after a lexicographic sort, so the output order does
    not depend on how the seeds were processed.
    """
    if not 1 <= q <= 8:
        raise ValueError("q must lie in 1..8")
    if grid < 8:
        raise ValueError("grid must be >= 8")
    x0, y0, x1, y1 = map(float, search_box)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate search box")
    xs = np.linspace(x0, x1, grid)
    ys = np.linspace(y0, y1, grid)
    seeds = (xs[None, :] + 1j * ys[:, None]).ravel()
    roots = _vector_newton(p, seeds, q)
    pad = 1e-9 * (1 + max(abs(x0), abs(x1), abs(y0), abs(y1)))
    inside = (
        (roots.real >= x0 - pad) & (roots.real <= x1 + pad)
        & (roots.imag >= y0 - pad) & (roots.imag <= y1 + pad)
    )
    polished = []
    for z in roots[inside]:
        z = newton_polish(p, complex(z), q)
        if z is not None:
            polished.append(z)
    polished = [
        z for z in polished if x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad
    ]
    polished.sort(key=lambda z: (z.real, z.imag))
    kept = _merge_roots(p, polished, q)
    out = []
    for z in kept:
        rec = _record(p, z, minimal_period(p, z, q))
        if rec is not None:
            out.append(rec)
    return out


def solve_fixed_points(
    p: FamilyParams, search_box: tuple[float, float, float, float], grid: int = 24
) -> list[PeriodicPointRecord]:
    return solve_periodic_points(p, 1, search_box, grid)


def find_cycle_from_orbit(
    p: FamilyParams,
    z: complex,
    max_period: int = 16,
    tol: float = 1e-2,
    capture: float = 1e-6,
    parabolic_tol: float = 0.1,
) -> PeriodicPointRecord | None:
    """Identify the attracting or parabolic cycle an orbit tail is approaching.

    ``z`` should be a late orbit point.  For each q the tail point is Newton
    polished on f^q; a root within ``tol`` of it that is non-repelling is
    accepted.  Parabolic roots may lie up to ``parabolic_tol`` away, since
    those orbits close in only like n^(-1/nu).  ``capture`` is the relative
    near-return needed to try q.
    """
    z = complex(z)
    for q in range(1, max_period + 1):
        try:
            w, _ = iterate_n(p, z, q)
        except MagnitudeOverflow:
            return None
        if abs(w - z) > max(capture, tol) * (1 + abs(z)):
            continue
        root = newton_polish(p, z, q, max_iter=200)
        if root is None or abs(root - z) > max(tol, parabolic_tol) * (1 + abs(z)):
            continue
        period = minimal_period(p, root, q)
        rec = _record(p, root, period)
        if rec is None:
            continue
        near = abs(root - z) <= tol * (1 + abs(z))
        if rec.stability == "parabolic-rational" or (near and rec.stability == "attracting"):
            return rec
    return None


@dataclass(frozen=True)
class ParabolicLocus:
    lam: complex
    degenerate: bool
    candidates: tuple[complex, ...]
    verified: tuple[tuple[complex, complex], ...]
    residuals: tuple[tuple[complex, int, float, float], ...]
    exact_a: tuple[complex, ...]


def parabolic_locus_a(lam: complex, k_window: int = 2, tol: float = 1e-9) -> ParabolicLocus:
    """Test the candidates a = 2 pi k for a multiplier-1 fixed point z0 = s + a, s^2 = lam^2 - 1.

    ``verified`` lists (a, z0) pairs where f(z0) = z0 and f'(z0) = 1 hold to
    ``tol``.  ``residuals`` holds (a, sign, |f(z0)-z0|, |f'(z0)-1|) for every
    trial.  ``exact_a`` gives the values of a (k in the window) that do carry
    a multiplier-1 fixed point of the form s + a: from lam cos z0 = 1 and
    lam sin z0 = s one gets exp(i z0) = (1 + i s)/lam, so z0 is fixed by lam
    alone and a = z0 - s.
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("lam must be non-zero")
    s0 = cmath.sqrt(lam * lam - 1)
    degenerate = abs(lam * lam - 1) < 1e-14
    cands = tuple(complex(2 * math.pi * k) for k in range(-k_window, k_window + 1))
    verified, residuals, exact = [], [], []
    for sign in ((1,) if degenerate else (1, -1)):
        s = sign * s0
        for a in cands:
            p = FamilyParams(lam, a)
            z0 = s + a
            try:
                r_fix = abs(evaluate(p, z0) - z0)
                r_mult = abs(derivative(p, z0) - 1)
            except MagnitudeOverflow:
                r_fix = r_mult = math.inf
            residuals.append((a, sign, r_fix, r_mult))
            if r_fix <= tol * (1 + abs(z0)) and r_mult <= tol:
                verified.append((a, z0))
        base = -1j * cmath.log((1 + 1j * s) / lam)
        for k in range(-k_window, k_window + 1):
            exact.append(base + 2 * math.pi * k - s)
    exact.sort(key=lambda a: (a.real, a.imag))
    return ParabolicLocus(lam, degenerate, cands, tuple(verified), tuple(residuals), tuple(exact))


@dataclass(frozen=True)
class ParabolicGerm:
    """f^Q(z0 + h) = z0 + h + c h^(nu+1) + ... at a multiplier-1 point of f^Q."""

    point: complex
    Q: int
    nu: int
    c: complex
    attracting_dirs: tuple[float, ...]


def parabolic_germ(p: FamilyParams, z0: complex, Q: int, rho: float = 1e-2, m: int = 64) -> ParabolicGerm:
    """Leading nonlinear term of f^Q - id by a Cauchy integral on |h| = rho."""
    theta = 2 * math.pi * np.arange(m) / m
    h = rho * np.exp(1j * theta)
    vals = np.empty(m, complex)
    for i, hi in enumerate(h):
        w, _ = iterate_n(p, z0 + complex(hi), Q)
        vals[i] = w - z0 - hi
    coef = np.fft.fft(vals) / m
    # coef[k] is c_k rho^k.  A parabolic point is only located to about
    # eps^(1/(nu+1)), which leaks ~1e-6 relative terms below the true one
    size = np.abs(coef[: m // 2])
    top = size[2:].max()
    nu, c = 1, complex(coef[2]) / rho**2
    for k in range(2, m // 2):
        if size[k] > 1e-4 * top:
            nu, c = k - 1, complex(coef[k]) / rho**k
            break
    # attracting directions: c h^nu < 0, so the correction points back at z0
    base = (math.pi - cmath.phase(c)) / nu
    dirs = tuple(sorted((base + 2 * math.pi * j / nu) % (2 * math.pi) for j in range(nu)))
    return ParabolicGerm(complex(z0), Q, nu, c, dirs)
