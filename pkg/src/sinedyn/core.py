"""Evaluation of the extended sine family f(z) = lam*sin(z) + a.

Everything here works on plain Python ``complex`` values.  The map is evaluated
through the real decomposition

    sin(x + iy) = sin(x) cosh(y) + i cos(x) sinh(y)

so that the odd/even structure of sin, cos, sinh and cosh carries over to the
computed values exactly (the compiled grid kernel uses the same expression, in
the same order, and therefore produces bit-identical orbits).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

HALF_PI = math.pi / 2
TWO_PI = 2 * math.pi

Verdict = Literal["escaped", "attracted", "cycled", "budget-exhausted"]


class MagnitudeOverflow(ArithmeticError):
    """The value of the map is not representable in double precision."""


def _require_finite(*values: complex) -> None:
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite input {v!r}")


@dataclass(frozen=True)
class SingularData:
    critical_points: tuple[float, ...]
    critical_values: tuple[complex, complex]


@dataclass(frozen=True)
class FamilyParams:
    """The pair (lam, a) of f(z) = lam*sin(z) + a."""

    lam: complex
    a: complex = 0j

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "a", complex(self.a))
        _require_finite(self.lam, self.a)
        if self.lam == 0:
            raise ValueError("lam must be non-zero")

    def __call__(self, z: complex) -> complex:
        return evaluate(self, z)

    @property
    def is_real(self) -> bool:
        return self.lam.imag == 0 and self.a.imag == 0

    def conjugate(self) -> "FamilyParams":
        return FamilyParams(self.lam.conjugate(), self.a.conjugate())

    def singular_data(self, k_window: int = 2) -> SingularData:
        """Critical points pi/2 + k*pi for |k| <= k_window and the two critical values."""
        points = tuple(HALF_PI + k * math.pi for k in range(-k_window, k_window + 1))
        for c in points:
            d = derivative(self, complex(c))
            if abs(d) > 1e-12 * abs(self.lam) * (1 + abs(c)):
                raise AssertionError(f"f'({c}) = {d} is not zero")
        return SingularData(points, (self.a + self.lam, self.a - self.lam))

    @property
    def critical_values(self) -> tuple[complex, complex]:
        return (self.a + self.lam, self.a - self.lam)


def _sin_parts(z: complex) -> tuple[float, float, float, float]:
    x, y = z.real, z.imag
    try:
        ch = math.cosh(y)
        sh = math.sinh(y)
    except OverflowError as exc:
        raise MagnitudeOverflow(f"|Im z| = {abs(y):.6g} overflows cosh/sinh") from exc
    return math.sin(x), math.cos(x), ch, sh


def evaluate(p: FamilyParams, z: complex) -> complex:
    """Return lam*sin(z) + a."""
    z = complex(z)
    _require_finite(z)
    sx, cx, ch, sh = _sin_parts(z)
    s_re = sx * ch
    s_im = cx * sh
    lr, li = p.lam.real, p.lam.imag
    re = lr * s_re - li * s_im + p.a.real
    im = lr * s_im + li * s_re + p.a.imag
    if not (math.isfinite(re) and math.isfinite(im)):
        raise MagnitudeOverflow(f"f({z!r}) is not representable")
    return complex(re, im)


def derivative(p: FamilyParams, z: complex) -> complex:
    """Return lam*cos(z)."""
    z = complex(z)
    _require_finite(z)
    sx, cx, ch, sh = _sin_parts(z)
    c_re = cx * ch
    c_im = -sx * sh
    lr, li = p.lam.real, p.lam.imag
    re = lr * c_re - li * c_im
    im = lr * c_im + li * c_re
    if not (math.isfinite(re) and math.isfinite(im)):
        raise MagnitudeOverflow(f"f'({z!r}) is not representable")
    return complex(re, im)


def iterate_n(p: FamilyParams, z: complex, n: int) -> tuple[complex, complex]:
    """Return (f^n(z), (f^n)'(z))."""
    d = 1 + 0j
    for _ in range(n):
        d *= derivative(p, z)
        z = evaluate(p, z)
    return z, d


@dataclass(frozen=True)
class OrbitRecord:
    seed: complex
    points: tuple[complex, ...]
    verdict: Verdict
    steps_used: int
    limit: complex | None = None
    period: int | None = None
    overflow: bool = False
    multiplier: complex | None = None
    notes: tuple[str, ...] = field(default=())


def default_escape_radius(p: FamilyParams) -> float:
    return max(50.0, 4 * (abs(p.lam) + abs(p.a)))


def _polish_cycle(p: FamilyParams, z: complex, q: int, iters: int = 30) -> complex | None:
    for _ in range(iters):
        try:
            fz, d = iterate_n(p, z, q)
        except MagnitudeOverflow:
            return None
        if d == 1:
            return None
        step = (fz - z) / (d - 1)
        z -= step
        if abs(step) <= 1e-13 * (1 + abs(z)):
            break
    return z


def _minimal_period(p: FamilyParams, z: complex, q: int, tol: float = 1e-9) -> int:
    for d in range(1, q):
        if q % d == 0 and abs(iterate_n(p, z, d)[0] - z) <= tol * (1 + abs(z)):
            return d
    return q


def iterate(
    p: FamilyParams,
    seed: complex,
    budget: int,
    escape_radius: float | None = None,
    attraction_tol: float = 1e-9,
    window: int = 8,
    max_period: int = 16,
) -> OrbitRecord:
    """Iterate ``seed`` for at most ``budget`` steps and classify the orbit.

    ``escaped`` once |z_n| exceeds ``escape_radius`` (or the map overflows);
    ``attracted`` once consecutive points stay within ``attraction_tol`` for
    ``window`` steps and the Newton-polished limit is a contracting fixed point;
    ``cycled`` for the same test on f^q, 2 <= q <= max_period.  Parabolic
    limits fail the contraction test and end as ``budget-exhausted`` with the
    whole orbit attached.
    """
    seed = complex(seed)
    _require_finite(seed)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    radius = default_escape_radius(p) if escape_radius is None else float(escape_radius)
    if not radius > abs(p.a) + abs(p.lam) + 1:
        raise ValueError("escape_radius must exceed |a| + |lam| + 1")

    points = [seed]
    streaks = [0] * (max_period + 1)
    z = seed
    if abs(z) > radius:
        return OrbitRecord(seed, tuple(points), "escaped", 0)
    for n in range(budget):
        try:
            z = evaluate(p, z)
        except MagnitudeOverflow:
            return OrbitRecord(seed, tuple(points), "escaped", n + 1, overflow=True)
        points.append(z)
        if abs(z) > radius:
            return OrbitRecord(seed, tuple(points), "escaped", n + 1)
        tol = attraction_tol * (1 + abs(z))
        top = min(max_period, len(points) - 1)
        for q in range(1, top + 1):
            if abs(z - points[-1 - q]) < tol:
                streaks[q] += 1
            else:
                streaks[q] = 0
            if streaks[q] >= window and streaks[q] % window == 0:
                limit = _polish_cycle(p, z, q)
                if limit is None:
                    continue
                try:
                    # f^2 near-returns can beat f near-returns when f' is near -1
                    q = _minimal_period(p, limit, q)
                    _, mult = iterate_n(p, limit, q)
                except MagnitudeOverflow:
                    continue
                if abs(mult) < 1 - 1e-9:
                    verdict: Verdict = "attracted" if q == 1 else "cycled"
                    return OrbitRecord(
                        seed, tuple(points), verdict, n + 1,
                        limit=limit, period=q, multiplier=mult,
                    )
                break  # lower q already matched; larger q is implied
            if streaks[q]:
                break
    return OrbitRecord(seed, tuple(points), "budget-exhausted", budget)


def symmetry_check(
    p: FamilyParams, w: complex, mode: Literal["critical", "central"] = "critical"
) -> tuple[complex, complex]:
    """Pairs that must coincide.

    ``critical``: (f(pi/2 + w), f(pi/2 - w)), valid for every (lam, a).
    ``central``: (f(-w), 2a - f(w)); for a = 0 this is f(-w) = -f(w).
    """
    w = complex(w)
    if mode == "critical":
        return evaluate(p, HALF_PI + w), evaluate(p, HALF_PI - w)
    if mode == "central":
        return evaluate(p, -w), 2 * p.a - evaluate(p, w)
    raise ValueError(f"unknown mode {mode!r}")


def periodicity_check(p: FamilyParams, z: complex, k: int = 1) -> tuple[complex, complex]:
    z = complex(z)
    return evaluate(p, z), evaluate(p, z + TWO_PI * k)


def growth_bound_check(z: complex) -> tuple[float, float, float]:
    """(|sin z|, cosh|Im z|, e^|z|), which must be non-decreasing."""
    z = complex(z)
    _require_finite(z)
    sx, cx, ch, sh = _sin_parts(z)
    try:
        ez = math.exp(abs(z))
    except OverflowError as exc:
        raise MagnitudeOverflow(f"e^|z| overflows for |z| = {abs(z):.6g}") from exc
    return math.hypot(sx * ch, cx * sh), ch, ez
