"""Quantitative escape arguments: the sinh chain, the extended-family induction
and the post-singular probe.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import mpmath

from .core import FamilyParams, MagnitudeOverflow, OrbitRecord, evaluate, iterate
from .periodic import find_cycle_from_orbit

MAX_CHAIN_STEPS = 5


def _log_sinh(y: float) -> float:
    """log(sinh y) for y > 0 without overflow."""
    if y < 20:
        return math.log(math.sinh(y))
    return y - math.log(2) + math.log1p(-math.exp(-2 * y))


@dataclass(frozen=True)
class EscapeChainConfig:
    N: int
    c1: float
    y0: float

    def __post_init__(self) -> None:
        if not (isinstance(self.N, int) and self.N > 3):
            raise ValueError("N must be an integer > 3")
        if not self.c1 > 10:
            raise ValueError("c1 must exceed 10")
        if not math.sinh(abs(self.y0)) > self.c1 * self.N:
            raise ValueError("sinh|y0| must exceed c1*N")

    @classmethod
    def minimal(cls, N: int = 4, c1: float = 11.0, margin: float = 1e-6) -> "EscapeChainConfig":
        return cls(N, c1, math.asinh(c1 * N) + margin)


@dataclass(frozen=True)
class ChainRow:
    n: int
    lower_bound: float
    observed: float | None
    log_observed: float
    holds: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ChainReport:
    rows: tuple[ChainRow, ...]
    c: tuple[float, ...]
    recursion_holds: tuple[bool, ...]
    truncated: bool

    @property
    def ok(self) -> bool:
        return all(r.holds for r in self.rows) and all(self.recursion_holds)


def chain_constants(c1: float, N: float, steps: int) -> tuple[list[float], list[bool], bool]:
    """c_{n+1} = 2 cosh(sqrt(c_n^2 - 1) N / 2) with the check c_{n+1} > c_n^2."""
    cs, ok = [float(c1)], []
    for _ in range(steps):
        c = cs[-1]
        alpha = math.sqrt(c * c - 1) * N
        try:
            nxt = 2 * math.cosh(alpha / 2)
            sq = c * c
        except OverflowError:
            return cs, ok, True
        if not math.isfinite(nxt) or not math.isfinite(sq):
            return cs, ok, True
        cs.append(nxt)
        ok.append(nxt > sq)
    return cs, ok, False


def sinh_chain_verify(cfg: EscapeChainConfig, steps: int = 3) -> ChainReport:
    """Bounds of the parabolic-case chain against the axis orbit z0 = i*y0 of sin.

    Row 0 compares c1*N with |f(z0)|; row n >= 1 compares
    sqrt(c1^(2^n) - 1) * N with |y_n|.  On the imaginary axis f(iy) = i sinh(y)
    exactly, so |y_n| is followed in log form once it leaves double range
    (``observed`` is then None and ``log_observed`` carries the value).
    """
    if not 1 <= steps <= MAX_CHAIN_STEPS:
        raise ValueError(f"steps must lie in 1..{MAX_CHAIN_STEPS}")
    N, c1 = cfg.N, cfg.c1
    cs, rec_ok, truncated = chain_constants(c1, N, steps - 1)

    rows = []
    y = abs(cfg.y0)
    # row 0: |f(z0)| = sinh|y0|
    log_f = _log_sinh(y)
    rows.append(ChainRow(0, c1 * N, math.sinh(y), log_f, log_f > math.log(c1 * N)))
    for n in range(1, steps + 1):
        if not math.isfinite(y):
            truncated = True
            break
        log_y = _log_sinh(y)
        y = math.exp(log_y) if log_y < 709 else math.inf
        # log of sqrt(c1^(2^n) - 1) * N, dropping the -1 once it is negligible
        e = 2.0**n * math.log(c1)
        log_bound = (0.5 * math.log(math.expm1(e)) if e < 700 else 0.5 * e) + math.log(N)
        bound = math.exp(log_bound) if log_bound < 709 else math.inf
        observed = y if math.isfinite(y) else None
        rows.append(ChainRow(n, bound, observed, log_y, log_y > log_bound))
    return ChainReport(tuple(rows), tuple(cs), tuple(rec_ok), truncated)


def recursion_grid_check(Ns=range(4, 11), c1s=(10.5, 11, 15, 25, 50)) -> list[tuple[int, float, bool]]:
    """2cosh(alpha/2) > 1 + alpha^2/8 > c1^2 with alpha = sqrt(c1^2-1) N, over a grid."""
    out = []
    for N in Ns:
        for c1 in c1s:
            alpha = math.sqrt(c1 * c1 - 1) * N
            mid = 1 + alpha * alpha / 8
            out.append((N, c1, 2 * math.cosh(alpha / 2) > mid > c1 * c1))
    return out


@dataclass(frozen=True)
class StripOrbit:
    record: OrbitRecord
    in_strip: tuple[bool, ...]
    first_exit: int | None
    im_abs: tuple[float, ...]


def strip_escape_orbit(
    p: FamilyParams, z0: complex, N: int, budget: int = 64, escape_radius: float = math.inf
) -> StripOrbit:
    """Orbit of z0 with a per-step flag for |Re z_n| < N; runs to overflow by default."""
    z0 = complex(z0)
    if not abs(z0.real) < N:
        raise ValueError("|Re z0| must be < N")
    rec = iterate(p, z0, budget, escape_radius=escape_radius)
    flags = tuple(abs(z.real) < N for z in rec.points)
    first_exit = next((i for i, f in enumerate(flags) if not f), None)
    return StripOrbit(rec, flags, first_exit, tuple(abs(z.imag) for z in rec.points))


@dataclass(frozen=True)
class ExtendedSeedConfig:
    params: FamilyParams
    y0: float
    v0: float
    epsilon: float | None = None
    u0: float | None = None

    def __post_init__(self) -> None:
        a = abs(self.params.a)
        lam = abs(self.params.lam)
        y0 = abs(self.y0)
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", a / 2)
        checks = [
            (math.sinh(y0) > 3 * a, "sinh|y0| > 3|a|"),
            (math.cosh(y0) > 4, "cosh|y0| > 4"),
            (lam * math.exp(-y0) < a, "|lam| e^-y0 < |a|"),
            (abs(self.v0) > y0 + a, "|v0| > |y0| + |a|"),
            (0 < self.epsilon < a, "0 < epsilon < |a|"),
        ]
        for ok, name in checks:
            if not ok:
                raise ValueError(f"precondition violated: {name}")
        if self.u0 is None:
            # real part that sends w0 straight up (or down) under lam*sin
            th = cmath.phase(self.params.lam)
            u = th if self.v0 > 0 else -th
            object.__setattr__(self, "u0", math.remainder(u, math.pi))


def random_extended_config(rng, params: FamilyParams | None = None) -> ExtendedSeedConfig:
    """A valid ExtendedSeedConfig drawn from ``rng`` (a numpy Generator).

    Without ``params``, |lam| is drawn from [1, 2.5] and |a| from [0.2, 2]
    with uniform arguments.  y0 sits just above the smallest height the
    preconditions allow and |v0| just above |y0| + |a|.
    """
    if params is None:
        lam = rng.uniform(1.0, 2.5) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        a = rng.uniform(0.2, 2.0) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        params = FamilyParams(lam, a)
    la, aa = abs(params.lam), abs(params.a)
    if aa == 0:
        raise ValueError("the extended family needs a != 0")
    ymin = max(math.asinh(3 * aa), math.acosh(4.0), math.log(la / aa))
    y0 = ymin + rng.uniform(1e-3, 0.5)
    v0 = (y0 + aa + rng.uniform(1e-3, 0.5)) * (1 if rng.uniform() < 0.5 else -1)
    return ExtendedSeedConfig(params, y0, v0)


@dataclass(frozen=True)
class InductionRow:
    n: int
    v_abs: float | None
    comparison: float | None
    holds: bool
    log_v: float = math.nan
    log_comparison: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class InductionReport:
    rows: tuple[InductionRow, ...]
    overflow_at: int | None
    margins: tuple[float, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return all(r.holds for r in self.rows)


def induction_margin(lam_abs: float, a_abs: float, eps: float, y_n: float, y0: float) -> float:
    """The chain's lower bound for |v_{n+1}| - |y_{n+1}|, by the |a| > 1 / |a| < 1 split."""
    y = abs(y_n)
    if y > 700:
        return math.inf
    if a_abs > 1:
        return math.sinh(y) - eps - a_abs
    return -lam_abs * math.exp(-abs(y0)) + lam_abs * math.cosh(y) * a_abs - eps - a_abs


# digits kept beyond log10|w| so Re w still fixes the phase of e^{iw}
_GUARD_DIGITS = 30
_MAX_DIGITS = 10_000


def _mp_orbits(cfg: ExtendedSeedConfig, steps: int):
    """Both induction orbits in mpmath, redone at higher precision as they grow.

    Yields (w_n, z_n) for n = 0.. until ``steps`` or until the next step would
    need more than ``_MAX_DIGITS`` digits.
    """
    p = cfg.params
    dps = _GUARD_DIGITS
    while True:
        with mpmath.workdps(dps):
            lam, a = mpmath.mpc(p.lam), mpmath.mpc(p.a)
            w = mpmath.mpc(cfg.u0, cfg.v0)
            z = mpmath.mpc(cfg.u0, math.copysign(abs(cfg.y0), cfg.v0))
            out = [(w, z)]
            need = dps
            for _ in range(steps):
                size = max(abs(w), abs(z), 1)
                need = int(mpmath.log10(size)) + _GUARD_DIGITS
                if need > dps:
                    break
                w, z = lam * mpmath.sin(w) + a, lam * mpmath.sin(z)
                out.append((w, z))
            else:
                return out
        if need > _MAX_DIGITS:
            return out
        dps = need + _GUARD_DIGITS


def _as_float(x) -> float | None:
    f = float(x)
    return f if math.isfinite(f) else None


def extended_induction_verify(cfg: ExtendedSeedConfig, steps: int = 4) -> InductionReport:
    """|v_n| > |y_n| + |a| along w_n = f^n(u0 + i v0) against z_n = (lam sin)^n(u0 + i y0).

    The comparison seed takes the sign of v0 so both orbits start in the same
    half-plane.  Orbits run in mpmath because |v_2| already reaches 1e13 and
    beyond; rows stop once a further step needs more than 10^4 digits.
    Rows past double range carry ``v_abs``/``comparison`` as None and are
    compared through their logs.
    """
    p = cfg.params
    if abs(p.lam) < 1:
        raise ValueError("the induction needs |lam| >= 1")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    a_abs = abs(p.a)
    orbit = _mp_orbits(cfg, steps)
    rows, margins = [], []
    for n, (w, z) in enumerate(orbit):
        v = abs(mpmath.im(w))
        comp = abs(mpmath.im(z)) + a_abs
        rows.append(InductionRow(n, _as_float(v), _as_float(comp), bool(v > comp),
                                 float(mpmath.log(v)), float(mpmath.log(comp))))
        zi = _as_float(mpmath.im(z))
        margins.append(induction_margin(abs(p.lam), a_abs, cfg.epsilon,
                                        zi if zi is not None else math.inf, cfg.y0))
    overflow_at = len(orbit) if len(orbit) <= steps else None
    return InductionReport(tuple(rows), overflow_at, tuple(margins))


ProbeVerdict = Literal["bounded-so-far", "escaped", "undetermined"]


@dataclass(frozen=True)
class PostSingularProbe:
    params: FamilyParams
    horizon: int
    radius: float
    verdict: ProbeVerdict
    max_modulus: float
    final: tuple[complex, ...]
    limits: tuple[complex | None, ...]

    def to_dict(self) -> dict:
        pair = lambda z: None if z is None else [z.real, z.imag]  # noqa: E731
        return {
            "lambda": pair(self.params.lam),
            "a": pair(self.params.a),
            "horizon": self.horizon,
            "radius": self.radius,
            "verdict": self.verdict,
            "max_modulus": self.max_modulus,
            "final": [pair(z) for z in self.final],
            "limits": [pair(z) for z in self.limits],
        }


def default_probe_radius(p: FamilyParams) -> float:
    return 10 * (abs(p.lam) + abs(p.a) + 1)


def _orbit_max(p: FamilyParams, z: complex, horizon: int, radius: float) -> tuple[str, float, complex]:
    top = abs(z)
    for _ in range(horizon):
        try:
            z = evaluate(p, z)
        except MagnitudeOverflow:
            return "escaped", math.inf, z
        m = abs(z)
        if m > top:
            top = m
        if m > radius:
            return "escaped", top, z
    return "inside", top, z


def post_singular_probe(
    p: FamilyParams,
    horizon: int = 100_000,
    radius: float | None = None,
    k_window: int = 0,
) -> PostSingularProbe:
    """Follow the singular orbits; by 2 pi periodicity the two critical values suffice.

    ``k_window`` > 0 also iterates f(pi/2 + k pi) for |k| <= k_window, which
    repeats the same two orbits and must not change the verdict.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    radius = default_probe_radius(p) if radius is None else float(radius)
    seeds = list(p.critical_values)
    for k in range(-k_window, k_window + 1) if k_window else ():
        seeds.append(evaluate(p, complex(math.pi / 2 + k * math.pi)))
    top, finals, limits = 0.0, [], []
    verdict: ProbeVerdict = "bounded-so-far"
    for s in seeds:
        state, m, last = _orbit_max(p, s, horizon, radius)
        top = max(top, m)
        finals.append(last)
        if state == "escaped":
            verdict = "escaped"
            limits.append(None)
            continue
        cyc = find_cycle_from_orbit(p, last)
        limits.append(None if cyc is None else cyc.location)
        if cyc is None and verdict != "escaped":
            verdict = "undetermined"
    return PostSingularProbe(p, horizon, radius, verdict, top, tuple(finals), tuple(limits))
