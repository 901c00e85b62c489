"""Periodic hairs by inverse-branch pullback, and the strips they cut out.

Branch convention: for w' = (w - a)/lam, the preimage in strip k is
z = (-1)^k Arcsin(w') + k pi with the principal Arcsin, so z lies in
|Re z - k pi| <= pi/2, the strip around k pi.  Inside that strip sin is
injective, so the half-plane of z is forced by w; a symbol asking for the
other half is flagged rather than corrected.
"""
from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import shapely
import shapely.affinity

from .core import FamilyParams, MagnitudeOverflow, iterate_n
from .periodic import classify_multiplier, newton_polish, parabolic_germ

Half = Literal["upper", "lower", "real"]
EndClass = Literal["T-plus", "T-minus", "undetermined"]

BRANCH_STANDOFF = 1e-12
LANDING_TOL = 1e-9
PARABOLIC_LANDING_TOL = 1e-6


class BranchPointError(ValueError):
    """The requested preimage sits within the standoff of a critical value."""


class HairIntersectionError(RuntimeError):
    """A traced boundary meets its own 2 pi translate."""


@dataclass(frozen=True)
class Itinerary:
    symbols: tuple[tuple[int, Half], ...]

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("an itinerary needs at least one symbol")
        for k, h in self.symbols:
            if h not in ("upper", "lower", "real"):
                raise ValueError(f"bad half {h!r}")

    @property
    def period(self) -> int:
        return len(self.symbols)

    @classmethod
    def parse(cls, text: str) -> "Itinerary":
        """'0+' or '0+,1-' style: strip index followed by + (upper), - (lower) or r."""
        names = {"+": "upper", "-": "lower", "r": "real"}
        out = []
        for tok in text.replace(" ", "").split(","):
            if not tok or tok[-1] not in names:
                raise ValueError(f"bad itinerary symbol {tok!r}")
            out.append((int(tok[:-1]), names[tok[-1]]))
        return cls(tuple(out))

    def __str__(self) -> str:
        mark = {"upper": "+", "lower": "-", "real": "r"}
        return ",".join(f"{k}{mark[h]}" for k, h in self.symbols)


def _half_of(z: complex) -> Half:
    if z.imag > 0:
        return "upper"
    if z.imag < 0:
        return "lower"
    return "real"


def inverse_branch_checked(p: FamilyParams, w: complex, symbol: tuple[int, Half]) -> tuple[complex, bool]:
    """(z, half_ok) with f(z) = w in strip k; half_ok is False when the half is forced otherwise."""
    k, half = symbol
    wp = (complex(w) - p.a) / p.lam
    if abs(wp - 1) <= BRANCH_STANDOFF or abs(wp + 1) <= BRANCH_STANDOFF:
        raise BranchPointError(f"(w - a)/lam = {wp!r} is within {BRANCH_STANDOFF} of a branch point")
    s = cmath.asin(wp)
    z = (s if k % 2 == 0 else -s) + k * math.pi
    got = _half_of(z)
    ok = half == got or (half == "real" and abs(z.imag) <= 1e-12 * (1 + abs(z)))
    return z, ok


def inverse_branch(p: FamilyParams, w: complex, symbol: tuple[int, Half]) -> complex:
    return inverse_branch_checked(p, w, symbol)[0]


@dataclass(frozen=True)
class Hair:
    samples: tuple[tuple[float, complex], ...]
    itinerary: Itinerary
    landing_point: complex | None
    horizontal_extent: float
    end_class: EndClass
    start_height: float
    generations: int
    samples_per_step: int
    diameters: tuple[float, ...] = field(default=())
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def points(self) -> np.ndarray:
        return np.array([z for _, z in self.samples])

    @property
    def ts(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    def translate(self, shift: complex) -> "Hair":
        lp = None if self.landing_point is None else self.landing_point + shift
        return Hair(
            tuple((t, z + shift) for t, z in self.samples), self.itinerary, lp,
            self.horizontal_extent, self.end_class, self.start_height,
            self.generations, self.samples_per_step, self.diameters, self.diagnostics,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,re,im\n")
        for t, z in self.samples:
            buf.write(f"{t!r},{z.real!r},{z.imag!r}\n")
        return buf.getvalue()


def _pull(p: FamilyParams, w: complex, itin: Itinerary) -> tuple[complex, bool]:
    """One period of pullback: the inverse of f^P following the itinerary."""
    ok = True
    for sym in reversed(itin.symbols):
        w, good = inverse_branch_checked(p, w, sym)
        ok &= good
    return w, ok


def _seed_top(itin: Itinerary, height: float) -> complex:
    k, half = itin.symbols[0]
    sign = -1.0 if half == "lower" else 1.0
    return complex(k * math.pi, sign * height)


def trace_hair(
    p: FamilyParams,
    itin: Itinerary,
    start_height: float = 10.0,
    depth: int = 30,
    samples_per_step: int = 16,
    landing_extra: int = 100,
) -> Hair:
    """Pull a seed segment back ``depth`` times along the periodic itinerary.

    The seed runs from Lambda(zeta) to zeta, zeta = k pi +- i (start_height + 1)
    and Lambda the inverse of f^P along the itinerary, so consecutive pulled
    back copies share endpoints and f^P maps generation m+1 onto generation m.
    Generation m carries parameters t in [-m, -m+1].  After the sampled
    generations the innermost point alone is pulled back up to
    ``landing_extra * depth`` more times to test landing: consecutive points
    closer than 1e-9 (1e-6 when the nearby periodic point is parabolic).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if samples_per_step < 2:
        raise ValueError("samples_per_step must be >= 2")
    diag: list[str] = []
    top = _seed_top(itin, start_height + 1.0)
    try:
        bottom, ok = _pull(p, top, itin)
    except BranchPointError as exc:
        raise BranchPointError(f"seed pullback failed: {exc}") from exc
    if not ok:
        diag.append("generation 0: requested half-plane unavailable")
    s = np.linspace(1.0, 0.0, samples_per_step + 1)
    gen = [bottom + (top - bottom) * u for u in s]  # u=1 at zeta, u=0 at Lambda(zeta)
    samples: list[tuple[float, complex]] = []
    diameters: list[float] = []
    generations = 0
    for m in range(depth + 1):
        if m > 0:
            new = []
            try:
                for z in gen:
                    w, ok = _pull(p, z, itin)
                    if not ok and f"generation {m}: requested half-plane unavailable" not in diag:
                        diag.append(f"generation {m}: requested half-plane unavailable")
                    new.append(w)
            except BranchPointError as exc:
                diag.append(f"truncated at generation {m}: {exc}")
                break
            gen = new
        generations = m + 1
        pts = np.array(gen)
        diameters.append(float(np.max(np.abs(pts[:, None] - pts[None, :]))))
        # drop the shared lower endpoint except for the innermost generation
        for u, z in zip(s, gen):
            if u == 0.0 and m < depth:
                continue
            samples.append((-m + float(u), z))
    samples.sort(key=lambda tz: tz[0])

    landing = _landing(p, itin, samples[0][1], depth, landing_extra, diag)
    ref = 0.0 if landing is None else landing.real
    extent = max(abs(z.real - ref) for _, z in samples)
    hair = Hair(
        tuple(samples), itin, landing, extent, "undetermined", start_height,
        generations, samples_per_step, tuple(diameters), tuple(diag),
    )
    return Hair(
        hair.samples, itin, landing, extent, t_end_classify(hair), start_height,
        generations, samples_per_step, hair.diameters, hair.diagnostics,
    )


def _landing(p: FamilyParams, itin: Itinerary, inner: complex, depth: int, extra: int, diag: list[str]) -> complex | None:
    P = itin.period
    root = newton_polish(p, inner, P, max_iter=200)
    stab = None
    if root is not None:
        try:
            w, mult = iterate_n(p, root, P)
            if abs(w - root) <= 1e-10 * (1 + abs(root)):
                stab = classify_multiplier(mult)
        except MagnitudeOverflow:
            stab = None
    tol = PARABOLIC_LANDING_TOL if stab == "parabolic-rational" else LANDING_TOL
    z = inner
    chord = math.inf
    steps = 0
    try:
        for steps in range(1, extra * depth + 1):
            nz, _ = _pull(p, z, itin)
            chord = abs(nz - z)
            z = nz
            if chord < tol:
                break
    except BranchPointError as exc:
        diag.append(f"landing search stopped: {exc}")
        return None
    if chord >= tol:
        diag.append(f"no landing: last chord {chord:.3g} after {steps} extra pullbacks")
        return None
    if stab is None or stab == "attracting":
        diag.append(f"converged to {z!r} but no non-attracting periodic point was confirmed")
        return z
    root = newton_polish(p, z, P, max_iter=200) or root
    gap = abs(z - root)
    if stab == "parabolic-rational":
        germ = parabolic_germ(p, root, P)
        # parabolic approach: |z_m - z0| ~ (nu |c| m)^(-1/nu)
        total = depth + steps
        expect = (germ.nu * abs(germ.c) * total) ** (-1.0 / germ.nu)
        if gap > 4 * expect:
            diag.append(f"parabolic approach too slow: gap {gap:.3g} vs {expect:.3g}")
            return None
        return root
    if gap > 1e3 * tol:
        diag.append(f"polished root {root!r} is {gap:.3g} from the innermost point")
        return z
    return root


def hair_halfplane_check(h: Hair) -> tuple[float, bool, Half | None]:
    """Smallest sampled t0 past which Im keeps one sign; verdict needs a full period after t0."""
    if len(h.samples) < 10:
        raise ValueError("need at least 10 samples")
    ts = h.ts
    ims = h.points.imag
    sign = np.sign(ims[-1])
    if sign == 0:
        return float(ts[-1]), False, None
    bad = np.flatnonzero(np.sign(ims) != sign)
    idx = 0 if bad.size == 0 else int(bad[-1]) + 1
    t0 = float(ts[idx])
    return t0, bool(ts[-1] - t0 >= 1.0), ("upper" if sign > 0 else "lower")


def hair_horizontal_extent(h: Hair) -> float:
    ref = 0.0 if h.landing_point is None else h.landing_point.real
    return float(np.max(np.abs(h.points.real - ref)))


def t_end_classify(h: Hair) -> EndClass:
    ims = h.points.imag
    hi, lo = float(ims.max()), float(ims.min())
    H = h.start_height
    if hi > H and lo > -H / 2:
        return "T-plus"
    if lo < -H and hi < H / 2:
        return "T-minus"
    return "undetermined"


def _polyline(points: np.ndarray) -> shapely.LineString:
    return shapely.LineString(np.column_stack([points.real, points.imag]))


def invariance_residuals(p: FamilyParams, h: Hair) -> np.ndarray:
    """dist(f^P(z), traced curve) / (1 + |f^P(z)|) for samples whose image stays in range."""
    P = h.itinerary.period
    line = _polyline(h.points)
    tmax = h.ts.max()
    out = []
    for t, z in h.samples:
        if t + 1 > tmax + 1e-12:
            continue
        w, _ = iterate_n(p, z, P)
        d = shapely.distance(line, shapely.Point(w.real, w.imag))
        out.append(d / (1 + abs(w)))
    return np.array(out)


def translate_gap(h: Hair, shift: float = 2 * math.pi) -> float:
    """Minimum distance between the hair polyline and its translate by ``shift``."""
    pts = h.points
    return float(shapely.distance(_polyline(pts), _polyline(pts + shift)))


def generation_ratios(h: Hair) -> np.ndarray:
    d = np.asarray(h.diameters)
    return d[1:] / d[:-1]


@dataclass(frozen=True)
class StripPartition:
    generator_hair: Hair
    mirror_hair: Hair
    fixed_point: complex
    boundary: np.ndarray  # bottom-to-top vertices of mirror, fixed point, generator
    period: float = 2 * math.pi

    def _left_of(self, z: complex) -> bool:
        """Is z left of the boundary curve (a horizontal ray to the right crosses it an odd number of times)?"""
        b = self.boundary
        x, y = b.real, b.imag
        # vertical rays close the curve at both ends
        big = 1e300
        xs = np.concatenate([[x[0]], x, [x[-1]]])
        ys = np.concatenate([[-big if y[0] < y[-1] else big], y, [big if y[0] < y[-1] else -big]])
        x0, y0 = xs[:-1], ys[:-1]
        x1, y1 = xs[1:], ys[1:]
        straddle = (y0 > z.imag) != (y1 > z.imag)
        with np.errstate(all="ignore"):
            frac = (z.imag - y0) / (y1 - y0)
            xc = x0 + frac * (x1 - x0)
        hits = straddle & (xc > z.real)
        return bool(np.count_nonzero(hits) % 2)

    def membership(self, z: complex) -> int:
        """Index k of the strip between boundary + 2 pi k and boundary + 2 pi (k+1)."""
        z = complex(z)
        k = math.floor((z.real - self.fixed_point.real) / self.period)
        # walk to the last translate that z is not left of
        while self._left_of(z - k * self.period):
            k -= 1
        while not self._left_of(z - (k + 1) * self.period):
            k += 1
        return k


def build_strip_partition(h: Hair, mirror: Hair, fixed_point: complex, tol: float = 1e-6) -> StripPartition:
    fixed_point = complex(fixed_point)
    for name, hair in (("generator", h), ("mirror", mirror)):
        if hair.landing_point is None or abs(hair.landing_point - fixed_point) > tol * (1 + abs(fixed_point)):
            raise ValueError(f"{name} hair does not land at {fixed_point!r}")
        if not math.isfinite(hair.horizontal_extent):
            raise ValueError(f"{name} hair is not horizontally bounded")
    g = h.points
    m = mirror.points
    # order: mirror from its far end in to the fixed point, then the generator outwards
    g = g if abs(g[0] - fixed_point) <= abs(g[-1] - fixed_point) else g[::-1]
    m = m if abs(m[-1] - fixed_point) <= abs(m[0] - fixed_point) else m[::-1]
    boundary = np.concatenate([m, [fixed_point], g])
    line = _polyline(boundary)
    if line.intersects(shapely.affinity.translate(line, xoff=2 * math.pi)):
        raise HairIntersectionError("boundary meets its 2 pi translate; tracing failed")
    return StripPartition(h, mirror, fixed_point, boundary)


def mirror_itinerary(itin: Itinerary) -> Itinerary:
    flip = {"upper": "lower", "lower": "upper", "real": "real"}
    return Itinerary(tuple((-k, flip[hh]) for k, hh in itin.symbols))


def hairs_landing_at(
    p: FamilyParams,
    target: complex,
    max_period: int = 1,
    k_range: Sequence[int] = range(-2, 3),
    tol: float = 1e-6,
    **trace_kwargs,
) -> list[Hair]:
    """Trace small-period itineraries and keep the hairs that land at ``target``."""
    import itertools

    found = []
    alphabet = [(k, hh) for k in k_range for hh in ("upper", "lower")]
    for P in range(1, max_period + 1):
        for syms in itertools.product(alphabet, repeat=P):
            itin = Itinerary(tuple(syms))
            try:
                hair = trace_hair(p, itin, **trace_kwargs)
            except (BranchPointError, MagnitudeOverflow):
                continue
            if hair.landing_point is not None and abs(hair.landing_point - target) <= tol * (1 + abs(target)):
                found.append(hair)
    return found

