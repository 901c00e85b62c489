"""Raster classification of the dynamical plane and component-level verdicts."""
from __future__ import annotations

import cmath
import json
import math
import struct
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import ndimage

from . import kernels
from .core import FamilyParams, MagnitudeOverflow, evaluate, iterate_n
from .periodic import (
    PeriodicPointRecord,
    find_cycle_from_orbit,
    parabolic_germ,
    rational_rotation,
)

JULIA = -1
ESCAPING = -2
FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class GridSpec:
    """Pixel-centre lattice; row 0 is the top of the frame."""

    center: complex
    width: float
    height: float
    cols: int
    rows: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", complex(self.center))
        if self.cols < 16 or self.rows < 16:
            raise ValueError("cols and rows must be >= 16")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("frame must have positive size")
        dx, dy = self.width / self.cols, self.height / self.rows
        if abs(dx - dy) > 1e-12 * max(dx, dy):
            raise ValueError(f"pixels must be square (dx={dx}, dy={dy})")

    @classmethod
    def square(cls, center: complex, side: float, n: int) -> "GridSpec":
        return cls(center, side, side, n, n)

    @property
    def pixel(self) -> float:
        return self.width / self.cols

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax)."""
        c = self.center
        return (c.real - self.width / 2, c.real + self.width / 2,
                c.imag - self.height / 2, c.imag + self.height / 2)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        # offsets are exact multiples of the pixel, so frames centred at 0
        # give pixel centres that are exact negatives of each other
        d = self.pixel
        xs = self.center.real + (np.arange(self.cols) + 0.5 - self.cols / 2) * d
        ys = self.center.imag - (np.arange(self.rows) + 0.5 - self.rows / 2) * d
        return xs, ys

    def pixel_of(self, z: complex) -> tuple[int, int] | None:
        xmin, _, _, ymax = self.bounds
        j = math.floor((z.real - xmin) / self.pixel)
        i = math.floor((ymax - z.imag) / self.pixel)
        if 0 <= i < self.rows and 0 <= j < self.cols:
            return i, j
        return None

    def refine(self, grow: float = 1.5, factor: int = 2) -> "GridSpec":
        return GridSpec(self.center, self.width * grow, self.height * grow,
                        self.cols * factor, self.rows * factor)

    def to_dict(self) -> dict:
        return {"center": [self.center.real, self.center.imag], "width": self.width,
                "height": self.height, "cols": self.cols, "rows": self.rows}


@dataclass(frozen=True)
class Cycle:
    id: int
    points: tuple[complex, ...]
    multiplier: complex
    kind: Literal["attracting", "parabolic"]
    lag: int
    radius: tuple[float, ...]
    need: int
    petal_dirs: tuple[tuple[float, ...], ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id, "kind": self.kind,
            "points": [[z.real, z.imag] for z in self.points],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "lag": self.lag, "capture_radius": list(self.radius), "streak": self.need,
        }


@dataclass(frozen=True)
class Component:
    id: int
    label: int
    cycle_id: int
    pixel_count: int
    touches_boundary: bool
    bounding_box: tuple[int, int, int, int]  # row0, row1, col0, col1 (inclusive)
    contains_critical_points: tuple[float, ...]
    seed: complex

    def to_dict(self) -> dict:
        return {
            "id": self.id, "label": self.label, "cycle_id": self.cycle_id,
            "pixel_count": self.pixel_count, "touches_boundary": self.touches_boundary,
            "bounding_box": list(self.bounding_box),
            "contains_critical_points": list(self.contains_critical_points),
        }


@dataclass(frozen=True)
class ComponentAtlas:
    params: FamilyParams
    grid: GridSpec
    budget: int
    pixel_class: np.ndarray  # int32 (rows, cols): -2 escaping, -1 julia-like, >= 0 basin label
    iters: np.ndarray
    label_cycle: tuple[int, ...]
    components: tuple[Component, ...]
    component_map: np.ndarray  # int32, -1 outside basins
    cycles: tuple[Cycle, ...]
    critical_points: tuple[float, ...]

    def category(self) -> np.ndarray:
        """0 julia-like, 1 escaping, 2 basin."""
        out = np.zeros(self.pixel_class.shape, np.uint8)
        out[self.pixel_class == ESCAPING] = 1
        out[self.pixel_class >= 0] = 2
        return out

    def cycle_map(self) -> np.ndarray:
        lut = np.asarray(self.label_cycle + (-1,), np.int32)
        pc = self.pixel_class
        return np.where(pc >= 0, lut[np.where(pc >= 0, pc, -1)], pc)

    def to_report(self) -> dict:
        return {
            "params": {"lambda": [self.params.lam.real, self.params.lam.imag],
                       "a": [self.params.a.real, self.params.a.imag]},
            "grid": self.grid.to_dict(),
            "budget": self.budget,
            "counts": {
                "julia_like": int(np.count_nonzero(self.pixel_class == JULIA)),
                "escaping": int(np.count_nonzero(self.pixel_class == ESCAPING)),
                "basin": int(np.count_nonzero(self.pixel_class >= 0)),
            },
            "cycles": [c.to_dict() for c in self.cycles],
            "components": [c.to_dict() for c in self.components],
        }


# -- cycles -------------------------------------------------------------------

def _critical_orbit_tail(p: FamilyParams, z: complex, steps: int, radius: float) -> complex | None:
    for _ in range(steps):
        try:
            z = evaluate(p, z)
        except MagnitudeOverflow:
            return None
        if abs(z) > radius:
            return None
    return z


def find_cycles(p: FamilyParams, orbit_budget: int = 100_000, max_period: int = 16) -> list[PeriodicPointRecord]:
    """Attracting and parabolic cycles met by the two critical-value orbits."""
    radius = max(50.0, 4 * (abs(p.lam) + abs(p.a)))
    found: list[PeriodicPointRecord] = []
    for cv in p.critical_values:
        tail = _critical_orbit_tail(p, cv, orbit_budget, radius)
        if tail is None:
            continue
        rec = find_cycle_from_orbit(p, tail, max_period=max_period)
        if rec is None:
            continue
        if any(min(abs(rec.location - z) for z in c.cycle) < 1e-6 for c in found):
            continue
        found.append(rec)
    found.sort(key=lambda r: min((z.real, z.imag) for z in r.cycle))
    return found


def _trap_radius(p: FamilyParams, cycle: Sequence[complex], j: int, period: int) -> float:
    """Largest radius r (from a ladder) whose circle around cycle[j] is pulled in by f^period.

    Every sample on the circle must come back, after 'period' steps, closer to
    cycle[j] than it started, and stay so over 400 returns without leaving a
    4r neighbourhood of the cycle.
    """
    z0 = cycle[j]
    for r in (0.25, 0.1, 0.04, 0.016, 6.4e-3, 2.56e-3, 1e-3, 4e-4, 1.6e-4, 6.4e-5, 2.5e-5, 1e-5):
        good = True
        for s in range(24):
            z = z0 + r * cmath.exp(2j * math.pi * (s + 0.5) / 24)
            for _ in range(400):
                try:
                    z, _ = iterate_n(p, z, period)
                except MagnitudeOverflow:
                    good = False
                    break
                if abs(z - z0) > 4 * r:
                    good = False
                    break
            if not good or abs(z - z0) >= r:
                good = False
                break
        if good:
            return r
    return 1e-6


def build_cycles(p: FamilyParams, records: Sequence[PeriodicPointRecord], parabolic_streak: int = 32) -> list[Cycle]:
    out = []
    for cid, rec in enumerate(records):
        pts = tuple(rec.cycle)
        m = len(pts)
        if rec.stability == "attracting":
            radii = tuple(_trap_radius(p, pts, j, m) for j in range(m))
            out.append(Cycle(cid, pts, rec.multiplier_chain, "attracting", m, radii, 0, ((0.0,),) * m))
            continue
        rot = rational_rotation(rec.multiplier_chain)
        q = 1 if rot is None else rot.denominator
        lag = m * q
        dirs, radii = [], []
        for z in pts:
            germ = parabolic_germ(p, z, lag)
            dirs.append(germ.attracting_dirs)
            radii.append(min(0.1, 0.3 * abs(germ.c) ** (-1.0 / germ.nu)))
        out.append(Cycle(cid, pts, rec.multiplier_chain, "parabolic", lag, tuple(radii),
                         parabolic_streak, tuple(dirs)))
    return out


def capture_table(cycles: Sequence[Cycle]) -> kernels.CaptureTable:
    re, im, cid, rad, lag, need = [], [], [], [], [], []
    for c in cycles:
        for z, r in zip(c.points, c.radius):
            re.append(z.real)
            im.append(z.imag)
            cid.append(c.id)
            rad.append(r)
            lag.append(c.lag)
            need.append(c.need)
    if not re:
        return kernels.CaptureTable.empty()
    return kernels.CaptureTable(
        np.array(re), np.array(im), np.array(cid, np.int32), np.array(rad),
        np.array(lag, np.int32), np.array(need, np.int32),
    )


# -- classification -----------------------------------------------------------

def critical_points_in(g: GridSpec) -> tuple[float, ...]:
    """Critical points pi/2 + k pi whose pixel lies in the frame (edges as in ``pixel_of``)."""
    xmin, xmax, ymin, ymax = g.bounds
    if not ymin <= 0 <= ymax:
        return ()
    k0 = math.ceil((xmin - math.pi / 2) / math.pi)
    k1 = math.floor((xmax - math.pi / 2) / math.pi)
    pts = (math.pi / 2 + k * math.pi for k in range(k0, k1 + 1))
    return tuple(x for x in pts if g.pixel_of(complex(x, 0)) is not None)


def _labels(cycles: Sequence[Cycle], table: kernels.CaptureTable, res: kernels.PixelResult):
    """Basin keys (cycle, cycle point at phase 0, petal) -> dense labels."""
    lab = res.label
    basin = lab >= 0
    idx = np.flatnonzero(basin)
    point = res.end_idx[idx]
    petal = np.zeros(idx.size, np.int64)
    offsets = {}
    start = 0
    for c in cycles:
        offsets[c.id] = start
        start += len(c.points)
    for c in cycles:
        if c.kind != "parabolic":
            continue
        sel = lab[idx] == c.id
        for j, z in enumerate(c.points):
            mask = sel & (point == offsets[c.id] + j)
            if not np.any(mask):
                continue
            ang = np.angle(res.end[idx[mask]] - z)
            dirs = np.asarray(c.petal_dirs[j])
            diff = np.abs(np.angle(np.exp(1j * (ang[:, None] - dirs[None, :]))))
            petal[mask] = np.argmin(diff, axis=1)
    keys = np.stack([lab[idx].astype(np.int64), point.astype(np.int64), petal], axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    out = lab.astype(np.int32).copy()
    out[idx] = inv.ravel().astype(np.int32)
    return out, tuple(int(u[0]) for u in uniq)


def _components(pc: np.ndarray, g: GridSpec, label_cycle: Sequence[int], crit: Sequence[float]):
    cmap = np.full(pc.shape, -1, np.int32)
    comps = []
    xs, ys = g.axes()
    crit_px = []
    for c in crit:
        ij = g.pixel_of(complex(c, 0))
        if ij is not None:
            crit_px.append((c, ij))
    next_id = 0
    for lab_id in range(len(label_cycle)):
        lab, n = ndimage.label(pc == lab_id, structure=FOUR)
        if n == 0:
            continue
        slices = ndimage.find_objects(lab)
        for k in range(1, n + 1):
            sl = slices[k - 1]
            sub = lab[sl] == k
            r0, r1 = sl[0].start, sl[0].stop - 1
            c0, c1 = sl[1].start, sl[1].stop - 1
            touches = r0 == 0 or c0 == 0 or r1 == pc.shape[0] - 1 or c1 == pc.shape[1] - 1
            cmap[sl][sub] = next_id
            rr, cc = np.nonzero(sub)
            # seed: the member pixel closest to the component's pixel centroid
            mid = np.argmin((rr - rr.mean()) ** 2 + (cc - cc.mean()) ** 2)
            i, j = r0 + rr[mid], c0 + cc[mid]
            contained = tuple(cp for cp, (ci, cj) in crit_px if lab[ci, cj] == k)
            comps.append(Component(
                next_id, lab_id, label_cycle[lab_id], int(sub.sum()), bool(touches),
                (int(r0), int(r1), int(c0), int(c1)), contained,
                complex(xs[j], ys[i]),
            ))
            next_id += 1
    return tuple(comps), cmap


def classify_grid(
    p: FamilyParams,
    g: GridSpec,
    budget: int = 2000,
    workers: int = 1,
    backend: str | None = None,
    cycles: Sequence[Cycle] | None = None,
    orbit_budget: int = 100_000,
) -> ComponentAtlas:
    """Classify every pixel centre and flood-fill the basins.

    Cycles come from the critical-value orbits unless given.  A pixel joins
    an attracting cycle's basin on entering its trapping disk, and a
    parabolic basin after ``need`` consecutive approaches inside the petal
    radius; parabolic basin pixels are further split by the petal they
    arrive in, so components meeting only at the parabolic point stay apart.
    """
    if budget < 100:
        raise ValueError("budget must be >= 100")
    if cycles is None:
        cycles = build_cycles(p, find_cycles(p, orbit_budget))
    table = capture_table(cycles)
    xs, ys = g.axes()
    X, Y = np.meshgrid(xs, ys)
    escape_im = max(50.0, 4 * (abs(p.lam) + abs(p.a)))
    res = kernels.classify(X, Y, p.lam, p.a, table, budget, escape_im=escape_im,
                           workers=workers, backend=backend)
    pc, label_cycle = _labels(cycles, table, res)
    pc = pc.reshape(g.rows, g.cols)
    crit = critical_points_in(g)
    comps, cmap = _components(pc, g, label_cycle, crit)
    return ComponentAtlas(p, g, budget, pc, res.iters.reshape(g.rows, g.cols), label_cycle,
                          comps, cmap, tuple(cycles), crit)


# -- verdicts -----------------------------------------------------------------

@dataclass(frozen=True)
class BoundednessVerdict:
    component_id: int
    verdict: Literal["bounded", "unbounded-suspected", "undetermined"]
    evidence: Literal["enclosed-by-julia-ring", "touches-frame-at-all-refinements", "inconclusive"]
    levels: int = 0

    def to_dict(self) -> dict:
        return {"component_id": self.component_id, "verdict": self.verdict,
                "evidence": self.evidence, "levels": self.levels}


def _match(atlas: ComponentAtlas, comp: Component) -> Component | None:
    ij = atlas.grid.pixel_of(comp.seed)
    if ij is None:
        return None
    i, j = ij
    cid = atlas.component_map[i, j]
    if cid >= 0 and atlas.components[cid].cycle_id == comp.cycle_id:
        return atlas.components[cid]
    # look in a small neighbourhood for the same cycle
    r = 2
    sub = atlas.component_map[max(0, i - r): i + r + 1, max(0, j - r): j + r + 1]
    for c in np.unique(sub[sub >= 0]):
        if atlas.components[c].cycle_id == comp.cycle_id:
            return atlas.components[c]
    return None


def boundedness_verdict(
    atlas: ComponentAtlas,
    refinements: int = 3,
    grow: float = 1.5,
    workers: int = 1,
    backend: str | None = None,
) -> list[BoundednessVerdict]:
    """Ring test on the atlas, then on frames grown by ``grow`` with doubled pixel counts.

    A component clear of the frame is ringed by pixels outside it: julia-like,
    escaping, or another basin label.  Distinct labels cannot share an open
    boundary, so a label change also marks a julia curve below pixel scale.
    """
    if refinements < 1:
        raise ValueError("refinements must be >= 1")
    verdicts: dict[int, BoundednessVerdict] = {}
    pending = []
    for c in atlas.components:
        if not c.touches_boundary:
            verdicts[c.id] = BoundednessVerdict(c.id, "bounded", "enclosed-by-julia-ring", 0)
        else:
            pending.append(c)
    g = atlas.grid
    history: dict[int, list[float]] = {c.id: [c.pixel_count * g.pixel**2] for c in pending}
    for level in range(1, refinements + 1):
        if not pending:
            break
        g = g.refine(grow)
        finer = classify_grid(atlas.params, g, atlas.budget, workers=workers,
                              backend=backend, cycles=atlas.cycles)
        still = []
        for c in pending:
            m = _match(finer, c)
            if m is None:
                history[c.id].append(math.nan)
                still.append(c)
                continue
            if not m.touches_boundary:
                verdicts[c.id] = BoundednessVerdict(c.id, "bounded", "enclosed-by-julia-ring", level)
            else:
                history[c.id].append(m.pixel_count * g.pixel**2)
                still.append(c)
        pending = still
    for c in pending:
        areas = history[c.id]
        # one growth step is too little evidence: a sliver cut by the frame grows too
        grew = refinements >= 2 and len(areas) == refinements + 1 and all(
            math.isfinite(b) and b > 1.2 * a for a, b in zip(areas, areas[1:]))
        if grew:
            verdicts[c.id] = BoundednessVerdict(c.id, "unbounded-suspected",
                                                "touches-frame-at-all-refinements", refinements)
        else:
            verdicts[c.id] = BoundednessVerdict(c.id, "undetermined", "inconclusive", refinements)
    return [verdicts[c.id] for c in atlas.components]


def critical_containment_report(atlas: ComponentAtlas) -> list[dict]:
    crit = atlas.critical_points
    out = []
    for c in atlas.components:
        out.append({
            "component_id": c.id,
            "cycle_id": c.cycle_id,
            "critical_points": list(c.contains_critical_points),
            "contains_all": bool(crit) and len(c.contains_critical_points) == len(crit),
        })
    return out


DisjointVerdict = Literal["disjoint-type-evidence", "not-disjoint-type", "undetermined"]


@dataclass(frozen=True)
class DisjointTypeReport:
    verdict: DisjointVerdict
    limits: tuple[complex | None, ...]
    cycle_ids: tuple[int, ...]
    julia_like_fraction: float
    reason: str


def disjoint_type_check(
    p: FamilyParams,
    budget: int = 20_000,
    grid: GridSpec | None = None,
    orbit_budget: int = 100_000,
    julia_tol: float = 0.0,
    workers: int = 1,
    backend: str | None = None,
) -> DisjointTypeReport:
    """Both critical values must share one attracting fixed point, and the
    atlas must show that single basin holding every non-escaping pixel
    (at most ``julia_tol`` of the frame may stay julia-like)."""
    radius = max(50.0, 4 * (abs(p.lam) + abs(p.a)))
    limits = []
    for cv in p.critical_values:
        tail = _critical_orbit_tail(p, cv, orbit_budget, radius)
        if tail is None:
            limits.append(None)
            continue
        rec = find_cycle_from_orbit(p, tail)
        limits.append(rec)
    if any(r is None for r in limits):
        escaped = [
            _critical_orbit_tail(p, cv, orbit_budget, radius) is None for cv in p.critical_values
        ]
        if any(escaped):
            # an escaping critical value rules out hyperbolicity
            return DisjointTypeReport("not-disjoint-type", (), (), math.nan, "a critical orbit escapes")
        return DisjointTypeReport("undetermined", (), (), math.nan, "a critical orbit has no detected limit")
    a, b = limits
    pts = tuple(r.location for r in limits)
    if min(abs(a.location - z) for z in b.cycle) > 1e-6:
        return DisjointTypeReport("not-disjoint-type", pts, (), math.nan, "critical orbits have different limits")
    if a.period != 1 or a.stability != "attracting":
        return DisjointTypeReport("undetermined", pts, (), math.nan,
                                  f"common limit is {a.stability} of period {a.period}")
    if grid is None:
        grid = GridSpec.square(a.location.real, 4 * math.pi, 128)
    # weak attraction: capture takes a few multiples of 1/(1 - |m|) steps
    slack = 1.0 - abs(a.multiplier_chain)
    budget = max(budget, min(1_000_000, math.ceil(8 / slack)))
    atlas = classify_grid(p, grid, budget, workers=workers, backend=backend,
                          cycles=build_cycles(p, [a]))
    ids = tuple(sorted(set(atlas.label_cycle)))
    frac = float(np.count_nonzero(atlas.pixel_class == JULIA)) / atlas.pixel_class.size
    if len(ids) == 1 and frac <= julia_tol:
        return DisjointTypeReport("disjoint-type-evidence", pts, ids, frac, "single basin, no stray pixels")
    return DisjointTypeReport("undetermined", pts, ids, frac,
                              f"{frac:.2e} of pixels julia-like, basin ids {ids}")


def interval_selfmap_check(p: FamilyParams, interval: tuple[float, float], tol: float = 1e-12) -> bool:
    """Is the range of lam*sin(x) + a over [lo, hi] inside [lo, hi]?

    The range comes from the endpoints and the interior critical points; the
    containment allows ``tol`` for the rounding in lam*sin + a.
    """
    if not p.is_real:
        raise ValueError("interval check needs real lam and a")
    lo, hi = map(float, interval)
    if not lo <= hi:
        raise ValueError("empty interval")
    xs = [lo, hi]
    k0 = math.ceil((lo - math.pi / 2) / math.pi)
    k1 = math.floor((hi - math.pi / 2) / math.pi)
    xs += [math.pi / 2 + k * math.pi for k in range(k0, k1 + 1)]
    s = [math.sin(x) for x in xs]
    s_lo, s_hi = min(s), max(s)
    lam, a = p.lam.real, p.a.real
    vals = (lam * s_lo + a, lam * s_hi + a)
    return min(vals) >= lo - tol and max(vals) <= hi + tol


# -- FATL raster ----------------------------------------------------------------

FATL_MAGIC = b"FATL"
_HEADER = struct.Struct("<4sII4d")


def encode_pixels(pc: np.ndarray) -> np.ndarray:
    """0 julia-like, 1 escaping, 2 + label for basins (saturating at 255)."""
    out = np.where(pc < 0, np.where(pc == ESCAPING, 1, 0), np.minimum(pc + 2, 255))
    return out.astype(np.uint8)


def write_fatl(path, atlas: ComponentAtlas) -> None:
    xmin, xmax, ymin, ymax = atlas.grid.bounds
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FATL_MAGIC, atlas.grid.cols, atlas.grid.rows, xmin, xmax, ymin, ymax))
        fh.write(encode_pixels(atlas.pixel_class).tobytes())


def read_fatl(path) -> tuple[tuple[float, float, float, float], np.ndarray]:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, cols, rows, *bounds = _HEADER.unpack(head)
        if magic != FATL_MAGIC:
            raise ValueError(f"{path}: not a FATL raster")
        data = np.frombuffer(fh.read(), np.uint8)
    if data.size != cols * rows:
        raise ValueError(f"{path}: expected {cols * rows} pixels, found {data.size}")
    return tuple(bounds), data.reshape(rows, cols)


def report_json(atlas: ComponentAtlas, verdicts: Sequence[BoundednessVerdict] | None = None) -> str:
    doc = atlas.to_report()
    if verdicts is not None:
        doc["verdicts"] = [v.to_dict() for v in verdicts]
    doc["critical_containment"] = critical_containment_report(atlas)
    return json.dumps(doc, indent=2)
