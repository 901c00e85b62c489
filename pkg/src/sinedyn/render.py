"""Raster colouring, overlays and pixmap output."""
from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .atlas import ESCAPING, JULIA, ComponentAtlas, GridSpec, classify_grid
from .core import FamilyParams
from .hairs import Hair

Coloring = Literal["escape-time", "basin-id", "binary-julia"]
COLORINGS: tuple[str, ...] = ("escape-time", "basin-id", "binary-julia")

HAIR_RGB = (230, 40, 40)
MARK_RGB = (255, 215, 0)


@dataclass(frozen=True)
class RenderJob:
    params: FamilyParams
    grid: GridSpec
    coloring: Coloring = "basin-id"
    hairs: tuple[Hair, ...] = ()
    marks: tuple[complex, ...] = ()
    output_path: str = "out.ppm"
    budget: int = 2000
    workers: int = 1

    def __post_init__(self) -> None:
        if self.coloring not in COLORINGS:
            raise ValueError(f"unknown coloring {self.coloring!r}; choose from {', '.join(COLORINGS)}")


def _hue(i: int) -> tuple[float, float, float]:
    # golden-angle hues keep neighbouring ids apart
    return colorsys.hsv_to_rgb((0.13 + 0.381966 * i) % 1.0, 0.65, 0.95)


def colorize(atlas: ComponentAtlas, coloring: Coloring) -> np.ndarray:
    """uint8 image (rows, cols, 3) for an atlas."""
    pc = atlas.pixel_class
    img = np.zeros(pc.shape + (3,), np.uint8)
    if coloring == "binary-julia":
        img[pc != JULIA] = 255
        return img
    cyc = atlas.cycle_map()
    basin = pc >= 0
    for cid in range(len(atlas.cycles)):
        r, g, b = _hue(cid)
        sel = basin & (cyc == cid)
        # petal labels of one cycle alternate in brightness
        shade = np.where(pc[sel] % 2 == 0, 1.0, 0.75)
        img[sel] = (np.stack([r * shade, g * shade, b * shade], axis=1) * 255).astype(np.uint8)
    esc = pc == ESCAPING
    if coloring == "basin-id":
        img[esc] = 245
    else:
        n = atlas.iters[esc].astype(np.float64)
        t = np.log1p(n) / math.log1p(max(1.0, float(n.max()) if n.size else 1.0))
        img[esc] = (np.stack([40 + 200 * t, 40 + 120 * t, 90 + 150 * t], axis=1)).astype(np.uint8)
    return img


def _plot(img: np.ndarray, g: GridSpec, z: complex, rgb, r: int = 0) -> None:
    ij = g.pixel_of(z)
    if ij is None:
        return
    i, j = ij
    img[max(0, i - r): i + r + 1, max(0, j - r): j + r + 1] = rgb


def draw_overlays(img: np.ndarray, g: GridSpec, hairs: Sequence[Hair], marks: Sequence[complex]) -> None:
    for h in hairs:
        pts = h.points
        for z0, z1 in zip(pts[:-1], pts[1:]):
            steps = max(1, int(abs(z1 - z0) / g.pixel) + 1)
            if steps > 4 * (g.cols + g.rows):
                continue
            for s in range(steps + 1):
                _plot(img, g, z0 + (z1 - z0) * (s / steps), HAIR_RGB)
    for z in marks:
        _plot(img, g, complex(z), MARK_RGB, r=1)


def write_ppm(path, img: np.ndarray) -> None:
    rows, cols, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img, np.uint8).tobytes())


def write_image(path, img: np.ndarray) -> None:
    path = Path(path)
    try:
        if path.suffix.lower() == ".png":
            try:
                from PIL import Image
            except ImportError as exc:
                raise RuntimeError("PNG output needs Pillow (pip install artifact[png])") from exc
            Image.fromarray(img, "RGB").save(path, format="PNG")
        else:
            write_ppm(path, img)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_render(job: RenderJob, backend: str | None = None) -> ComponentAtlas:
    atlas = classify_grid(job.params, job.grid, job.budget, workers=job.workers, backend=backend)
    img = colorize(atlas, job.coloring)
    draw_overlays(img, job.grid, job.hairs, job.marks)
    write_image(job.output_path, img)
    return atlas
