"""Kernel backend selection.

The compiled extension is used when importable; set ``SINEDYN_KERNEL=python``
to force the numpy fallback.  ``classify`` splits the pixel list into fixed
row-major chunks, so the result does not depend on the worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels_py

ESCAPING = -2
JULIA = -1

_compiled = None
if os.environ.get("SINEDYN_KERNEL", "").lower() != "python":
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined, no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def _impl(backend: str | None):
    backend = backend or BACKEND
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled.classify_into
    if backend == "python":
        return _kernels_py.classify_into
    raise ValueError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class CaptureTable:
    """Flattened cycle points with per-point capture rules."""

    re: np.ndarray
    im: np.ndarray
    cycle_id: np.ndarray
    radius: np.ndarray
    lag: np.ndarray
    need: np.ndarray

    @classmethod
    def empty(cls) -> "CaptureTable":
        return cls(
            np.zeros(0), np.zeros(0), np.zeros(0, np.int32),
            np.zeros(0), np.ones(0, np.int32), np.zeros(0, np.int32),
        )


@dataclass
class PixelResult:
    label: np.ndarray
    iters: np.ndarray
    end: np.ndarray
    end_idx: np.ndarray


def classify(
    xs: np.ndarray,
    ys: np.ndarray,
    lam: complex,
    a: complex,
    table: CaptureTable,
    budget: int,
    escape_im: float = 50.0,
    workers: int = 1,
    backend: str | None = None,
    chunk: int = 4096,
) -> PixelResult:
    xs = np.ascontiguousarray(xs, dtype=np.float64).ravel()
    ys = np.ascontiguousarray(ys, dtype=np.float64).ravel()
    n = xs.size
    label = np.empty(n, np.int32)
    iters = np.empty(n, np.int32)
    end_re = np.empty(n, np.float64)
    end_im = np.empty(n, np.float64)
    end_idx = np.empty(n, np.int32)
    fn = _impl(backend)
    args = (
        complex(lam).real, complex(lam).imag, complex(a).real, complex(a).imag,
        np.ascontiguousarray(table.re, np.float64), np.ascontiguousarray(table.im, np.float64),
        np.ascontiguousarray(table.cycle_id, np.int32), np.ascontiguousarray(table.radius, np.float64),
        np.ascontiguousarray(table.lag, np.int32), np.ascontiguousarray(table.need, np.int32),
        int(budget), float(escape_im),
    )

    def run(lo: int, hi: int) -> None:
        fn(xs[lo:hi], ys[lo:hi], *args,
           label[lo:hi], iters[lo:hi], end_re[lo:hi], end_im[lo:hi], end_idx[lo:hi])

    bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    if workers > 1 and len(bounds) > 1 and (backend or BACKEND) == "compiled":
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda b: run(*b), bounds))
    else:
        for lo, hi in bounds:
            run(lo, hi)
    return PixelResult(label, iters, end_re + 1j * end_im, end_idx)
