"""Numpy fallback for the compiled pixel classifier.

Same contract as ``sinedyn._kernels.classify_into``: vectorised over pixels,
one Python-level loop over iterations.  numpy's transcendental functions are
not guaranteed to round like libm, so individual chaotic orbits may differ from
the compiled backend in the last bits; labels agree except on a thin set of
pixels near the Julia set.
"""
from __future__ import annotations

import numpy as np

HMAX = 256
ESCAPING = -2
JULIA = -1


def _step(x, y, lr, li, ar, ai):
    sx, cx = np.sin(x), np.cos(x)
    ch, sh = np.cosh(y), np.sinh(y)
    s_re = sx * ch
    s_im = cx * sh
    return lr * s_re - li * s_im + ar, lr * s_im + li * s_re + ai


def classify_into(
    xs, ys, lr, li, ar, ai, cre, cim, cid, crad, clag, cneed,
    budget, escape_im, label, iters, end_re, end_im, end_idx,
):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    cre = np.asarray(cre, dtype=np.float64)
    cim = np.asarray(cim, dtype=np.float64)
    cid = np.asarray(cid, dtype=np.int32)
    crad = np.asarray(crad, dtype=np.float64)
    clag = np.asarray(clag, dtype=np.int64)
    cneed = np.asarray(cneed, dtype=np.int64)
    if clag.size and (clag.min() < 1 or clag.max() > HMAX):
        raise ValueError("cycle lag must lie in [1, 256]")

    npix = xs.shape[0]
    m = cre.shape[0]
    x = xs.copy()
    y = ys.copy()
    label[:] = JULIA
    iters[:] = budget
    end_idx[:] = -1
    # 0 running, 1 captured and waiting for phase, 2 finished
    state = np.zeros(npix, dtype=np.int8)
    lag_of = np.ones(npix, dtype=np.int64)
    cur = np.full(npix, -1, dtype=np.int64)
    streak = np.zeros(npix, dtype=np.int64)
    width = int(clag.max()) if m else 1
    hist = np.full((npix, width), np.inf)
    tiny = 1e-12 * (1.0 + np.abs(cre) + np.abs(cim))

    def finalize(idx):
        if idx.size == 0:
            return
        own = cid[None, :] == label[idx][:, None]
        d = np.hypot(x[idx][:, None] - cre[None, :], y[idx][:, None] - cim[None, :])
        d = np.where(own, d, np.inf)
        end_idx[idx] = np.argmin(d, axis=1)
        end_re[idx] = x[idx]
        end_im[idx] = y[idx]
        state[idx] = 2

    with np.errstate(all="ignore"):
        n = 0
        while True:
            waiting = np.flatnonzero(state == 1)
            if waiting.size:
                finalize(waiting[n % lag_of[waiting] == 0])
            running = np.flatnonzero(state == 0)
            if n >= budget:
                break
            if running.size == 0 and not np.any(state == 1):
                break
            if running.size:
                esc = np.abs(y[running]) > escape_im
                gone = running[esc]
                label[gone] = ESCAPING
                iters[gone] = n
                end_re[gone] = x[gone]
                end_im[gone] = y[gone]
                state[gone] = 2
                running = running[~esc]
            if running.size and m:
                d = np.hypot(x[running][:, None] - cre[None, :], y[running][:, None] - cim[None, :])
                d = np.where(d < crad[None, :], d, np.inf)
                best = np.argmin(d, axis=1)
                bestd = d[np.arange(running.size), best]
                has = np.isfinite(bestd)
                outside = running[~has]
                cur[outside] = -1
                streak[outside] = 0

                idx = running[has]
                b = best[has]
                bd = bestd[has]
                captured = cneed[b] == 0
                slow = ~captured
                if np.any(slow):
                    si, sb, sd = idx[slow], b[slow], bd[slow]
                    reset = cid[sb] != cur[si]
                    cur[si[reset]] = cid[sb[reset]]
                    streak[si[reset]] = 0
                    hist[si[reset]] = np.inf
                    slot = n % clag[sb]
                    prev = hist[si, slot]
                    ok = (sd < prev) | (sd <= tiny[sb])
                    streak[si] = np.where(ok, streak[si] + 1, 0)
                    hist[si, slot] = sd
                    captured[slow] = streak[si] >= cneed[sb]
                cap = idx[captured]
                capb = b[captured]
                label[cap] = cid[capb]
                iters[cap] = n
                lag_of[cap] = clag[capb]
                state[cap] = 1
                finalize(cap[n % lag_of[cap] == 0])
                running = np.flatnonzero(state == 0)
            moving = np.flatnonzero(state < 2)
            if moving.size:
                nx, ny = _step(x[moving], y[moving], lr, li, ar, ai)
                bad = ~(np.isfinite(nx) & np.isfinite(ny)) & (state[moving] == 0)
                gone = moving[bad]
                label[gone] = ESCAPING
                iters[gone] = n + 1
                end_re[gone] = x[gone]
                end_im[gone] = y[gone]
                state[gone] = 2
                ok = ~bad
                x[moving[ok]] = nx[ok]
                y[moving[ok]] = ny[ok]
            n += 1
        # pixels captured near the end of the budget still need their phase
        while np.any(state == 1):
            waiting = np.flatnonzero(state == 1)
            finalize(waiting[n % lag_of[waiting] == 0])
            waiting = np.flatnonzero(state == 1)
            if waiting.size:
                nx, ny = _step(x[waiting], y[waiting], lr, li, ar, ai)
                x[waiting] = nx
                y[waiting] = ny
            n += 1
    rest = np.flatnonzero(state == 0)
    end_re[rest] = x[rest]
    end_im[rest] = y[rest]
