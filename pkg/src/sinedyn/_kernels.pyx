# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel classifier.

Orbit steps use exactly the operation order of ``sinedyn.core.evaluate`` so a
pixel orbit computed here is bit-identical to the pure-Python one.
"""
from libc.math cimport sin, cos, sinh, cosh, fabs, sqrt, isfinite, INFINITY

cdef enum:
    HMAX = 256
    ESCAPING = -2
    JULIA = -1


cdef void _classify(
    const double[::1] xs, const double[::1] ys,
    double lr, double li, double ar, double ai,
    const double[::1] cre, const double[::1] cim, const int[::1] cid,
    const double[::1] crad, const int[::1] clag, const int[::1] cneed,
    long budget, double escape_im,
    int[::1] label, int[::1] iters, double[::1] end_re, double[::1] end_im,
    int[::1] end_idx,
) noexcept nogil:
    cdef Py_ssize_t npix = xs.shape[0]
    cdef Py_ssize_t m = cre.shape[0]
    cdef Py_ssize_t i, j, best
    cdef long n, lag
    cdef double x, y, sx, cx, ch, sh, s_re, s_im, nx, ny, d, bestd, dx, dy, tiny
    cdef int cur, streak, captured
    cdef double hist[HMAX]
    cdef Py_ssize_t h

    for i in range(npix):
        x = xs[i]
        y = ys[i]
        label[i] = JULIA
        iters[i] = <int>budget
        end_re[i] = x
        end_im[i] = y
        end_idx[i] = -1
        cur = -1
        streak = 0
        captured = 0
        n = 0
        while n < budget:
            if fabs(y) > escape_im:
                label[i] = ESCAPING
                iters[i] = <int>n
                end_re[i] = x
                end_im[i] = y
                break
            best = -1
            bestd = INFINITY
            for j in range(m):
                dx = x - cre[j]
                dy = y - cim[j]
                d = sqrt(dx * dx + dy * dy)
                if d < crad[j] and d < bestd:
                    best = j
                    bestd = d
            if best >= 0:
                if cneed[best] == 0:
                    captured = 1
                else:
                    if cid[best] != cur:
                        cur = cid[best]
                        streak = 0
                        for h in range(HMAX):
                            hist[h] = INFINITY
                    lag = clag[best]
                    tiny = 1e-12 * (1.0 + fabs(cre[best]) + fabs(cim[best]))
                    if bestd < hist[n % lag] or bestd <= tiny:
                        streak += 1
                    else:
                        streak = 0
                    hist[n % lag] = bestd
                    if streak >= cneed[best]:
                        captured = 1
                if captured:
                    label[i] = cid[best]
                    iters[i] = <int>n
                    lag = clag[best]
                    # advance to a common phase so petal directions compare
                    while n % lag != 0:
                        sx = sin(x); cx = cos(x); ch = cosh(y); sh = sinh(y)
                        s_re = sx * ch
                        s_im = cx * sh
                        nx = lr * s_re - li * s_im + ar
                        ny = lr * s_im + li * s_re + ai
                        x = nx
                        y = ny
                        n += 1
                    best = -1
                    bestd = INFINITY
                    for j in range(m):
                        if cid[j] == label[i]:
                            dx = x - cre[j]
                            dy = y - cim[j]
                            d = sqrt(dx * dx + dy * dy)
                            if d < bestd:
                                best = j
                                bestd = d
                    end_re[i] = x
                    end_im[i] = y
                    end_idx[i] = <int>best
                    break
            else:
                cur = -1
                streak = 0
            sx = sin(x); cx = cos(x); ch = cosh(y); sh = sinh(y)
            s_re = sx * ch
            s_im = cx * sh
            nx = lr * s_re - li * s_im + ar
            ny = lr * s_im + li * s_re + ai
            if not (isfinite(nx) and isfinite(ny)):
                label[i] = ESCAPING
                iters[i] = <int>(n + 1)
                end_re[i] = x
                end_im[i] = y
                break
            x = nx
            y = ny
            n += 1
        if label[i] == JULIA:
            end_re[i] = x
            end_im[i] = y


def classify_into(
    const double[::1] xs, const double[::1] ys,
    double lr, double li, double ar, double ai,
    const double[::1] cre, const double[::1] cim, const int[::1] cid,
    const double[::1] crad, const int[::1] clag, const int[::1] cneed,
    long budget, double escape_im,
    int[::1] label, int[::1] iters, double[::1] end_re, double[::1] end_im,
    int[::1] end_idx,
):
    """Classify pixel centres (xs[i], ys[i]); results are written in place.

    Releases the GIL, so disjoint slices may be processed from several threads.
    """
    for j in range(clag.shape[0]):
        if clag[j] < 1 or clag[j] > HMAX:
            raise ValueError("cycle lag must lie in [1, 256]")
    with nogil:
        _classify(xs, ys, lr, li, ar, ai, cre, cim, cid, crad, clag, cneed,
                  budget, escape_im, label, iters, end_re, end_im, end_idx)
