import math

import numpy as np
import pytest

from sinedyn import kernels
from sinedyn.atlas import GridSpec, build_cycles, capture_table, find_cycles
from sinedyn.core import FamilyParams, evaluate

BACKENDS = kernels.available_backends()


def _job(p, center, n, budget):
    g = GridSpec.square(center, 4 * math.pi, n)
    X, Y = np.meshgrid(*g.axes())
    table = capture_table(build_cycles(p, find_cycles(p)))
    return X, Y, table, budget


def test_backend_names():
    assert "python" in BACKENDS and kernels.BACKEND in BACKENDS
    with pytest.raises(ValueError):
        kernels.classify(np.zeros(1), np.zeros(1), 1, 0, kernels.CaptureTable.empty(), 10, backend="gpu")


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
@pytest.mark.parametrize("p,center,budget", [
    (FamilyParams(1, 0), 0j, 5000),
    (FamilyParams(-1.003, math.pi / 2 - 1.003), math.pi / 2, 2000),
    (FamilyParams(2, 0), 0j, 1000),
])
def test_backends_agree(p, center, budget):
    X, Y, table, budget = _job(p, center, 64, budget)
    a = kernels.classify(X, Y, p.lam, p.a, table, budget, backend="compiled")
    b = kernels.classify(X, Y, p.lam, p.a, table, budget, backend="python")
    assert np.mean(a.label == b.label) >= 0.999
    same = a.label == b.label
    assert np.allclose(a.end[same], b.end[same], rtol=1e-6, atol=1e-9)


def test_escape_and_empty_table():
    # no cycles: everything either escapes or exhausts the budget
    p = FamilyParams(1, 3j)
    xs = np.array([0.0, 0.0])
    ys = np.array([0.0, 60.0])
    for b in BACKENDS:
        res = kernels.classify(xs, ys, p.lam, p.a, kernels.CaptureTable.empty(), 500, backend=b)
        assert res.label.tolist() == [kernels.ESCAPING, kernels.ESCAPING]
        assert res.iters[1] == 0


def test_end_is_last_orbit_point():
    p = FamilyParams(0.5, 0)
    for b in BACKENDS:
        res = kernels.classify(np.array([1.0]), np.array([0.5]), p.lam, p.a,
                               kernels.CaptureTable.empty(), 100, backend=b)
        z = 1 + 0.5j
        for _ in range(int(res.iters[0])):
            z = evaluate(p, z)
        assert res.label[0] == kernels.JULIA
        assert abs(res.end[0] - z) <= 1e-12


def test_chunking_does_not_matter():
    p = FamilyParams(1, 0)
    X, Y, table, budget = _job(p, 0j, 48, 2000)
    ref = kernels.classify(X, Y, p.lam, p.a, table, budget)
    for chunk, workers in ((7, 1), (100, 3), (10_000, 2)):
        res = kernels.classify(X, Y, p.lam, p.a, table, budget, workers=workers, chunk=chunk)
        assert np.array_equal(res.label, ref.label) and np.array_equal(res.iters, ref.iters)
