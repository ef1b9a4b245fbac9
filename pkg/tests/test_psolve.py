"""Tests for the homotopy continuation solver.

Oracles here are systems with known root sets: univariate polynomials
(fundamental theorem of algebra), product systems whose solutions are
grids, and deficient systems losing roots to infinity.
"""

import numpy as np
import pytest

from fop.errors import ValidationError
from fop.psolve import (
    PolySystem,
    available_backends,
    count_with_multiplicity,
    default_backend,
    newton_polish,
    solve_system,
)


def _uni(coeff_by_power, nvars=1, var=0):
    """One equation in `nvars` variables from a {power: coeff} dict."""
    terms = []
    for p, c in coeff_by_power.items():
        exps = [0] * nvars
        exps[var] = p
        terms.append((tuple(exps), complex(c)))
    return terms


def test_cube_roots_of_unity():
    sys_ = PolySystem(1, [_uni({3: 1, 0: -1})])
    sol = solve_system(sys_)
    assert len(sol) == 3
    assert sol.total_with_multiplicity == 3
    pts = np.array([p[0] for p in sol.points])
    expected = np.exp(2j * np.pi * np.arange(3) / 3)
    for e in expected:
        assert np.min(np.abs(pts - e)) < 1e-8


def test_triple_root_collapses_to_one_cluster():
    # z^3 = 0: one point of multiplicity three, not three nearby points.
    sys_ = PolySystem(1, [_uni({3: 1})])
    sol = solve_system(sys_)
    assert len(sol) == 1
    assert list(sol.multiplicities) == [3]
    assert abs(sol.points[0][0]) < 1e-6
    assert not sol.is_simple


def test_simple_cubic_three_points():
    # z - z^3: three simple roots 0, 1, -1.
    sys_ = PolySystem(1, [_uni({1: 1, 3: -1})])
    sol = solve_system(sys_)
    assert len(sol) == 3
    assert sol.is_simple
    roots = sorted(round(p[0].real, 6) for p in sol.points)
    assert roots == [-1.0, 0.0, 1.0]
    assert all(abs(p[0].imag) < 1e-8 for p in sol.points)


def test_count_with_multiplicity_is_distinct_count():
    assert count_with_multiplicity(PolySystem(1, [_uni({3: 1})])) == 1
    assert count_with_multiplicity(PolySystem(1, [_uni({1: 1, 3: -1})])) == 3


def test_same_seed_reproduces_everything():
    eqs = [
        [((2, 0), 1.0), ((0, 1), -1.0)],
        [((0, 2), 1.0), ((1, 0), -1.0), ((0, 0), 0.25)],
    ]
    a = solve_system(PolySystem(2, eqs), seed=11)
    b = solve_system(PolySystem(2, eqs), seed=11)
    assert a.gamma == b.gamma
    assert np.array_equal(np.asarray(a.points), np.asarray(b.points))
    assert list(a.multiplicities) == list(b.multiplicities)
    assert a.backend == b.backend


def test_different_seed_same_roots():
    eqs = [_uni({4: 1, 1: -2, 0: 0.5})]
    a = solve_system(PolySystem(1, eqs), seed=3)
    b = solve_system(PolySystem(1, eqs), seed=1234)
    assert len(a) == len(b) == 4
    pa = np.sort_complex(np.array([p[0] for p in a.points]))
    pb = np.sort_complex(np.array([p[0] for p in b.points]))
    assert np.max(np.abs(pa - pb)) < 1e-7


def test_grid_system_bezout_complete():
    # (x^2-1)(y^2-4) style product system: 4 solutions on a grid.
    eqs = [
        [((2, 0), 1.0), ((0, 0), -1.0)],
        [((0, 2), 1.0), ((0, 0), -4.0)],
    ]
    sol = solve_system(PolySystem(2, eqs))
    assert sol.bezout == 4
    assert len(sol) == 4
    got = sorted((round(p[0].real, 6), round(p[1].real, 6)) for p in sol.points)
    assert got == [(-1.0, -2.0), (-1.0, 2.0), (1.0, -2.0), (1.0, 2.0)]


def test_random_dense_systems_bezout_complete():
    rng = np.random.Generator(np.random.Philox(key=7))
    for trial in range(8):
        n = int(rng.integers(1, 3))
        degs = [int(rng.integers(1, 4)) for _ in range(n)]
        eqs = []
        for d in degs:
            terms = []
            for exps in _all_exps(n, d):
                c = rng.normal() + 1j * rng.normal()
                terms.append((exps, c))
            eqs.append(terms)
        sys_ = PolySystem(n, eqs)
        sol = solve_system(sys_)
        # Dense random coefficients: all Bezout-many roots finite and simple.
        assert len(sol) == sol.bezout, f"trial {trial}: {len(sol)} != {sol.bezout}"
        assert sol.is_simple
        for p in sol.points:
            r = np.abs(sys_.evaluate(np.asarray(p)))
            assert np.max(r) < 1e-6 * sys_.residual_scale(np.asarray(p))


def _all_exps(n, d):
    if n == 1:
        return [(k,) for k in range(d + 1)]
    out = []
    for k in range(d + 1):
        for rest in _all_exps(n - 1, d - k):
            out.append((k,) + rest)
    return out


def test_deficient_system_reports_divergence():
    # x*y = 1, x = 2: Bezout bound 2 but only one affine solution.
    eqs = [
        [((1, 1), 1.0), ((0, 0), -1.0)],
        [((1, 0), 1.0), ((0, 0), -2.0)],
    ]
    sol = solve_system(PolySystem(2, eqs))
    assert sol.bezout == 2
    assert len(sol) == 1
    assert sol.diverged == 1
    p = sol.points[0]
    assert abs(p[0] - 2.0) < 1e-8 and abs(p[1] - 0.5) < 1e-8


def test_newton_polish_converges_and_flags():
    sys_ = PolySystem(1, [_uni({2: 1, 0: -1})])
    pt, ok, res, iters = newton_polish(sys_, np.array([1.2 + 0.1j]))
    assert ok
    assert abs(pt[0] - 1.0) < 1e-10
    assert res < 1e-10
    # At x=0 the Jacobian 2x vanishes: the first step cannot be taken.
    _, ok0, _, _ = newton_polish(sys_, np.array([0.0 + 0.0j]))
    assert not ok0


def test_backends_agree():
    backends = available_backends()
    if len(backends) < 2:
        pytest.skip("only one backend built")
    eqs = [
        [((2, 0), 1.0), ((0, 1), 1.0), ((0, 0), -3.0)],
        [((0, 2), 1.0), ((1, 0), -1.0)],
    ]
    sols = [solve_system(PolySystem(2, eqs), backend=b) for b in backends]
    ref = np.asarray(sols[0].points)
    for s in sols[1:]:
        assert len(s) == len(sols[0])
        assert np.max(np.abs(np.asarray(s.points) - ref)) < 1e-9


def test_threaded_equals_serial():
    eqs = [_uni({5: 1, 2: 0.3, 0: -1})]
    a = solve_system(PolySystem(1, eqs), threads=1)
    b = solve_system(PolySystem(1, eqs), threads=4)
    assert np.array_equal(np.asarray(a.points), np.asarray(b.points))


def test_validation_rejects_bad_systems():
    with pytest.raises(ValidationError):
        PolySystem(2, [_uni({1: 1}, nvars=2)])  # not square
    with pytest.raises(ValidationError):
        PolySystem(1, [[((0,), 1.0)]])  # nonzero constant equation
    with pytest.raises(ValidationError):
        PolySystem(1, [[((0,), 0.0)]])  # identically zero
    with pytest.raises(ValidationError):
        PolySystem(5, [_uni({1: 1}, nvars=5, var=i) for i in range(5)])  # too many vars


def test_duplicate_terms_merge():
    sys_ = PolySystem(1, [[((1,), 1.0), ((1,), 1.0), ((0,), -2.0)]])
    sol = solve_system(sys_)
    assert len(sol) == 1
    assert abs(sol.points[0][0] - 1.0) < 1e-10


def test_default_backend_honors_env(monkeypatch):
    monkeypatch.setenv("FOP_PURE_PYTHON", "1")
    assert default_backend() == "python"
    monkeypatch.delenv("FOP_PURE_PYTHON")
    assert default_backend() in available_backends()
