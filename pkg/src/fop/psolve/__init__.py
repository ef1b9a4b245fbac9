"""Homotopy-continuation solver for small square polynomial systems.

Total-degree start system, convex homotopy with a random unit gamma,
Euler predictor with Newton corrector, adaptive step control, endpoint
polishing, and deterministic clustering of the endpoints.

Two interchangeable kernels do the path tracking: a compiled extension
(fop.psolve._kernel) and a pure-Python twin (_kernel_py).  The compiled
one is picked when present; FOP_PURE_PYTHON=1 forces the fallback.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericalError, ValidationError
from ..tolerances import (
    BEZOUT_CAP,
    CORRECTOR_TRUST,
    DEDUP_RADIUS,
    DIVERGENCE,
    ENDPOINT_AT_INFINITY,
    MAX_SOLVE_VARS,
    POLISH_TOL,
    SOLVE_SEED,
    SOLVE_TOL,
    STEP_FLOOR,
)
from . import _kernel_py

try:  # pragma: no cover - depends on the build environment
    from . import _kernel
    _HAVE_COMPILED = True
except ImportError:  # pragma: no cover
    _kernel = None
    _HAVE_COMPILED = False

# Tracking tolerance factor for the corrector along the path; the final
# polish is what enforces the reported residuals.
TRACK_TOL_FAC = 1e-8
MAX_STEPS = 20_000
MAX_POLISH_ITER = 50
STALL_FRACTION = 0.05


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _HAVE_COMPILED else ("python",)


def default_backend() -> str:
    if os.environ.get("FOP_PURE_PYTHON", "") not in ("", "0"):
        return "python"
    return "compiled" if _HAVE_COMPILED else "python"


def _kernel_for(name: str):
    if name == "python":
        return _kernel_py
    if name == "compiled":
        if not _HAVE_COMPILED:
            raise ValidationError("compiled kernel is not available in this install")
        return _kernel
    raise ValidationError(f"unknown backend {name!r}")


class PolySystem:
    """A square polynomial system F: C^n -> C^n in sparse term form.

    ``equations`` is a list with one entry per target coordinate; each
    entry is a sequence of ``(exponent_tuple, coefficient)`` term pairs.
    Terms with duplicate exponent tuples are merged and exact-zero
    coefficients dropped.
    """

    def __init__(self, nvars: int, equations):
        if not isinstance(nvars, int) or nvars < 1 or nvars > MAX_SOLVE_VARS:
            raise ValidationError(f"nvars must be in 1..{MAX_SOLVE_VARS}")
        if len(equations) != nvars:
            raise ValidationError(
                f"system is not square: {len(equations)} equations, {nvars} unknowns"
            )
        clean = []
        degrees = []
        for i, terms in enumerate(equations):
            merged: dict[tuple[int, ...], complex] = {}
            for exps, c in terms:
                key = tuple(int(e) for e in exps)
                if len(key) != nvars:
                    raise ValidationError(
                        f"equation {i}: exponent tuple {key} has wrong length"
                    )
                if any(e < 0 for e in key):
                    raise ValidationError(f"equation {i}: negative exponent")
                merged[key] = merged.get(key, 0.0 + 0.0j) + complex(c)
            keys = sorted(k for k, c in merged.items() if c != 0)
            if not keys:
                raise ValidationError(f"equation {i} is identically zero")
            deg = max(sum(k) for k in keys)
            if deg < 1:
                raise ValidationError(f"equation {i} is constant and nonzero: no solutions")
            clean.append(
                (
                    np.array(keys, dtype=np.int32),
                    np.array([merged[k] for k in keys], dtype=np.complex128),
                )
            )
            degrees.append(deg)
        self.nvars = nvars
        self.equations = clean
        self.degrees = tuple(degrees)
        self.bezout = int(np.prod(self.degrees))
        if self.bezout > BEZOUT_CAP:
            raise ValidationError(f"Bezout number {self.bezout} exceeds cap {BEZOUT_CAP}")
        # flattened form for the kernels
        self._exps = np.vstack([e for e, _ in clean]).astype(np.int32)
        self._coefs = np.concatenate([c for _, c in clean])
        offs = np.zeros(nvars + 1, dtype=np.int32)
        for i, (e, _) in enumerate(clean):
            offs[i + 1] = offs[i] + e.shape[0]
        self._offsets = offs
        self._degs = np.array(self.degrees, dtype=np.int32)

    @property
    def coeff_norm(self) -> float:
        return float(np.max(np.abs(self._coefs)))

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        vals = np.empty(self.nvars, dtype=np.complex128)
        for i, (exps, coefs) in enumerate(self.equations):
            vals[i] = np.sum(coefs * np.prod(x[None, :] ** exps, axis=1))
        return vals

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        jac = np.zeros((self.nvars, self.nvars), dtype=np.complex128)
        for i, (exps, coefs) in enumerate(self.equations):
            for j in range(self.nvars):
                e = exps[:, j]
                mask = e > 0
                if not mask.any():
                    continue
                shifted = exps[mask].copy()
                shifted[:, j] -= 1
                jac[i, j] = np.sum(
                    coefs[mask] * e[mask] * np.prod(x[None, :] ** shifted, axis=1)
                )
        return jac

    def residual_scale(self, x) -> float:
        xn = max(1.0, float(np.max(np.abs(x)))) if len(np.atleast_1d(x)) else 1.0
        dmax = max(self.degrees)
        return max(1.0, max(1.0, self.coeff_norm) * xn**dmax)


@dataclass
class SolutionSet:
    """Deduplicated finite zeros of a PolySystem, deterministically ordered."""

    points: np.ndarray          # (k, n) cluster centers
    multiplicities: np.ndarray  # (k,) cluster sizes
    residuals: np.ndarray       # (k,) |F| at each center
    bezout: int
    diverged: int
    lost: int                   # paths that neither arrived nor diverged
    seed: int
    gamma: complex
    backend: str
    path_steps: int = 0

    def __len__(self) -> int:
        return len(self.multiplicities)

    @property
    def total_with_multiplicity(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def is_simple(self) -> bool:
        return bool(np.all(self.multiplicities == 1))


def _start_points(degrees) -> np.ndarray:
    roots = [
        np.exp(2j * np.pi * np.arange(d) / d) for d in degrees
    ]
    combos = list(itertools.product(*roots))
    return np.array(combos, dtype=np.complex128)


def _sort_key(point, ndigits=9):
    return tuple(
        (round(float(z.real), ndigits), round(float(z.imag), ndigits)) for z in point
    )


def solve_system(
    system: PolySystem,
    seed: int = SOLVE_SEED,
    threads: int = 1,
    backend: str | None = None,
    max_steps: int = MAX_STEPS,
) -> SolutionSet:
    """Find all isolated zeros of a square system by homotopy continuation.

    Identical (system, seed) input yields an identical SolutionSet,
    including ordering, for a given backend.
    """
    name = backend or default_backend()
    kern = _kernel_for(name)
    rng = np.random.Generator(np.random.Philox(key=seed))
    gamma = complex(np.exp(2j * np.pi * rng.random()))
    starts = _start_points(system.degrees)

    if threads > 1 and len(starts) > threads:
        chunks = np.array_split(np.arange(len(starts)), threads)
        ends = np.zeros((len(starts), system.nvars), dtype=np.complex128)
        status = np.zeros(len(starts), dtype=np.int32)
        steps = np.zeros(len(starts), dtype=np.int32)

        def run(idx):
            return kern.track_all(
                system.nvars, system._exps, system._coefs, system._offsets,
                system._degs, gamma, starts[idx],
                max_steps, STEP_FLOOR, DIVERGENCE, TRACK_TOL_FAC, CORRECTOR_TRUST,
            )

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for idx, (e, st, sp) in zip(chunks, pool.map(run, chunks)):
                ends[idx], status[idx], steps[idx] = e, st, sp
    else:
        ends, status, steps = kern.track_all(
            system.nvars, system._exps, system._coefs, system._offsets,
            system._degs, gamma, starts,
            max_steps, STEP_FLOOR, DIVERGENCE, TRACK_TOL_FAC, CORRECTOR_TRUST,
        )

    stalled = int(np.sum(status == _kernel_py.STALLED))
    if stalled > STALL_FRACTION * len(starts):
        bad = [int(i) for i in np.nonzero(status == _kernel_py.STALLED)[0][:10]]
        raise NumericalError(
            f"path tracking stalled on {stalled}/{len(starts)} paths "
            f"(seed={seed}, first stalled paths {bad})"
        )

    # Polish non-diverged endpoints against the target system.
    diverged = int(np.sum(status == _kernel_py.DIVERGED))
    candidates = []
    lost = 0
    for p in range(len(starts)):
        if status[p] == _kernel_py.DIVERGED:
            continue
        end_norm = float(np.max(np.abs(ends[p])))
        if end_norm > ENDPOINT_AT_INFINITY:
            diverged += 1
            continue
        x, st, _, res, _ = kern.newton_refine(
            system.nvars, system._exps, system._coefs, system._offsets,
            ends[p], MAX_POLISH_ITER, POLISH_TOL,
        )
        x = np.asarray(x)
        if float(np.max(np.abs(x - ends[p]))) > CORRECTOR_TRUST * (1.0 + end_norm):
            # Newton wandered to some other zero; the tracked endpoint
            # itself was not one.
            lost += 1
        elif st == _kernel_py.OK:
            candidates.append(x)
        elif status[p] == _kernel_py.ARRIVED and res <= SOLVE_TOL * system.residual_scale(x):
            # polish saw no clean contraction but the point is a zero
            candidates.append(x)
        else:
            lost += 1

    # Deterministic clustering: sort, then greedily attach to the first
    # cluster whose seed point is within the dedup radius.
    candidates.sort(key=_sort_key)
    reps: list[np.ndarray] = []
    groups: list[list[np.ndarray]] = []
    for x in candidates:
        placed = False
        for k, r in enumerate(reps):
            if np.max(np.abs(x - r)) <= DEDUP_RADIUS:
                groups[k].append(x)
                placed = True
                break
        if not placed:
            reps.append(x)
            groups.append([x])

    centers = [np.mean(np.stack(g), axis=0) for g in groups]
    order = sorted(range(len(centers)), key=lambda k: _sort_key(centers[k]))
    points = np.array([centers[k] for k in order], dtype=np.complex128).reshape(
        -1, system.nvars
    )
    mults = np.array([len(groups[k]) for k in order], dtype=np.int64)
    residuals = np.array(
        [float(np.max(np.abs(system.evaluate(pt)))) for pt in points], dtype=np.float64
    )
    for pt, res in zip(points, residuals):
        if res > SOLVE_TOL * system.residual_scale(pt):
            raise NumericalError(
                f"reported point {pt} has residual {res:.3e} above tolerance (seed={seed})"
            )

    return SolutionSet(
        points=points,
        multiplicities=mults,
        residuals=residuals,
        bezout=system.bezout,
        diverged=diverged,
        lost=lost,
        seed=seed,
        gamma=gamma,
        backend=name,
        path_steps=int(np.sum(steps)),
    )


def newton_polish(system: PolySystem, x0, max_iter: int = MAX_POLISH_ITER,
                  backend: str | None = None):
    """Polish a single approximate zero.

    Returns (point, converged, residual, iterations).  A singular Jacobian
    or missing contraction leaves converged False; that is a flag, not an
    error.
    """
    kern = _kernel_for(backend or default_backend())
    x, st, iters, res, contracted = kern.newton_refine(
        system.nvars, system._exps, system._coefs, system._offsets,
        np.asarray(x0, dtype=np.complex128), max_iter, POLISH_TOL,
    )
    ok = st == _kernel_py.OK and (contracted or iters == 0)
    return np.asarray(x), bool(ok), float(res), int(iters)


def count_with_multiplicity(system: PolySystem, seed: int = SOLVE_SEED,
                            backend: str | None = None) -> int:
    """Number of distinct finite zeros (cluster multiplicities live on the
    SolutionSet).  With no singular clusters this equals the Bezout number
    minus the diverged-path count."""
    sol = solve_system(system, seed=seed, backend=backend)
    return len(sol)
