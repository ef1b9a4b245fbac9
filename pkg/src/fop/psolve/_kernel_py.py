"""Pure-Python path-tracking kernel.

Mirrors the compiled kernel operation for operation: same predictor,
corrector, step control, and pivoted elimination, so both backends take
the same decisions on the same input.  All loops are scalar on purpose;
keep any vectorization out of this file so the two backends stay twins.

Systems arrive flattened: ``exps`` is an (n_terms, nvars) int array of
exponents, ``coefs`` the matching complex coefficients, and ``offsets``
(length n+1) delimits the terms of each of the n equations.
"""

from __future__ import annotations

import numpy as np

ARRIVED = 0
DIVERGED = 1
STALLED = 2

OK = 0
SINGULAR = 1
NO_CONVERGENCE = 2

# A path whose corrector at t=1 is within this of arrival is considered
# arrived; the final Newton polish closes the rest of the gap.
END_ZONE = 1e-10

_PIVOT_FLOOR = 1e-300


def _abs2(z: complex) -> float:
    return z.real * z.real + z.imag * z.imag


def _powers(x, maxpow):
    pw = []
    for xj in x:
        row = [1.0 + 0.0j]
        acc = 1.0 + 0.0j
        for _ in range(maxpow):
            acc = acc * xj
            row.append(acc)
        pw.append(row)
    return pw


def _eval_eq(exps, coefs, lo, hi, nvars, pw):
    acc = 0.0 + 0.0j
    for tix in range(lo, hi):
        v = coefs[tix]
        row = exps[tix]
        for j in range(nvars):
            e = row[j]
            if e:
                v = v * pw[j][e]
        acc = acc + v
    return acc


def _eval_eq_grad(exps, coefs, lo, hi, nvars, pw, grad):
    for j in range(nvars):
        grad[j] = 0.0 + 0.0j
    for tix in range(lo, hi):
        row = exps[tix]
        for j in range(nvars):
            e = row[j]
            if e == 0:
                continue
            v = coefs[tix] * e
            v = v * pw[j][e - 1]
            for k in range(nvars):
                if k == j:
                    continue
                ek = row[k]
                if ek:
                    v = v * pw[k][ek]
            grad[j] = grad[j] + v


def _solve_inplace(n, aug):
    """Gaussian elimination with partial pivoting on [A | b]; None if singular."""
    for col in range(n):
        best = col
        bmag = _abs2(aug[col][col])
        for r in range(col + 1, n):
            m = _abs2(aug[r][col])
            if m > bmag:
                best, bmag = r, m
        if bmag < _PIVOT_FLOOR:
            return None
        if best != col:
            aug[col], aug[best] = aug[best], aug[col]
        piv = aug[col][col]
        for r in range(col + 1, n):
            f = aug[r][col] / piv
            if f != 0:
                for c in range(col, n + 1):
                    aug[r][c] = aug[r][c] - f * aug[col][c]
    x = [0.0 + 0.0j] * n
    for r in range(n - 1, -1, -1):
        acc = aug[r][n]
        for c in range(r + 1, n):
            acc = acc - aug[r][c] * x[c]
        x[r] = acc / aug[r][r]
    return x


def _scale(cmax, dmax, x):
    xnorm2 = 0.0
    for xj in x:
        m = _abs2(xj)
        if m > xnorm2:
            xnorm2 = m
    xnorm = xnorm2 ** 0.5
    if xnorm < 1.0:
        xnorm = 1.0
    p = 1.0
    for _ in range(dmax):
        p = p * xnorm
    s = cmax * p
    return s if s > 1.0 else 1.0


def _homotopy_residual(nvars, exps, coefs, offsets, degs, gamma, x, t, maxpow):
    pw = _powers(x, maxpow)
    res2 = 0.0
    for i in range(nvars):
        f = _eval_eq(exps, coefs, offsets[i], offsets[i + 1], nvars, pw)
        g = pw[i][degs[i]] - 1.0
        h = gamma * (1.0 - t) * g + t * f
        m = _abs2(h)
        if m > res2:
            res2 = m
    return res2 ** 0.5


def _correct(nvars, exps, coefs, offsets, degs, gamma, x, t, maxpow, tol, trust):
    """Up to 3 Newton steps on the homotopy at fixed t.

    Fails if the iterates drift more than ``trust * (1 + |x|)`` from the
    predicted point: a correction that large means the iteration left the
    path's basin, not that the prediction had O(dt^2) error.
    """
    x = list(x)
    start = list(x)
    big0 = 0.0
    for xj in x:
        m = _abs2(xj)
        if m > big0:
            big0 = m
    lim = trust * (1.0 + big0**0.5)
    lim2 = lim * lim
    for _ in range(3):
        pw = _powers(x, maxpow)
        aug = [[0.0 + 0.0j] * (nvars + 1) for _ in range(nvars)]
        grad = [0.0 + 0.0j] * nvars
        res2 = 0.0
        for i in range(nvars):
            f = _eval_eq(exps, coefs, offsets[i], offsets[i + 1], nvars, pw)
            g = pw[i][degs[i]] - 1.0
            h = gamma * (1.0 - t) * g + t * f
            m = _abs2(h)
            if m > res2:
                res2 = m
            _eval_eq_grad(exps, coefs, offsets[i], offsets[i + 1], nvars, pw, grad)
            for j in range(nvars):
                aug[i][j] = t * grad[j]
            d = degs[i]
            if d > 0:
                aug[i][i] = aug[i][i] + gamma * (1.0 - t) * d * pw[i][d - 1]
            aug[i][nvars] = -h
        if res2**0.5 <= tol:
            return True, x
        dx = _solve_inplace(nvars, aug)
        if dx is None:
            return False, x
        for j in range(nvars):
            x[j] = x[j] + dx[j]
        drift = 0.0
        for j in range(nvars):
            m = _abs2(x[j] - start[j])
            if m > drift:
                drift = m
        if drift > lim2:
            return False, x
    res = _homotopy_residual(nvars, exps, coefs, offsets, degs, gamma, x, t, maxpow)
    return res <= tol, x


def _track_one(
    nvars, exps, coefs, offsets, degs, gamma, start,
    max_steps, step_floor, divergence, tol_fac, trust, cmax, dmax, maxpow,
):
    x = list(start)
    t = 0.0
    dt = 0.1
    streak = 0
    for step in range(max_steps):
        if t >= 1.0:
            return x, ARRIVED, step
        if dt > 1.0 - t:
            dt = 1.0 - t
        pw = _powers(x, maxpow)
        aug = [[0.0 + 0.0j] * (nvars + 1) for _ in range(nvars)]
        grad = [0.0 + 0.0j] * nvars
        for i in range(nvars):
            f = _eval_eq(exps, coefs, offsets[i], offsets[i + 1], nvars, pw)
            g = pw[i][degs[i]] - 1.0
            _eval_eq_grad(exps, coefs, offsets[i], offsets[i + 1], nvars, pw, grad)
            for j in range(nvars):
                aug[i][j] = t * grad[j]
            d = degs[i]
            if d > 0:
                aug[i][i] = aug[i][i] + gamma * (1.0 - t) * d * pw[i][d - 1]
            # dH/dt = -gamma*G + F
            aug[i][nvars] = gamma * g - f
        tangent = _solve_inplace(nvars, aug)
        if tangent is None:
            dt = dt * 0.5
            streak = 0
            if dt < step_floor:
                return x, STALLED, step
            continue
        t_new = t + dt
        if 1.0 - t_new < END_ZONE:
            t_new = 1.0
        x_pred = [x[j] + tangent[j] * dt for j in range(nvars)]
        tol = tol_fac * _scale(cmax, dmax, x_pred)
        ok, x_corr = _correct(
            nvars, exps, coefs, offsets, degs, gamma, x_pred, t_new, maxpow, tol, trust
        )
        if ok:
            x = x_corr
            t = t_new
            big = 0.0
            for xj in x:
                m = _abs2(xj)
                if m > big:
                    big = m
            if big**0.5 > divergence:
                return x, DIVERGED, step
            streak += 1
            if streak >= 4:
                dt = dt * 1.5
                streak = 0
        else:
            dt = dt * 0.5
            streak = 0
            if dt < step_floor:
                return x, STALLED, step
    return x, STALLED, max_steps


def track_all(
    nvars, exps, coefs, offsets, degs, gamma, starts,
    max_steps, step_floor, divergence, tol_fac, trust,
):
    """Track every start point from t=0 to t=1.

    Returns (endpoints, status, steps) as numpy arrays.
    """
    exps_l = [tuple(int(e) for e in row) for row in np.asarray(exps)]
    coefs_l = [complex(c) for c in np.asarray(coefs)]
    offsets_l = [int(o) for o in np.asarray(offsets)]
    degs_l = [int(d) for d in np.asarray(degs)]
    cmax = max((abs(c) for c in coefs_l), default=0.0)
    if cmax < 1.0:
        cmax = 1.0
    dmax = max((sum(row) for row in exps_l), default=0)
    dmax = max(dmax, max(degs_l, default=0))
    maxpow = dmax if dmax > 0 else 1

    m = len(starts)
    ends = np.zeros((m, nvars), dtype=np.complex128)
    status = np.zeros(m, dtype=np.int32)
    steps = np.zeros(m, dtype=np.int32)
    for p in range(m):
        x, st, k = _track_one(
            nvars, exps_l, coefs_l, offsets_l, degs_l, complex(gamma),
            [complex(z) for z in starts[p]],
            max_steps, step_floor, divergence, tol_fac, trust, cmax, dmax, maxpow,
        )
        ends[p] = x
        status[p] = st
        steps[p] = k
    return ends, status, steps


def newton_refine(nvars, exps, coefs, offsets, x0, max_iter, target_fac):
    """Newton iteration on the plain system F(x)=0.

    Returns (x, status, iterations, residual, contracted).  Success means
    status OK: residual below target_fac * scale with a contracting step
    observed (or residual already below target at entry).
    """
    exps_l = [tuple(int(e) for e in row) for row in np.asarray(exps)]
    coefs_l = [complex(c) for c in np.asarray(coefs)]
    offsets_l = [int(o) for o in np.asarray(offsets)]
    cmax = max((abs(c) for c in coefs_l), default=0.0)
    if cmax < 1.0:
        cmax = 1.0
    dmax = max((sum(row) for row in exps_l), default=0)
    maxpow = dmax if dmax > 0 else 1

    x = [complex(z) for z in x0]
    prev_step = -1.0
    contracted = False
    stationary = False
    res = 0.0
    status = NO_CONVERGENCE
    iters = 0
    # Success does not stop the loop: near a multiple root Newton contracts
    # only linearly, and the extra iterations are what lets the endpoints
    # of coincident paths collapse into one cluster.
    for it in range(max_iter + 1):
        pw = _powers(x, maxpow)
        aug = [[0.0 + 0.0j] * (nvars + 1) for _ in range(nvars)]
        grad = [0.0 + 0.0j] * nvars
        res2 = 0.0
        for i in range(nvars):
            f = _eval_eq(exps_l, coefs_l, offsets_l[i], offsets_l[i + 1], nvars, pw)
            m = _abs2(f)
            if m > res2:
                res2 = m
            _eval_eq_grad(exps_l, coefs_l, offsets_l[i], offsets_l[i + 1], nvars, pw, grad)
            for j in range(nvars):
                aug[i][j] = grad[j]
            aug[i][nvars] = -f
        res = res2**0.5
        target = target_fac * _scale(cmax, dmax, x)
        if res <= target and (contracted or it == 0):
            status = OK
            iters = it
        if it == max_iter or stationary:
            if status != OK:
                iters = it
            break
        dx = _solve_inplace(nvars, aug)
        if dx is None:
            if status != OK:
                status = SINGULAR
                iters = it
            break
        snorm2 = 0.0
        for j in range(nvars):
            x[j] = x[j] + dx[j]
            m = _abs2(dx[j])
            if m > snorm2:
                snorm2 = m
        snorm = snorm2**0.5
        if prev_step >= 0.0 and snorm <= prev_step:
            contracted = True
        prev_step = snorm
        # stationary: step is noise-level relative to the point
        xn2 = 0.0
        for xj in x:
            m = _abs2(xj)
            if m > xn2:
                xn2 = m
        if snorm <= 1e-15 * (1.0 + xn2**0.5):
            contracted = True
            stationary = True
    return np.array(x, dtype=np.complex128), status, iters, res, contracted


def backend_name() -> str:
    return "python"
