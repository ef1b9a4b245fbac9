# cython: language_level=3
"""Compiled path-tracking kernel.

Twin of _kernel_py: same predictor, corrector, step control, and pivoted
elimination, transcribed loop for loop.  Any algorithmic change here must
be mirrored there.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdlib cimport free, malloc

cnp.import_array()

ARRIVED = 0
DIVERGED = 1
STALLED = 2

OK = 0
SINGULAR = 1
NO_CONVERGENCE = 2

END_ZONE = 1e-10

cdef int _ARRIVED = 0
cdef int _DIVERGED = 1
cdef int _STALLED = 2
cdef int _OK = 0
cdef int _SINGULAR = 1
cdef int _NO_CONVERGENCE = 2

cdef double _END_ZONE = 1e-10
cdef double _PIVOT_FLOOR = 1e-300

ctypedef double complex cplx


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _powers(int nvars, int maxpow, cplx* x, cplx* pw) noexcept nogil:
    cdef int j, k
    cdef cplx acc
    for j in range(nvars):
        pw[j * (maxpow + 1)] = 1.0
        acc = 1.0
        for k in range(maxpow):
            acc = acc * x[j]
            pw[j * (maxpow + 1) + k + 1] = acc


cdef cplx _eval_eq(int[:, ::1] exps, cplx[::1] coefs, int lo, int hi,
                   int nvars, int maxpow, cplx* pw) noexcept nogil:
    cdef cplx acc = 0.0
    cdef cplx v
    cdef int tix, j, e
    for tix in range(lo, hi):
        v = coefs[tix]
        for j in range(nvars):
            e = exps[tix, j]
            if e:
                v = v * pw[j * (maxpow + 1) + e]
        acc = acc + v
    return acc


cdef void _eval_eq_grad(int[:, ::1] exps, cplx[::1] coefs, int lo, int hi,
                        int nvars, int maxpow, cplx* pw, cplx* grad) noexcept nogil:
    cdef int tix, j, k, e, ek
    cdef cplx v
    for j in range(nvars):
        grad[j] = 0.0
    for tix in range(lo, hi):
        for j in range(nvars):
            e = exps[tix, j]
            if e == 0:
                continue
            v = coefs[tix] * e
            v = v * pw[j * (maxpow + 1) + e - 1]
            for k in range(nvars):
                if k == j:
                    continue
                ek = exps[tix, k]
                if ek:
                    v = v * pw[k * (maxpow + 1) + ek]
            grad[j] = grad[j] + v


cdef int _solve_inplace(int n, cplx* aug) noexcept nogil:
    """Gaussian elimination with partial pivoting on [A | b] (row-major,
    width n+1).  Solution lands in the last column.  Returns 0, or 1 if
    singular."""
    cdef int col, r, c, best
    cdef double bmag, m
    cdef cplx piv, f, acc, tmp
    cdef int w = n + 1
    for col in range(n):
        best = col
        bmag = _abs2(aug[col * w + col])
        for r in range(col + 1, n):
            m = _abs2(aug[r * w + col])
            if m > bmag:
                best = r
                bmag = m
        if bmag < _PIVOT_FLOOR:
            return 1
        if best != col:
            for c in range(w):
                tmp = aug[col * w + c]
                aug[col * w + c] = aug[best * w + c]
                aug[best * w + c] = tmp
        piv = aug[col * w + col]
        for r in range(col + 1, n):
            f = aug[r * w + col] / piv
            if f != 0:
                for c in range(col, w):
                    aug[r * w + c] = aug[r * w + c] - f * aug[col * w + c]
    for r in range(n - 1, -1, -1):
        acc = aug[r * w + n]
        for c in range(r + 1, n):
            acc = acc - aug[r * w + c] * aug[c * w + n]
        aug[r * w + n] = acc / aug[r * w + r]
    return 0


cdef double _scale(double cmax, int dmax, int nvars, cplx* x) noexcept nogil:
    cdef double xnorm2 = 0.0
    cdef double m, xnorm, p, s
    cdef int j
    for j in range(nvars):
        m = _abs2(x[j])
        if m > xnorm2:
            xnorm2 = m
    xnorm = sqrt(xnorm2)
    if xnorm < 1.0:
        xnorm = 1.0
    p = 1.0
    for j in range(dmax):
        p = p * xnorm
    s = cmax * p
    return s if s > 1.0 else 1.0


cdef double _homotopy_residual(int nvars, int[:, ::1] exps, cplx[::1] coefs,
                               int[::1] offsets, int[::1] degs, cplx gamma,
                               cplx* x, double t, int maxpow, cplx* pw) noexcept nogil:
    cdef double res2 = 0.0
    cdef double m
    cdef cplx f, g, h
    cdef int i
    _powers(nvars, maxpow, x, pw)
    for i in range(nvars):
        f = _eval_eq(exps, coefs, offsets[i], offsets[i + 1], nvars, maxpow, pw)
        g = pw[i * (maxpow + 1) + degs[i]] - 1.0
        h = gamma * (1.0 - t) * g + t * f
        m = _abs2(h)
        if m > res2:
            res2 = m
    return sqrt(res2)


cdef bint _correct(int nvars, int[:, ::1] exps, cplx[::1] coefs, int[::1] offsets,
                   int[::1] degs, cplx gamma, cplx* x, double t, int maxpow,
                   double tol, double trust, cplx* pw, cplx* aug, cplx* grad,
                   cplx* xref) noexcept nogil:
    # Fails if the iterates drift more than trust * (1 + |x|) from the
    # predicted point: a correction that large means the iteration left
    # the path's basin, not that the prediction had O(dt^2) error.
    cdef int it, i, j, d
    cdef int w = nvars + 1
    cdef cplx f, g, h
    cdef double res2, m, lim2, drift
    cdef double big0 = 0.0
    for j in range(nvars):
        xref[j] = x[j]
        m = _abs2(x[j])
        if m > big0:
            big0 = m
    lim2 = trust * (1.0 + sqrt(big0))
    lim2 = lim2 * lim2
    for it in range(3):
        _powers(nvars, maxpow, x, pw)
        res2 = 0.0
        for i in range(nvars):
            f = _eval_eq(exps, coefs, offsets[i], offsets[i + 1], nvars, maxpow, pw)
            g = pw[i * (maxpow + 1) + degs[i]] - 1.0
            h = gamma * (1.0 - t) * g + t * f
            m = _abs2(h)
            if m > res2:
                res2 = m
            _eval_eq_grad(exps, coefs, offsets[i], offsets[i + 1], nvars, maxpow, pw, grad)
            for j in range(nvars):
                aug[i * w + j] = t * grad[j]
            d = degs[i]
            if d > 0:
                aug[i * w + i] = aug[i * w + i] + gamma * (1.0 - t) * d * pw[i * (maxpow + 1) + d - 1]
            aug[i * w + nvars] = -h
        if sqrt(res2) <= tol:
            return True
        if _solve_inplace(nvars, aug):
            return False
        for j in range(nvars):
            x[j] = x[j] + aug[j * w + nvars]
        drift = 0.0
        for j in range(nvars):
            m = _abs2(x[j] - xref[j])
            if m > drift:
                drift = m
        if drift > lim2:
            return False
    return _homotopy_residual(nvars, exps, coefs, offsets, degs, gamma,
                              x, t, maxpow, pw) <= tol


cdef int _track_one(int nvars, int[:, ::1] exps, cplx[::1] coefs, int[::1] offsets,
                    int[::1] degs, cplx gamma, cplx* x,
                    int max_steps, double step_floor, double divergence,
                    double tol_fac, double trust, double cmax, int dmax, int maxpow,
                    cplx* pw, cplx* aug, cplx* grad, cplx* xtmp, cplx* xref,
                    int* steps_out) noexcept nogil:
    cdef double t = 0.0
    cdef double dt = 0.1
    cdef double t_new, tol, big, m
    cdef int streak = 0
    cdef int step, i, j, d
    cdef int w = nvars + 1
    cdef cplx f, g
    for step in range(max_steps):
        steps_out[0] = step
        if t >= 1.0:
            return _ARRIVED
        if dt > 1.0 - t:
            dt = 1.0 - t
        _powers(nvars, maxpow, x, pw)
        for i in range(nvars):
            f = _eval_eq(exps, coefs, offsets[i], offsets[i + 1], nvars, maxpow, pw)
            g = pw[i * (maxpow + 1) + degs[i]] - 1.0
            _eval_eq_grad(exps, coefs, offsets[i], offsets[i + 1], nvars, maxpow, pw, grad)
            for j in range(nvars):
                aug[i * w + j] = t * grad[j]
            d = degs[i]
            if d > 0:
                aug[i * w + i] = aug[i * w + i] + gamma * (1.0 - t) * d * pw[i * (maxpow + 1) + d - 1]
            aug[i * w + nvars] = gamma * g - f
        if _solve_inplace(nvars, aug):
            dt = dt * 0.5
            streak = 0
            if dt < step_floor:
                return _STALLED
            continue
        t_new = t + dt
        if 1.0 - t_new < _END_ZONE:
            t_new = 1.0
        for j in range(nvars):
            xtmp[j] = x[j] + aug[j * w + nvars] * dt
        tol = tol_fac * _scale(cmax, dmax, nvars, xtmp)
        if _correct(nvars, exps, coefs, offsets, degs, gamma, xtmp, t_new,
                    maxpow, tol, trust, pw, aug, grad, xref):
            for j in range(nvars):
                x[j] = xtmp[j]
            t = t_new
            big = 0.0
            for j in range(nvars):
                m = _abs2(x[j])
                if m > big:
                    big = m
            if sqrt(big) > divergence:
                return _DIVERGED
            streak += 1
            if streak >= 4:
                dt = dt * 1.5
                streak = 0
        else:
            dt = dt * 0.5
            streak = 0
            if dt < step_floor:
                return _STALLED
    steps_out[0] = max_steps
    return _STALLED


def track_all(int nvars, exps, coefs, offsets, degs, gamma, starts,
              int max_steps, double step_floor, double divergence, double tol_fac,
              double trust):
    """Track every start point from t=0 to t=1.

    Returns (endpoints, status, steps) as numpy arrays.
    """
    cdef int[:, ::1] exps_v = np.ascontiguousarray(exps, dtype=np.int32)
    cdef cplx[::1] coefs_v = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef int[::1] offsets_v = np.ascontiguousarray(offsets, dtype=np.int32)
    cdef int[::1] degs_v = np.ascontiguousarray(degs, dtype=np.int32)
    cdef cplx[:, ::1] starts_v = np.ascontiguousarray(starts, dtype=np.complex128)
    cdef cplx gamma_c = gamma

    cdef double cmax = 1.0
    cdef int dmax = 0
    cdef int i, j, s
    for i in range(coefs_v.shape[0]):
        if abs(coefs_v[i]) > cmax:
            cmax = abs(coefs_v[i])
    for i in range(exps_v.shape[0]):
        s = 0
        for j in range(nvars):
            s += exps_v[i, j]
        if s > dmax:
            dmax = s
    for i in range(nvars):
        if degs_v[i] > dmax:
            dmax = degs_v[i]
    cdef int maxpow = dmax if dmax > 0 else 1

    cdef int m = starts_v.shape[0]
    ends = np.zeros((m, nvars), dtype=np.complex128)
    status = np.zeros(m, dtype=np.int32)
    steps = np.zeros(m, dtype=np.int32)
    cdef cplx[:, ::1] ends_v = ends
    cdef int[::1] status_v = status
    cdef int[::1] steps_v = steps

    cdef cplx* pw = <cplx*> malloc(nvars * (maxpow + 1) * sizeof(cplx))
    cdef cplx* aug = <cplx*> malloc(nvars * (nvars + 1) * sizeof(cplx))
    cdef cplx* grad = <cplx*> malloc(nvars * sizeof(cplx))
    cdef cplx* x = <cplx*> malloc(nvars * sizeof(cplx))
    cdef cplx* xtmp = <cplx*> malloc(nvars * sizeof(cplx))
    cdef cplx* xref = <cplx*> malloc(nvars * sizeof(cplx))
    if pw == NULL or aug == NULL or grad == NULL or x == NULL or xtmp == NULL or xref == NULL:
        free(pw); free(aug); free(grad); free(x); free(xtmp); free(xref)
        raise MemoryError()

    cdef int p, st, k
    try:
        with nogil:
            for p in range(m):
                for j in range(nvars):
                    x[j] = starts_v[p, j]
                k = 0
                st = _track_one(nvars, exps_v, coefs_v, offsets_v, degs_v, gamma_c,
                                x, max_steps, step_floor, divergence, tol_fac,
                                trust, cmax, dmax, maxpow, pw, aug, grad, xtmp,
                                xref, &k)
                for j in range(nvars):
                    ends_v[p, j] = x[j]
                status_v[p] = st
                steps_v[p] = k
    finally:
        free(pw); free(aug); free(grad); free(x); free(xtmp); free(xref)
    return ends, status, steps


def newton_refine(int nvars, exps, coefs, offsets, x0, int max_iter, double target_fac):
    """Newton iteration on the plain system F(x)=0.

    Returns (x, status, iterations, residual, contracted).
    """
    cdef int[:, ::1] exps_v = np.ascontiguousarray(exps, dtype=np.int32)
    cdef cplx[::1] coefs_v = np.ascontiguousarray(coefs, dtype=np.complex128)
    cdef int[::1] offsets_v = np.ascontiguousarray(offsets, dtype=np.int32)
    cdef cplx[::1] x0_v = np.ascontiguousarray(x0, dtype=np.complex128)

    cdef double cmax = 1.0
    cdef int dmax = 0
    cdef int i, j, s
    for i in range(coefs_v.shape[0]):
        if abs(coefs_v[i]) > cmax:
            cmax = abs(coefs_v[i])
    for i in range(exps_v.shape[0]):
        s = 0
        for j in range(nvars):
            s += exps_v[i, j]
        if s > dmax:
            dmax = s
    cdef int maxpow = dmax if dmax > 0 else 1

    cdef cplx* pw = <cplx*> malloc(nvars * (maxpow + 1) * sizeof(cplx))
    cdef cplx* aug = <cplx*> malloc(nvars * (nvars + 1) * sizeof(cplx))
    cdef cplx* grad = <cplx*> malloc(nvars * sizeof(cplx))
    cdef cplx* x = <cplx*> malloc(nvars * sizeof(cplx))
    if pw == NULL or aug == NULL or grad == NULL or x == NULL:
        free(pw); free(aug); free(grad); free(x)
        raise MemoryError()

    cdef int w = nvars + 1
    cdef int status = _NO_CONVERGENCE
    cdef int iters = 0
    cdef double prev_step = -1.0
    cdef bint contracted = False
    cdef bint stationary = False
    cdef double res = 0.0
    cdef double res2, mm, target, snorm2, snorm, xn2
    cdef cplx f
    cdef int it
    try:
        with nogil:
            for j in range(nvars):
                x[j] = x0_v[j]
            # Success does not stop the loop: near a multiple root Newton
            # contracts only linearly, and the extra iterations are what
            # lets the endpoints of coincident paths collapse into one
            # cluster.
            for it in range(max_iter + 1):
                _powers(nvars, maxpow, x, pw)
                res2 = 0.0
                for i in range(nvars):
                    f = _eval_eq(exps_v, coefs_v, offsets_v[i], offsets_v[i + 1],
                                 nvars, maxpow, pw)
                    mm = _abs2(f)
                    if mm > res2:
                        res2 = mm
                    _eval_eq_grad(exps_v, coefs_v, offsets_v[i], offsets_v[i + 1],
                                  nvars, maxpow, pw, grad)
                    for j in range(nvars):
                        aug[i * w + j] = grad[j]
                    aug[i * w + nvars] = -f
                res = sqrt(res2)
                target = target_fac * _scale(cmax, dmax, nvars, x)
                if res <= target and (contracted or it == 0):
                    status = _OK
                    iters = it
                if it == max_iter or stationary:
                    if status != _OK:
                        iters = it
                    break
                if _solve_inplace(nvars, aug):
                    if status != _OK:
                        status = _SINGULAR
                        iters = it
                    break
                snorm2 = 0.0
                for j in range(nvars):
                    x[j] = x[j] + aug[j * w + nvars]
                    mm = _abs2(aug[j * w + nvars])
                    if mm > snorm2:
                        snorm2 = mm
                snorm = sqrt(snorm2)
                if prev_step >= 0.0 and snorm <= prev_step:
                    contracted = True
                prev_step = snorm
                xn2 = 0.0
                for j in range(nvars):
                    mm = _abs2(x[j])
                    if mm > xn2:
                        xn2 = mm
                if snorm <= 1e-15 * (1.0 + sqrt(xn2)):
                    contracted = True
                    stationary = True
        out = np.zeros(nvars, dtype=np.complex128)
        for j in range(nvars):
            out[j] = x[j]
    finally:
        free(pw); free(aug); free(grad); free(x)
    return out, status, iters, res, contracted


def backend_name():
    return "compiled"
