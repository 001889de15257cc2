# cython: language_level=3
"""Compiled synchronous round loops for the built-in quadratic families."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

ctypedef cnp.int64_t i64


cdef void _proj_block(i64 kind, Py_ssize_t o0, Py_ssize_t o1,
                      const double[::1] lo, const double[::1] hi,
                      const double[::1] cen, double rad,
                      double[::1] buf) noexcept:
    # Clamp (box) or radially rescale (ball) entries [o0, o1) of a d-vector.
    cdef Py_ssize_t j
    cdef double nr = 0.0, diff, scale
    if kind == 0:
        for j in range(o0, o1):
            if buf[j] < lo[j]:
                buf[j] = lo[j]
            elif buf[j] > hi[j]:
                buf[j] = hi[j]
    else:
        for j in range(o0, o1):
            diff = buf[j] - cen[j]
            nr += diff * diff
        nr = sqrt(nr)
        if nr > rad:
            scale = rad / nr
            for j in range(o0, o1):
                buf[j] = cen[j] + (buf[j] - cen[j]) * scale


cdef double _quad_cost(const double[:, ::1] A, const double[::1] x, const double[::1] bt) noexcept:
    # ||A x - b_t||^2
    cdef Py_ssize_t d = A.shape[0], row, j
    cdef double acc, tot = 0.0
    for row in range(d):
        acc = 0.0
        for j in range(d):
            acc += A[row, j] * x[j]
        acc -= bt[row]
        tot += acc * acc
    return tot


cdef double _quad_con(const double[:, ::1] Qk, const double[:, ::1] qt, Py_ssize_t k,
                      double rhotk, const double[::1] x) noexcept:
    # x'Q_k x + q_{k,t}'x - rho_{k,t}
    cdef Py_ssize_t d = Qk.shape[0], row, j
    cdef double acc, quad = 0.0, lin = 0.0
    for row in range(d):
        acc = 0.0
        for j in range(d):
            acc += Qk[row, j] * x[j]
        quad += acc * x[row]
        lin += qt[k, row] * x[row]
    return quad + lin - rhotk


def run_dopbc_quadratic(
    const double[:, ::1] W, double[:, ::1] X, double[:, ::1] L,
    const double[:, ::1] A, const double[::1] b0, const double[::1] bamp, const i64[::1] jb,
    const double[:, :, ::1] Q, const double[:, ::1] q0, const double[:, ::1] qamp, const i64[::1] jq,
    const double[::1] rho0, const double[::1] rhoamp, const i64[::1] jr,
    const double[::1] sintab,
    const i64[::1] kinds, const i64[::1] offs, const double[::1] lo, const double[::1] hi,
    const double[::1] cen, const double[::1] rad,
    const double[::1] alphas, double lambda_max,
    double[::1] cost_a, double[:, ::1] g_a,
    double[::1] cost_avg, double[:, ::1] g_avg,
    double[::1] delta, double[:, ::1] lam_bar, double[:, ::1] mean_g,
    i64[::1] clips, double[:, ::1] actions,
):
    cdef Py_ssize_t T = alphas.shape[0]
    cdef Py_ssize_t N = W.shape[0]
    cdef Py_ssize_t d = A.shape[0]
    cdef Py_ssize_t m = Q.shape[0]
    cdef Py_ssize_t P = sintab.shape[0]
    cdef Py_ssize_t tt, t, i, j, k, l, row, o0, o1
    cdef double alpha, acc, diff, dd, gval, lin, pre, lam
    cdef i64 clipcount

    cdef double[:, ::1] Xh = np.empty((N, d))
    cdef double[:, ::1] Lh = np.empty((N, m))
    cdef double[::1] bt = np.empty(d)
    cdef double[:, ::1] qt = np.empty((m, d))
    cdef double[::1] rhot = np.empty(m)
    cdef double[::1] xbar = np.empty(d)
    cdef double[::1] a = np.empty(d)
    cdef double[::1] rA = np.empty(d)
    cdef double[::1] y = np.empty(d)
    cdef double[::1] dloc = np.empty(d)
    cdef double[::1] gvals = np.empty(m)

    for tt in range(T):
        t = tt + 1
        alpha = alphas[tt]

        for j in range(d):
            bt[j] = b0[j] + sintab[(t + jb[j]) % P] * bamp[j]
        for k in range(m):
            acc = sintab[(t + jq[k]) % P]
            for j in range(d):
                qt[k, j] = q0[k, j] + acc * qamp[k, j]
            rhot[k] = rho0[k] + sintab[(t + jr[k]) % P] * rhoamp[k]

        # pre-round network averages and consensus error
        for j in range(d):
            acc = 0.0
            for i in range(N):
                acc += X[i, j]
            xbar[j] = acc / N
        dd = 0.0
        for i in range(N):
            for j in range(d):
                diff = X[i, j] - xbar[j]
                dd += diff * diff
        delta[tt] = sqrt(dd)
        for k in range(m):
            acc = 0.0
            for i in range(N):
                acc += L[i, k]
            lam_bar[tt, k] = acc / N

        # consensus
        for i in range(N):
            for j in range(d):
                acc = 0.0
                for l in range(N):
                    acc += W[i, l] * X[l, j]
                Xh[i, j] = acc
            for k in range(m):
                acc = 0.0
                for l in range(N):
                    acc += W[i, l] * L[l, k]
                Lh[i, k] = acc

        # executed action: own projected block of the mixed belief
        for i in range(N):
            o0 = offs[i]
            o1 = offs[i + 1]
            for j in range(o0, o1):
                a[j] = Xh[i, j]
            _proj_block(kinds[i], o0, o1, lo, hi, cen, rad[i], a)
        for j in range(d):
            actions[tt, j] = a[j]

        cost_a[tt] = _quad_cost(A, a, bt)
        cost_avg[tt] = _quad_cost(A, xbar, bt)
        for k in range(m):
            g_a[tt, k] = _quad_con(Q[k], qt, k, rhot[k], a)
            g_avg[tt, k] = _quad_con(Q[k], qt, k, rhot[k], xbar)
            mean_g[tt, k] = 0.0

        # per-agent primal/dual updates against the frozen mixed snapshot
        clipcount = 0
        for i in range(N):
            o0 = offs[i]
            o1 = offs[i + 1]
            for row in range(d):
                acc = 0.0
                for j in range(d):
                    acc += A[row, j] * Xh[i, j]
                rA[row] = acc - bt[row]
            for j in range(o0, o1):
                acc = 0.0
                for row in range(d):
                    acc += A[row, j] * rA[row]
                dloc[j] = 2.0 * acc
            for k in range(m):
                for row in range(d):
                    acc = 0.0
                    for j in range(d):
                        acc += Q[k, row, j] * Xh[i, j]
                    y[row] = acc
                gval = 0.0
                lin = 0.0
                for j in range(d):
                    gval += y[j] * Xh[i, j]
                    lin += qt[k, j] * Xh[i, j]
                gval += lin - rhot[k]
                gvals[k] = gval
                mean_g[tt, k] += gval / N
                lam = Lh[i, k]
                for j in range(o0, o1):
                    dloc[j] += lam * (2.0 * y[j] + qt[k, j])
            for j in range(d):
                X[i, j] = Xh[i, j]
            for j in range(o0, o1):
                X[i, j] = Xh[i, j] - alpha * dloc[j]
            _proj_block(kinds[i], o0, o1, lo, hi, cen, rad[i], X[i])
            for k in range(m):
                pre = Lh[i, k] + alpha * gvals[k]
                if pre > lambda_max:
                    L[i, k] = lambda_max
                    clipcount += 1
                elif pre < 0.0:
                    L[i, k] = 0.0
                else:
                    L[i, k] = pre
        clips[tt] = clipcount

    # post-horizon state diagnostics
    for j in range(d):
        acc = 0.0
        for i in range(N):
            acc += X[i, j]
        xbar[j] = acc / N
    dd = 0.0
    for i in range(N):
        for j in range(d):
            diff = X[i, j] - xbar[j]
            dd += diff * diff
    delta[T] = sqrt(dd)
    for k in range(m):
        acc = 0.0
        for i in range(N):
            acc += L[i, k]
        lam_bar[T, k] = acc / N


def run_baseline_separable(
    const double[:, ::1] W, double[::1] x, double[:, ::1] L, double[:, ::1] Z,
    const double[::1] b0, const double[::1] bamp, const i64[::1] jb, double rho,
    const double[::1] sintab,
    const i64[::1] kinds, const i64[::1] offs, const double[::1] lo, const double[::1] hi,
    const double[::1] cen, const double[::1] rad,
    const i64[::1] nbr_ptr, const i64[::1] nbr_idx,
    const double[::1] alphas, double lambda_max,
    double[::1] cost_a, double[:, ::1] g_a,
    double[::1] cost_avg, double[:, ::1] g_avg,
    double[::1] delta, double[:, ::1] lam_bar,
    i64[::1] clips, double[:, ::1] actions, double[::1] viol_sum,
):
    cdef Py_ssize_t T = alphas.shape[0]
    cdef Py_ssize_t N = W.shape[0]
    cdef Py_ssize_t d = x.shape[0]
    cdef Py_ssize_t P = sintab.shape[0]
    cdef Py_ssize_t tt, t, i, j, l, o0, o1, pos, jn
    cdef double alpha, acc, diff, dd, gloc, pre, vs, share
    cdef i64 clipcount

    cdef double[::1] bt = np.empty(d)
    cdef double[::1] zbar = np.empty(d)
    cdef double[::1] xnew = np.empty(d)
    cdef double[::1] Lh = np.empty(N)

    share = rho / N

    for tt in range(T):
        t = tt + 1
        alpha = alphas[tt]
        for j in range(d):
            bt[j] = b0[j] + sintab[(t + jb[j]) % P] * bamp[j]

        # broadcast current decisions to neighbors (assembled copies)
        for i in range(N):
            o0 = offs[i]
            o1 = offs[i + 1]
            for j in range(o0, o1):
                Z[i, j] = x[j]
            for pos in range(nbr_ptr[i], nbr_ptr[i + 1]):
                jn = nbr_idx[pos]
                for j in range(offs[jn], offs[jn + 1]):
                    Z[i, j] = x[j]

        for j in range(d):
            acc = 0.0
            for i in range(N):
                acc += Z[i, j]
            zbar[j] = acc / N
        dd = 0.0
        for i in range(N):
            for j in range(d):
                diff = Z[i, j] - zbar[j]
                dd += diff * diff
        delta[tt] = sqrt(dd)
        acc = 0.0
        for i in range(N):
            acc += L[i, 0]
        lam_bar[tt, 0] = acc / N

        for i in range(N):
            acc = 0.0
            for l in range(N):
                acc += W[i, l] * L[l, 0]
            Lh[i] = acc

        # executed action is the concatenation of current local decisions
        acc = 0.0
        dd = 0.0
        for j in range(d):
            actions[tt, j] = x[j]
            diff = x[j] - bt[j]
            acc += diff * diff
            dd += x[j]
        cost_a[tt] = acc
        g_a[tt, 0] = dd - rho

        acc = 0.0
        dd = 0.0
        for j in range(d):
            diff = zbar[j] - bt[j]
            acc += diff * diff
            dd += zbar[j]
        cost_avg[tt] = acc
        g_avg[tt, 0] = dd - rho

        vs = 0.0
        clipcount = 0
        for i in range(N):
            o0 = offs[i]
            o1 = offs[i + 1]
            gloc = -share
            for j in range(o0, o1):
                gloc += x[j]
            if gloc > 0.0:
                vs += gloc
            for j in range(o0, o1):
                xnew[j] = x[j] - alpha * (2.0 * (x[j] - bt[j]) + Lh[i])
            _proj_block(kinds[i], o0, o1, lo, hi, cen, rad[i], xnew)
            # leaky ascent: stationary multiplier tracks the N-scaled violation
            pre = Lh[i] + alpha * (N * gloc - Lh[i])
            if pre > lambda_max:
                L[i, 0] = lambda_max
                clipcount += 1
            elif pre < 0.0:
                L[i, 0] = 0.0
            else:
                L[i, 0] = pre
        for j in range(d):
            x[j] = xnew[j]
        viol_sum[tt] = vs
        clips[tt] = clipcount

    # final exchange and post-horizon diagnostics
    for i in range(N):
        o0 = offs[i]
        o1 = offs[i + 1]
        for j in range(o0, o1):
            Z[i, j] = x[j]
        for pos in range(nbr_ptr[i], nbr_ptr[i + 1]):
            jn = nbr_idx[pos]
            for j in range(offs[jn], offs[jn + 1]):
                Z[i, j] = x[j]
    for j in range(d):
        acc = 0.0
        for i in range(N):
            acc += Z[i, j]
        zbar[j] = acc / N
    dd = 0.0
    for i in range(N):
        for j in range(d):
            diff = Z[i, j] - zbar[j]
            dd += diff * diff
    delta[T] = sqrt(dd)
    acc = 0.0
    for i in range(N):
        acc += L[i, 0]
    lam_bar[T, 0] = acc / N
