# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled twins of the kernels in ``_pyref``.

Same call signatures, same status codes, same arithmetic; only the inner
loops are typed.  Keep the two implementations in lockstep; the backend
parity tests compare full traces between them.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, log, sqrt
from scipy.linalg.cython_blas cimport dgemv

cnp.import_array()

# status codes; values mirror _pyref
DEF PERIOD_DONE = 0
DEF REACHED_END = 1
DEF COLLISION = 2
DEF STANDSTILL = 3
DEF RESOLUTION = 4
DEF BUFFER_FULL = 5

DEF RULE_THEOREM1 = 0
DEF RULE_THEOREM2 = 1


cdef inline void _matvec_add(double[:, ::1] a, double[::1] x, double[::1] z,
                             double[::1] out, Py_ssize_t n) noexcept:
    # out = a @ x + z; a is row major, so BLAS sees its transpose
    cdef char* trans = b"T"
    cdef int ni = <int> n
    cdef int inc = 1
    cdef double one = 1.0
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = z[i]
    dgemv(trans, &ni, &ni, &one, &a[0, 0], &ni, &x[0], &inc, &one, &out[0], &inc)


def advance_period(
    double[::1] xp,
    double[::1] u,
    long long c,
    long long c_end,
    long long nbar,
    int rule_kind,
    double alpha,
    double inflate,
    double tick,
    double growth_c,
    double inv_tau,
    double inv_h,
    double mu,
    double phi,
    long long[::1] ia,
    long long[::1] ib,
    double[::1] lengths,
    long long[::1] vel_idx,
    double v_stop,
    dict cache,
    dict z_cache,
    object expm_cb,
    long long[::1] out_ticks,
    double[:, ::1] out_dists,
    double[:, ::1] out_vels,
    object out_states,
    Py_ssize_t row_start,
):
    cdef Py_ssize_t cap = out_ticks.shape[0]
    cdef Py_ssize_t row = row_start
    cdef Py_ssize_t dim = xp.shape[0]
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t nd = ia.shape[0]
    cdef Py_ssize_t nv = vel_idx.shape[0]
    cdef Py_ssize_t i, k
    cdef double acc, dmin, vmax, xp_norm, denom, raw, xt_norm, di
    cdef long long nu, delta
    cdef long long last_delta = -1
    cdef bint keep_states = out_states is not None
    cdef double[:, ::1] states_mv
    cdef double[:, ::1] p11
    cdef double[:, ::1] p12
    cdef double[::1] zv
    cdef object entry, zobj
    cdef cnp.ndarray tmp_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] tmp = tmp_arr
    cdef cnp.ndarray znew

    if keep_states:
        states_mv = out_states

    # per-call constants: the input block is frozen for the whole period
    cdef double bu2 = (u[0] * inv_tau) * (u[0] * inv_tau)
    for k in range(1, m):
        bu2 += (u[k] * inv_h) * (u[k] * inv_h)
    cdef double bu_norm = sqrt(bu2)
    cdef double u_norm2 = 0.0
    for k in range(m):
        u_norm2 += u[k] * u[k]

    while True:
        if row == cap:
            return BUFFER_FULL, row, c
        out_ticks[row] = c
        dmin = 1e300
        for k in range(nd):
            di = xp[ia[k]] - xp[ib[k]] - lengths[k]
            out_dists[row, k] = di
            if di < dmin:
                dmin = di
        vmax = 0.0
        for k in range(nv):
            di = xp[vel_idx[k]]
            out_vels[row, k] = di
            if fabs(di) > vmax:
                vmax = fabs(di)
        if keep_states:
            for k in range(dim):
                states_mv[row, k] = xp[k]
            for k in range(m):
                states_mv[row, dim + k] = u[k]
        row += 1

        if dmin <= 0.0:
            return COLLISION, row, c
        if vmax <= v_stop:
            return STANDSTILL, row, c
        if c == c_end:
            return REACHED_END, row, c

        acc = 0.0
        for k in range(dim):
            acc += xp[k] * xp[k]
        xp_norm = sqrt(acc)
        if rule_kind == RULE_THEOREM1:
            denom = xp_norm + bu_norm / growth_c
            if denom == 0.0:
                nu = nbar
            else:
                raw = log(alpha / (1.4142135623730951 * denom) + 1.0) / growth_c
                raw = floor(raw * inflate / tick)
                if raw < 1.0:
                    return RESOLUTION, row, c
                nu = nbar if raw > <double> nbar else <long long> raw
        else:
            xt_norm = sqrt(xp_norm * xp_norm + u_norm2)
            if xt_norm == 0.0:
                nu = nbar
            else:
                raw = log(mu * alpha / (phi * xt_norm) + 1.0) / mu
                raw = floor(raw * inflate / tick)
                if raw < 1.0:
                    return RESOLUTION, row, c
                nu = nbar if raw > <double> nbar else <long long> raw

        delta = nbar - c % nbar
        if nu < delta:
            delta = nu

        # adaptive steps change size rarely, so most iterations reuse the
        # views resolved for the previous delta and skip the dict traffic
        if delta != last_delta:
            entry = cache.get(delta)
            if entry is None:
                entry = expm_cb(delta)
            zobj = z_cache.get(delta)
            if zobj is None:
                p12 = entry[1]
                znew = np.empty(dim, dtype=np.float64)
                zv = znew
                for i in range(dim):
                    acc = 0.0
                    for k in range(m):
                        acc += p12[i, k] * u[k]
                    zv[i] = acc
                z_cache[delta] = znew
                zobj = znew
            p11 = entry[0]
            zv = zobj
            last_delta = delta
        _matvec_add(p11, xp, zv, tmp, dim)
        for k in range(dim):
            xp[k] = tmp[k]
        c += delta
        if c % nbar == 0:
            return PERIOD_DONE, row, c


def interval_max_dev(
    p_sub,
    double[::1] xp0,
    double[::1] u0,
    Py_ssize_t substeps,
    long long[::1] ia,
    long long[::1] ib,
    double[::1] lengths,
):
    cdef double[:, ::1] p11 = p_sub[0]
    cdef double[:, ::1] p12 = p_sub[1]
    cdef Py_ssize_t dim = xp0.shape[0]
    cdef Py_ssize_t m = u0.shape[0]
    cdef Py_ssize_t nd = ia.shape[0]
    cdef Py_ssize_t s, i, k
    cdef double acc, dev, max_dev, min_d, di

    cdef cnp.ndarray xp_arr = np.array(xp0, dtype=np.float64, copy=True)
    cdef double[::1] xp = xp_arr
    cdef cnp.ndarray tmp_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] tmp = tmp_arr
    cdef cnp.ndarray z_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] z = z_arr
    cdef cnp.ndarray d0_arr = np.empty(nd, dtype=np.float64)
    cdef double[::1] d0 = d0_arr

    for i in range(dim):
        acc = 0.0
        for k in range(m):
            acc += p12[i, k] * u0[k]
        z[i] = acc

    max_dev = 0.0
    min_d = 1e300
    for k in range(nd):
        d0[k] = xp[ia[k]] - xp[ib[k]] - lengths[k]
        if d0[k] < min_d:
            min_d = d0[k]

    for s in range(substeps):
        _matvec_add(p11, xp, z, tmp, dim)
        for k in range(dim):
            xp[k] = tmp[k]
        for k in range(nd):
            di = xp[ia[k]] - xp[ib[k]] - lengths[k]
            dev = fabs(di - d0[k])
            if dev > max_dev:
                max_dev = dev
            if di < min_d:
                min_d = di
    return max_dev, min_d
