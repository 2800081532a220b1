# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: per-window CCNN encoding (per-pixel patches or whole
frames) and per-pixel SOS filtering.

Both loops are embarrassingly parallel (windows, rows). Work items never
share state, so results are identical for any thread count.
"""
import numpy as np

from cython.parallel cimport prange
from libc.math cimport exp
from libc.stdlib cimport free, malloc


cdef inline double _sigmoid(double x) nogil:
    cdef double e
    if x >= 0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


cdef void _encode_window(
    const double[:, :, ::1] stim, Py_ssize_t k,
    double df, double dl, double de,
    double vf, double vl, double ve, double beta,
    const double[:, ::1] mk, const double[:, ::1] wk,
    const double[::1] weights,
    double[:, :, ::1] out,
    double* F, double* L, double* E, double* Y, double* Yn,
) noexcept nogil:
    cdef Py_ssize_t H = stim.shape[1], W = stim.shape[2]
    cdef Py_ssize_t n = H * W
    cdef Py_ssize_t i, j, di, dj, ii, jj, step, idx
    cdef double my, wy, y, U, Fv, Lv, Ev
    cdef double* tmp
    for idx in range(n):
        F[idx] = 0.0
        L[idx] = 0.0
        E[idx] = 0.0
        Y[idx] = 0.0
        out[k, idx // W, idx % W] = 0.0
    for step in range(3):
        for i in range(H):
            for j in range(W):
                my = 0.0
                wy = 0.0
                for di in range(3):
                    ii = i + di - 1
                    if ii < 0 or ii >= H:
                        continue
                    for dj in range(3):
                        jj = j + dj - 1
                        if jj < 0 or jj >= W:
                            continue
                        y = Y[ii * W + jj]
                        if mk[di, dj] != 0.0:
                            my = my + mk[di, dj] * y
                        if wk[di, dj] != 0.0:
                            wy = wy + wk[di, dj] * y
                idx = i * W + j
                Fv = df * F[idx] + vf * my + stim[k + step, i, j]
                Lv = dl * L[idx] + vl * wy
                U = Fv * (1.0 + beta * Lv)
                Ev = de * E[idx] + ve * Y[idx]
                F[idx] = Fv
                L[idx] = Lv
                E[idx] = Ev
                Yn[idx] = _sigmoid(U - Ev)
                out[k, i, j] += weights[step] * Yn[idx]
        tmp = Y
        Y = Yn
        Yn = tmp


def ccnn_window_real_sums(stim, decay, coupling, m_kernel, w_kernel, weights, int threads=1):
    cdef const double[:, :, ::1] s = np.ascontiguousarray(stim, dtype=np.float64)
    cdef const double[:, ::1] mk = np.ascontiguousarray(m_kernel, dtype=np.float64)
    cdef const double[:, ::1] wk = np.ascontiguousarray(w_kernel, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t T = s.shape[0], H = s.shape[1], W = s.shape[2]
    cdef Py_ssize_t n_win = max(T - 2, 0)
    result = np.empty((n_win, H, W), dtype=np.float64)
    cdef double[:, :, ::1] out = result
    cdef double df = decay[0], dl = decay[1], de = decay[2]
    cdef double vf = coupling[0], vl = coupling[1], ve = coupling[2], beta = coupling[3]
    cdef Py_ssize_t k, n = H * W
    cdef double* buf
    cdef bint failed = False
    if threads < 1:
        threads = 1
    for k in prange(n_win, nogil=True, num_threads=threads, schedule="static"):
        buf = <double*> malloc(5 * n * sizeof(double))
        if buf == NULL:
            failed = True
        else:
            _encode_window(s, k, df, dl, de, vf, vl, ve, beta, mk, wk, w, out,
                           buf, buf + n, buf + 2 * n, buf + 3 * n, buf + 4 * n)
            free(buf)
    if failed:
        raise MemoryError("window state allocation failed")
    return result


cdef inline Py_ssize_t _clamp(Py_ssize_t v, Py_ssize_t hi) noexcept nogil:
    if v < 0:
        return 0
    if v > hi:
        return hi
    return v


cdef void _encode_patches(
    const double[:, :, ::1] stim, Py_ssize_t k,
    double df, double dl, double de,
    double vf, double vl, double ve, double beta,
    const double[:, ::1] mk, const double[:, ::1] wk,
    const double[::1] weights,
    double[:, :, ::1] out,
) noexcept nogil:
    # one isolated 3x3 lattice per pixel, stimulus edge-replicated at borders
    cdef Py_ssize_t H = stim.shape[1], W = stim.shape[2]
    cdef Py_ssize_t i, j, a, b, da, db, aa, bb, step, q
    cdef double F[9]
    cdef double L[9]
    cdef double E[9]
    cdef double Y[9]
    cdef double Yn[9]
    cdef double S[9]
    cdef double my, wy, y, U, acc
    for i in range(H):
        for j in range(W):
            for q in range(9):
                F[q] = 0.0
                L[q] = 0.0
                E[q] = 0.0
                Y[q] = 0.0
            acc = 0.0
            for step in range(3):
                for a in range(3):
                    for b in range(3):
                        S[a * 3 + b] = stim[k + step, _clamp(i + a - 1, H - 1), _clamp(j + b - 1, W - 1)]
                for a in range(3):
                    for b in range(3):
                        my = 0.0
                        wy = 0.0
                        for da in range(3):
                            aa = a + da - 1
                            if aa < 0 or aa > 2:
                                continue
                            for db in range(3):
                                bb = b + db - 1
                                if bb < 0 or bb > 2:
                                    continue
                                y = Y[aa * 3 + bb]
                                my = my + mk[da, db] * y
                                wy = wy + wk[da, db] * y
                        q = a * 3 + b
                        F[q] = df * F[q] + vf * my + S[q]
                        L[q] = dl * L[q] + vl * wy
                        U = F[q] * (1.0 + beta * L[q])
                        E[q] = de * E[q] + ve * Y[q]
                        Yn[q] = _sigmoid(U - E[q])
                for q in range(9):
                    Y[q] = Yn[q]
                acc = acc + weights[step] * Y[4]
            out[k, i, j] = acc


def ccnn_patch_real_sums(stim, decay, coupling, m_kernel, w_kernel, weights, int threads=1):
    cdef const double[:, :, ::1] s = np.ascontiguousarray(stim, dtype=np.float64)
    cdef const double[:, ::1] mk = np.ascontiguousarray(m_kernel, dtype=np.float64)
    cdef const double[:, ::1] wk = np.ascontiguousarray(w_kernel, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t T = s.shape[0], H = s.shape[1], W = s.shape[2]
    cdef Py_ssize_t n_win = max(T - 2, 0)
    result = np.empty((n_win, H, W), dtype=np.float64)
    cdef double[:, :, ::1] out = result
    cdef double df = decay[0], dl = decay[1], de = decay[2]
    cdef double vf = coupling[0], vl = coupling[1], ve = coupling[2], beta = coupling[3]
    cdef Py_ssize_t k
    if threads < 1:
        threads = 1
    for k in prange(n_win, nogil=True, num_threads=threads, schedule="static"):
        _encode_patches(s, k, df, dl, de, vf, vl, ve, beta, mk, wk, w, out)
    return result


cdef void _sosfilt_inplace(double* x, Py_ssize_t n, const double[:, ::1] sos,
                           const double[:, ::1] zi, double x0, double* z) noexcept nogil:
    cdef Py_ssize_t ns = sos.shape[0], t, sec
    cdef double xc, yn
    for sec in range(ns):
        z[2 * sec] = zi[sec, 0] * x0
        z[2 * sec + 1] = zi[sec, 1] * x0
    for t in range(n):
        xc = x[t]
        for sec in range(ns):
            yn = sos[sec, 0] * xc + z[2 * sec]
            z[2 * sec] = sos[sec, 1] * xc - sos[sec, 4] * yn + z[2 * sec + 1]
            z[2 * sec + 1] = sos[sec, 2] * xc - sos[sec, 5] * yn
            xc = yn
        x[t] = xc


cdef void _filter_row(const double[:, ::1] x, double[:, ::1] y, Py_ssize_t r,
                      const double[:, ::1] sos, const double[:, ::1] zi,
                      Py_ssize_t padlen, bint zero_phase, double* work, double* z) noexcept nogil:
    cdef Py_ssize_t n = x.shape[1], m = n + 2 * padlen, t
    cdef double tmp
    if not zero_phase:
        for t in range(n):
            work[t] = x[r, t]
        _sosfilt_inplace(work, n, sos, zi, work[0], z)
        for t in range(n):
            y[r, t] = work[t]
        return
    # odd extension
    for t in range(padlen):
        work[t] = 2.0 * x[r, 0] - x[r, padlen - t]
        work[padlen + n + t] = 2.0 * x[r, n - 1] - x[r, n - 2 - t]
    for t in range(n):
        work[padlen + t] = x[r, t]
    _sosfilt_inplace(work, m, sos, zi, work[0], z)
    for t in range(m // 2):
        tmp = work[t]
        work[t] = work[m - 1 - t]
        work[m - 1 - t] = tmp
    _sosfilt_inplace(work, m, sos, zi, work[0], z)
    for t in range(n):
        y[r, t] = work[m - 1 - padlen - t]


def sos_filter_rows(sos, zi, x, Py_ssize_t padlen, bint zero_phase=True, int threads=1):
    cdef const double[:, ::1] s = np.ascontiguousarray(sos, dtype=np.float64)
    cdef const double[:, ::1] z0 = np.ascontiguousarray(zi, dtype=np.float64)
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t P = xv.shape[0], n = xv.shape[1], r
    result = np.empty((P, n), dtype=np.float64)
    cdef double[:, ::1] yv = result
    cdef Py_ssize_t m = n + 2 * padlen
    cdef Py_ssize_t ns = s.shape[0]
    cdef double* work
    cdef bint failed = False
    if threads < 1:
        threads = 1
    for r in prange(P, nogil=True, num_threads=threads, schedule="static"):
        work = <double*> malloc((m + 2 * ns) * sizeof(double))
        if work == NULL:
            failed = True
        else:
            _filter_row(xv, yv, r, s, z0, padlen, zero_phase, work, work + m)
            free(work)
    if failed:
        raise MemoryError("filter work buffer allocation failed")
    return result
