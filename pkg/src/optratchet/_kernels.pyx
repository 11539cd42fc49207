# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Bessel backward recurrence and the RK4 site loop.

Mirrors ``_purepy`` exactly; see there for the algorithms.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, sqrt, fabs, isfinite

cnp.import_array()

cdef double _BIG = 1e250
cdef double _SMALL = 1e-250
cdef double _TINY_X = 1e-30


cpdef long miller_start(long nmax, double x):
    cdef long top = nmax
    if <long>ceil(x) > top:
        top = <long>ceil(x)
    cdef long m = top + 20 + <long>ceil(sqrt(40.0 * (top if top > 1 else 1)))
    return m + (m & 1)


def bessel_table(long nmax, double x):
    cdef cnp.ndarray[double, ndim=1] arr = np.zeros(nmax + 1)
    cdef double[::1] out = arr
    cdef long n, k, i, m
    cdef double term, two_over_x, j_next, j_cur, j_prev, norm
    if x == 0.0:
        out[0] = 1.0
        return arr
    if x < _TINY_X:
        term = 1.0
        out[0] = 1.0
        for n in range(1, nmax + 1):
            term *= x / (2.0 * n)
            if term == 0.0:
                break
            out[n] = term
        return arr

    m = miller_start(nmax, x)
    two_over_x = 2.0 / x
    j_next = 0.0
    j_cur = 1.0
    norm = 2.0
    for n in range(m, 0, -1):
        j_prev = n * two_over_x * j_cur - j_next
        j_next = j_cur
        j_cur = j_prev
        k = n - 1
        if fabs(j_cur) > _BIG:
            j_cur *= _SMALL
            j_next *= _SMALL
            norm *= _SMALL
            for i in range(k + 1, nmax + 1):
                out[i] *= _SMALL
        if k <= nmax:
            out[k] = j_cur
        if k > 0 and k % 2 == 0:
            norm += 2.0 * j_cur
    norm += j_cur
    for i in range(nmax + 1):
        out[i] /= norm
    return arr


cdef inline void _rhs(const double* vr, const double* vi, double* kr, double* ki,
                      const double* d, double c, Py_ssize_t n) noexcept nogil:
    # k = -i (d v + C (v[j-1] + v[j+1])), hard walls at both ends
    cdef Py_ssize_t j
    if n == 1:
        kr[0] = d[0] * vi[0]
        ki[0] = -d[0] * vr[0]
        return
    kr[0] = d[0] * vi[0] + c * vi[1]
    ki[0] = -(d[0] * vr[0] + c * vr[1])
    for j in range(1, n - 1):
        kr[j] = d[j] * vi[j] + c * (vi[j - 1] + vi[j + 1])
        ki[j] = -(d[j] * vr[j] + c * (vr[j - 1] + vr[j + 1]))
    kr[n - 1] = d[n - 1] * vi[n - 1] + c * vi[n - 2]
    ki[n - 1] = -(d[n - 1] * vr[n - 1] + c * vr[n - 2])


def rk4_evolve(amps, detuning, double coupling, double h, long nsteps):
    cdef cnp.ndarray[double complex, ndim=2] arr = np.array(amps, dtype=np.complex128, order="C", copy=True)
    cdef double[::1] d = np.ascontiguousarray(detuning, dtype=np.float64)
    cdef Py_ssize_t nb = arr.shape[0]
    cdef Py_ssize_t n = arr.shape[1]
    cdef double[:, ::1] yr_all = np.ascontiguousarray(arr.real)
    cdef double[:, ::1] yi_all = np.ascontiguousarray(arr.imag)
    cdef double[::1] kr = np.empty(n)
    cdef double[::1] ki = np.empty(n)
    cdef double[::1] tr = np.empty(n)
    cdef double[::1] ti = np.empty(n)
    cdef double[::1] ar = np.empty(n)
    cdef double[::1] ai = np.empty(n)
    cdef double* yr
    cdef double* yi
    cdef double half = 0.5 * h
    cdef double sixth = h / 6.0
    cdef Py_ssize_t b, j
    cdef long step
    cdef long bad = -1

    if d.shape[0] != n:
        raise ValueError("detuning length does not match the state")
    with nogil:
        for b in range(nb):
            yr = &yr_all[b, 0]
            yi = &yi_all[b, 0]
            for step in range(nsteps):
                _rhs(yr, yi, &kr[0], &ki[0], &d[0], coupling, n)
                for j in range(n):
                    ar[j] = kr[j]
                    ai[j] = ki[j]
                    tr[j] = yr[j] + half * kr[j]
                    ti[j] = yi[j] + half * ki[j]
                _rhs(&tr[0], &ti[0], &kr[0], &ki[0], &d[0], coupling, n)
                for j in range(n):
                    ar[j] = ar[j] + 2.0 * kr[j]
                    ai[j] = ai[j] + 2.0 * ki[j]
                    tr[j] = yr[j] + half * kr[j]
                    ti[j] = yi[j] + half * ki[j]
                _rhs(&tr[0], &ti[0], &kr[0], &ki[0], &d[0], coupling, n)
                for j in range(n):
                    ar[j] = ar[j] + 2.0 * kr[j]
                    ai[j] = ai[j] + 2.0 * ki[j]
                    tr[j] = yr[j] + h * kr[j]
                    ti[j] = yi[j] + h * ki[j]
                _rhs(&tr[0], &ti[0], &kr[0], &ki[0], &d[0], coupling, n)
                for j in range(n):
                    yr[j] = yr[j] + sixth * (ar[j] + kr[j])
                    yi[j] = yi[j] + sixth * (ai[j] + ki[j])
                if (step & 1023) == 1023:
                    for j in range(n):
                        if not (isfinite(yr[j]) and isfinite(yi[j])):
                            bad = step
                            break
                    if bad >= 0:
                        break
            if bad < 0:
                for j in range(n):
                    if not (isfinite(yr[j]) and isfinite(yi[j])):
                        bad = nsteps - 1
                        break
            if bad >= 0:
                break
    out = np.asarray(yr_all) + 1j * np.asarray(yi_all)
    return out, bad
