# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled polynomial jet kernel.

Evaluates value, first and second holomorphic derivatives of a polynomial
map given in packed monomial form at a batch of points.
"""

cdef enum:
    MAXV = 64
    MAXD = 64


def poly_jet_batch(const double complex[::1] coeffs, const long[:, ::1] powers,
                   const long[::1] comp, const double complex[:, ::1] points,
                   double complex[:, ::1] val, double complex[:, :, ::1] d1,
                   double complex[:, :, :, ::1] d2):
    """Accumulate jets into the zeroed output buffers ``val``, ``d1``, ``d2``."""
    cdef Py_ssize_t P = points.shape[0]
    cdef Py_ssize_t m = points.shape[1]
    cdef Py_ssize_t T = coeffs.shape[0]
    cdef Py_ssize_t p, t, j, k, l, c
    cdef long e, deg = 0
    cdef double complex prod, term, ck
    cdef double complex pw[MAXV][MAXD + 1]
    cdef double complex p0[MAXV]
    cdef double complex p1[MAXV]
    cdef double complex p2[MAXV]
    if m > MAXV:
        raise ValueError("at most 64 variables supported")
    for t in range(T):
        for j in range(m):
            if powers[t, j] > deg:
                deg = powers[t, j]
    if deg > MAXD:
        raise ValueError("degree above 64 not supported")
    with nogil:
        for p in range(P):
            for j in range(m):
                pw[j][0] = 1.0
                for e in range(1, deg + 1):
                    pw[j][e] = pw[j][e - 1] * points[p, j]
            for t in range(T):
                c = comp[t]
                for j in range(m):
                    e = powers[t, j]
                    p0[j] = pw[j][e]
                    p1[j] = e * pw[j][e - 1] if e >= 1 else 0.0
                    p2[j] = e * (e - 1) * pw[j][e - 2] if e >= 2 else 0.0
                prod = coeffs[t]
                for j in range(m):
                    prod = prod * p0[j]
                val[p, c] = val[p, c] + prod
                for k in range(m):
                    if powers[t, k] == 0:
                        continue
                    ck = coeffs[t] * p1[k]
                    term = ck
                    for j in range(m):
                        if j != k:
                            term = term * p0[j]
                    d1[p, c, k] = d1[p, c, k] + term
                    term = coeffs[t] * p2[k]
                    for j in range(m):
                        if j != k:
                            term = term * p0[j]
                    d2[p, c, k, k] = d2[p, c, k, k] + term
                    for l in range(k + 1, m):
                        term = ck * p1[l]
                        for j in range(m):
                            if j != k and j != l:
                                term = term * p0[j]
                        d2[p, c, k, l] = d2[p, c, k, l] + term
                        d2[p, c, l, k] = d2[p, c, l, k] + term
