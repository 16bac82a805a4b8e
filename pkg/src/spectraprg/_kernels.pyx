# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic Jacobi, GF(2^a) arithmetic, Meka-Zuckerman expansion.

Every function here has a numpy twin in ``_pykernels`` with the same
signature and the same results (bit-identical for the integer kernels).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot
from libc.stdint cimport uint64_t, int8_t

cnp.import_array()

BACKEND = "cython"


cdef inline int _jacobi(double* a, double* v, int k, double tol_rel,
                        int max_sweeps, double* off_out) noexcept nogil:
    """In-place cyclic Jacobi on the row-major k*k array ``a``.

    Returns the number of sweeps used, or -1 if the budget ran out.
    ``v`` may be NULL when eigenvectors are not wanted.
    """
    cdef int p, q, r, sweep
    cdef double fro = 0.0, off, apq, theta, t, c, s, arp, arq
    for p in range(k * k):
        fro += a[p] * a[p]
    fro = sqrt(fro)
    if v != NULL:
        for p in range(k * k):
            v[p] = 0.0
        for p in range(k):
            v[p * k + p] = 1.0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(k):
            for q in range(p + 1, k):
                off += 2.0 * a[p * k + q] * a[p * k + q]
        off = sqrt(off)
        off_out[0] = off
        if off <= tol_rel * fro:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p * k + q]
                if apq == 0.0:
                    continue
                theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq)
                t = 1.0 / (fabs(theta) + hypot(theta, 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for r in range(k):
                    arp = a[r * k + p]
                    arq = a[r * k + q]
                    a[r * k + p] = c * arp - s * arq
                    a[r * k + q] = s * arp + c * arq
                for r in range(k):
                    arp = a[p * k + r]
                    arq = a[q * k + r]
                    a[p * k + r] = c * arp - s * arq
                    a[q * k + r] = s * arp + c * arq
                a[p * k + q] = 0.0
                a[q * k + p] = 0.0
                if v != NULL:
                    for r in range(k):
                        arp = v[r * k + p]
                        arq = v[r * k + q]
                        v[r * k + p] = c * arp - s * arq
                        v[r * k + q] = s * arp + c * arq
    return -1


def jacobi_eigh(const double[:, ::1] m, double tol_rel=1e-12, int max_sweeps=100):
    """Eigen-decomposition of one symmetric matrix.

    Returns ``(w, V, sweeps, off)`` with ``w`` sorted non-increasing and
    ``sweeps == -1`` if the sweep budget was exhausted.
    """
    cdef int k = m.shape[0]
    a = np.array(m, dtype=np.float64, order="C")
    v = np.empty((k, k), dtype=np.float64)
    cdef double[:, ::1] av = a
    cdef double[:, ::1] vv = v
    cdef double off = 0.0
    cdef int sweeps
    if k == 0:
        return np.empty(0), v, 0, 0.0
    with nogil:
        sweeps = _jacobi(&av[0, 0], &vv[0, 0], k, tol_rel, max_sweeps, &off)
    w = np.diagonal(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order], sweeps, off


def batch_lambda_max(const double[:, :, ::1] mats, double tol_rel=1e-12, int max_sweeps=100):
    """Largest eigenvalue of every matrix in an (N, k, k) stack.

    Raises ``ArithmeticError`` if any matrix fails to converge.
    """
    cdef Py_ssize_t N = mats.shape[0], i
    cdef int k = mats.shape[1], p, sweeps
    cdef int failed = 0
    out = np.empty(N, dtype=np.float64)
    cdef double[::1] ov = out
    work = np.empty((k, k), dtype=np.float64)
    cdef double[:, ::1] wv = work
    cdef double off = 0.0, best
    if k == 0:
        out[:] = -np.inf
        return out
    with nogil:
        for i in range(N):
            for p in range(k * k):
                (&wv[0, 0])[p] = (&mats[i, 0, 0])[p]
            sweeps = _jacobi(&wv[0, 0], NULL, k, tol_rel, max_sweeps, &off)
            if sweeps < 0:
                failed = 1
            best = wv[0, 0]
            for p in range(1, k):
                if wv[p, p] > best:
                    best = wv[p, p]
            ov[i] = best
    if failed:
        raise ArithmeticError("Jacobi iteration did not converge for some matrix in the batch")
    return out


cdef inline uint64_t _gf_mul(uint64_t x, uint64_t y, int a, uint64_t poly) noexcept nogil:
    cdef uint64_t r = 0
    cdef int i
    while y:
        if y & 1:
            r ^= x
        y >>= 1
        x <<= 1
    for i in range(2 * a - 2, a - 1, -1):
        if (r >> i) & 1:
            r ^= poly << (i - a)
    return r


cdef inline uint64_t _horner(const uint64_t* coeffs, int w, uint64_t x, int a,
                             uint64_t poly) noexcept nogil:
    cdef uint64_t acc = 0
    cdef int j
    for j in range(w - 1, -1, -1):
        acc = _gf_mul(acc, x, a, poly) ^ coeffs[j]
    return acc


def gf_mul(uint64_t x, uint64_t y, int a, uint64_t poly):
    return _gf_mul(x, y, a, poly)


def poly_eval_batch(const uint64_t[:, ::1] coeffs, const uint64_t[::1] points, int a, uint64_t poly):
    """Evaluate N polynomials (coefficients low degree first) at P points."""
    cdef Py_ssize_t N = coeffs.shape[0], P = points.shape[0], i, j
    cdef int w = coeffs.shape[1]
    out = np.zeros((N, P), dtype=np.uint64)
    cdef uint64_t[:, ::1] ov = out
    if w == 0:
        return out
    with nogil:
        for i in range(N):
            for j in range(P):
                ov[i, j] = _horner(&coeffs[i, 0], w, points[j], a, poly)
    return out


def mz_expand_batch(const uint64_t[:, ::1] hash_coeffs, const uint64_t[:, :, ::1] block_coeffs,
                    int n, int b, uint64_t hash_poly, int a, uint64_t block_poly, int log2t):
    """Meka-Zuckerman outputs for N seeds as an (N, n) int8 array of +-1.

    Coordinate j goes to bucket h(j) (top ``log2t`` bits of the hash
    polynomial at field element j) and takes the next unused bit of that
    bucket's generator (low bit of its polynomial at element 0, 1, ...).
    """
    cdef Py_ssize_t N = hash_coeffs.shape[0], s
    cdef int wh = hash_coeffs.shape[1], wb = block_coeffs.shape[2]
    cdef int t = block_coeffs.shape[1]
    cdef int j, bucket, pos
    cdef uint64_t hv, bv
    out = np.empty((N, n), dtype=np.int8)
    cdef int8_t[:, ::1] ov = out
    counters = np.zeros(t, dtype=np.intc)
    cdef int[::1] cv = counters
    with nogil:
        for s in range(N):
            for j in range(t):
                cv[j] = 0
            for j in range(n):
                if log2t == 0 or wh == 0:
                    bucket = 0
                else:
                    hv = _horner(&hash_coeffs[s, 0], wh, <uint64_t>j, b, hash_poly)
                    bucket = <int>(hv >> (b - log2t))
                pos = cv[bucket]
                cv[bucket] = pos + 1
                if wb == 0:
                    bv = 0
                else:
                    bv = _horner(&block_coeffs[s, bucket, 0], wb, <uint64_t>pos, a, block_poly)
                ov[s, j] = 1 - 2 * <int8_t>(bv & 1)
    return out
