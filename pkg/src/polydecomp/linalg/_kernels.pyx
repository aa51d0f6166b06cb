# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled GF(p) kernels: in-place Gauss-Jordan elimination and matmul.

Entries are int64 holding canonical residues in [0, p).  Moduli below 2**31
reduce products with a double-precision quotient estimate (exact after one
correction step); larger moduli (up to 2**61 - 1) widen to 128 bits.
"""

import numpy as np

cdef extern from *:
    """
    typedef unsigned __int128 pd_u128;
    static inline unsigned long long pd_mulmod(unsigned long long a,
                                               unsigned long long b,
                                               unsigned long long p) {
        return (unsigned long long)(((pd_u128)a * b) % p);
    }
    /* a, b < p < 2**31: a*b < 2**62 and the float quotient is off by at most one */
    static inline unsigned long long pd_mulmod_small(unsigned long long a,
                                                     unsigned long long b,
                                                     unsigned long long p,
                                                     double pinv) {
        unsigned long long q = (unsigned long long)((double)a * (double)b * pinv);
        long long r = (long long)(a * b - q * p);
        if (r < 0) r += (long long)p;
        else if (r >= (long long)p) r -= (long long)p;
        return (unsigned long long)r;
    }
    """
    ctypedef unsigned long long pd_u128
    unsigned long long pd_mulmod(unsigned long long a, unsigned long long b,
                                 unsigned long long p) nogil
    unsigned long long pd_mulmod_small(unsigned long long a, unsigned long long b,
                                       unsigned long long p, double pinv) nogil

ctypedef unsigned long long u64
ctypedef long long i64

cdef u64 SMALL = 1ULL << 31


def rref_modp(i64[:, ::1] a, u64 p):
    """Reduce ``a`` to reduced row echelon form in place; return pivot columns."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef u64 inv, f, negf, x, y
    cdef i64 t
    cdef bint small = p < SMALL
    cdef double pinv = 1.0 / <double>p
    pivots = []
    for c in range(n):
        if r == m:
            break
        piv = -1
        for i in range(r, m):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, n):
                t = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = t
        inv = <u64>pow(<object>a[r, c], -1, <object>p)
        if inv != 1:
            with nogil:
                for j in range(c, n):
                    x = <u64>a[r, j]
                    if x:
                        if small:
                            a[r, j] = <i64>pd_mulmod_small(x, inv, p, pinv)
                        else:
                            a[r, j] = <i64>pd_mulmod(x, inv, p)
        with nogil:
            for i in range(m):
                if i == r:
                    continue
                f = <u64>a[i, c]
                if f == 0:
                    continue
                negf = p - f
                if small:
                    for j in range(c, n):
                        x = <u64>a[r, j]
                        if x:
                            y = <u64>a[i, j] + pd_mulmod_small(negf, x, p, pinv)
                            a[i, j] = <i64>(y - p if y >= p else y)
                else:
                    for j in range(c, n):
                        x = <u64>a[r, j]
                        if x:
                            y = <u64>a[i, j] + pd_mulmod(negf, x, p)
                            a[i, j] = <i64>(y - p if y >= p else y)
        pivots.append(c)
        r += 1
    return pivots


def matmul_modp(i64[:, ::1] a, i64[:, ::1] bt, u64 p):
    """Return ``a @ bt.T mod p``; ``bt`` is the transposed right factor."""
    cdef Py_ssize_t m = a.shape[0], k = a.shape[1], n = bt.shape[0]
    cdef Py_ssize_t i, j, s
    cdef pd_u128 acc
    cdef bint small = p < SMALL
    out = np.zeros((m, n), dtype=np.int64)
    cdef i64[:, ::1] o = out
    if k != bt.shape[1]:
        raise ValueError("inner dimensions differ")
    with nogil:
        for i in range(m):
            for j in range(n):
                acc = 0
                if small:
                    for s in range(k):
                        acc = acc + <pd_u128>(<u64>a[i, s] * <u64>bt[j, s])
                else:
                    for s in range(k):
                        acc = acc + <pd_u128>pd_mulmod(<u64>a[i, s], <u64>bt[j, s], p)
                o[i, j] = <i64>(acc % p)
    return out
