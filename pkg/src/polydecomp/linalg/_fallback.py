"""Pure-Python (numpy) elimination kernels used when the extension is absent.

Moduli below 2**31 run on int64 arrays (products fit in 63 bits); larger
moduli and the rationals run on object arrays of Python ints / Fractions.
"""

from __future__ import annotations

import numpy as np

INT64_SAFE = 1 << 31


def rref_inplace(a: np.ndarray, p: int | None) -> list[int]:
    m, n = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        lead = a[r, c]
        if p is not None:
            inv = pow(int(lead), -1, p)
            if inv != 1:
                a[r, c:] = a[r, c:] * inv % p
        elif lead != 1:
            a[r, c:] = a[r, c:] / lead
        col = a[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            upd = a[rows, c:] - col[rows, None] * a[r, c:]
            a[rows, c:] = upd % p if p is not None else upd
        pivots.append(c)
        r += 1
    return pivots


def rref_modp(a: np.ndarray, p: int) -> list[int]:
    """In-place RREF of an int64 array over GF(p); same contract as the extension."""
    if p < INT64_SAFE:
        return rref_inplace(a, p)
    obj = a.astype(object)
    pivots = rref_inplace(obj, p)
    a[...] = obj.astype(np.int64)
    return pivots


def matmul_modp(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """``a @ b mod p`` without int64 overflow."""
    if p < INT64_SAFE and a.shape[1] < (1 << 15):
        lo = b & 0xFFFF
        hi = b >> 16
        return ((a @ hi % p) * 65536 + a @ lo) % p
    return (a.astype(object) @ b.astype(object) % p).astype(np.int64)
