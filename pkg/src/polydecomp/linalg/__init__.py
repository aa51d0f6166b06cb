"""Exact dense linear algebra over a :class:`~polydecomp.field.FieldCtx`.

Prime-field matrices are int64 numpy arrays of canonical residues and are
reduced by the compiled kernel when available (see :mod:`._backend`);
rational matrices are object arrays of ``Fraction`` and always use the
numpy fallback.  Pivoting takes the first nonzero entry in column order, so
callers control the echelon shape through the column order they choose.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import CtxMismatch, DimMismatch, NoSolution
from ..field import FieldCtx, FieldElem
from . import _backend, _fallback
from ._backend import available as available_backends
from ._backend import get_backend, set_backend, use_backend

__all__ = [
    "Matrix",
    "rref",
    "rank",
    "kernel",
    "solve",
    "solve_columns",
    "row_space_equal",
    "row_space_intersect",
    "matmul",
    "rref_array",
    "matmul_array",
    "available_backends",
    "get_backend",
    "set_backend",
    "use_backend",
]


# -- raw-array layer (used by polyspace) ---------------------------------

def empty(ctx: FieldCtx, nrows: int, ncols: int) -> np.ndarray:
    if ctx.is_prime:
        return np.zeros((nrows, ncols), dtype=np.int64)
    a = np.empty((nrows, ncols), dtype=object)
    a.fill(Fraction(0))
    return a


def rref_array(ctx: FieldCtx, a: np.ndarray, copy: bool = True) -> tuple[np.ndarray, list[int]]:
    """RREF of a raw array; returns ``(array, pivot columns)``."""
    if copy:
        a = a.copy()
    if a.shape[0] == 0 or a.shape[1] == 0:
        return a, []
    if ctx.is_prime:
        a = np.ascontiguousarray(a, dtype=np.int64)
        pivots = _backend.rref_modp(a, ctx.p)
    else:
        pivots = _fallback.rref_inplace(a, None)
    return a, list(pivots)


def row_basis_array(ctx: FieldCtx, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    r, piv = rref_array(ctx, a)
    return r[: len(piv)], piv


def matmul_array(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimMismatch(f"cannot multiply {a.shape} by {b.shape}")
    if a.shape[0] == 0 or b.shape[1] == 0 or a.shape[1] == 0:
        return empty(ctx, a.shape[0], b.shape[1])
    if ctx.is_prime:
        return _backend.matmul_modp(np.ascontiguousarray(a), np.ascontiguousarray(b), ctx.p)
    return a @ b


def intersect_arrays(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """RREF basis of rowspace(a) ∩ rowspace(b) by the Zassenhaus block method."""
    if a.shape[1] != b.shape[1]:
        raise DimMismatch(f"{a.shape[1]} vs {b.shape[1]} columns")
    n = a.shape[1]
    a, _ = row_basis_array(ctx, a)
    b, _ = row_basis_array(ctx, b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return empty(ctx, 0, n)
    block = empty(ctx, a.shape[0] + b.shape[0], 2 * n)
    block[: a.shape[0], :n] = a
    block[: a.shape[0], n:] = a
    block[a.shape[0]:, :n] = b
    r, piv = rref_array(ctx, block, copy=False)
    rows = [i for i, c in enumerate(piv) if c >= n]
    inter = r[rows, n:] if rows else empty(ctx, 0, n)
    return row_basis_array(ctx, inter)[0]


def solve_columns(ctx: FieldCtx, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, list[bool]]:
    """Solve ``a @ x_j = b[:, j]`` for every column ``j`` at once.

    Returns ``(x, ok)`` where ``x`` has one column per right-hand side (free
    variables set to zero) and ``ok[j]`` tells whether column ``j`` is
    consistent.  Inconsistent columns hold garbage.
    """
    m, n = a.shape
    if b.shape[0] != m:
        raise DimMismatch(f"{m} equations but {b.shape[0]} right-hand-side rows")
    k = b.shape[1]
    aug = empty(ctx, m, n + k)
    aug[:, :n] = a
    aug[:, n:] = b
    r, piv = rref_array(ctx, aug, copy=False)
    rank_a = sum(1 for c in piv if c < n)
    tail = r[rank_a:, n:]
    ok = [not tail[:, j].any() for j in range(k)] if tail.size else [True] * k
    x = empty(ctx, n, k)
    for i, c in enumerate(piv[:rank_a]):
        x[c, :] = r[i, n:]
    return x, ok


# -- Matrix value type ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense matrix over ``ctx``; ``data`` must not be mutated after construction."""

    ctx: FieldCtx
    data: np.ndarray

    @classmethod
    def from_rows(cls, ctx: FieldCtx, rows: Sequence[Sequence], ncols: int | None = None) -> "Matrix":
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        a = empty(ctx, len(rows), ncols)
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise DimMismatch(f"row {i} has {len(row)} entries, expected {ncols}")
            for j, v in enumerate(row):
                if isinstance(v, FieldElem):
                    if v.ctx != ctx:
                        raise CtxMismatch(f"{v.ctx} vs {ctx}")
                    v = v.value
                a[i, j] = ctx.reduce(v)
        return cls(ctx, a)

    @classmethod
    def identity(cls, ctx: FieldCtx, n: int) -> "Matrix":
        a = empty(ctx, n, n)
        for i in range(n):
            a[i, i] = ctx.one
        return cls(ctx, a)

    @classmethod
    def zeros(cls, ctx: FieldCtx, nrows: int, ncols: int) -> "Matrix":
        return cls(ctx, empty(ctx, nrows, ncols))

    @property
    def nrows(self) -> int:
        return self.data.shape[0]

    @property
    def ncols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def entries(self) -> list[list[FieldElem]]:
        return [[FieldElem(self.ctx, self._raw(v)) for v in row] for row in self.data]

    def _raw(self, v):
        return int(v) if self.ctx.is_prime else v

    def row(self, i) -> list[FieldElem]:
        return [FieldElem(self.ctx, self._raw(v)) for v in self.data[i]]

    def __getitem__(self, ij) -> FieldElem:
        return FieldElem(self.ctx, self._raw(self.data[ij]))

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.ctx == other.ctx and self.shape == other.shape and bool(np.all(self.data == other.data))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return matmul(self, other)

    def transpose(self) -> "Matrix":
        return Matrix(self.ctx, np.ascontiguousarray(self.data.T))

    def stack(self, other: "Matrix") -> "Matrix":
        _check_pair(self, other)
        return Matrix(self.ctx, np.vstack([self.data, other.data]))

    def to_tsv(self) -> str:
        fmt = self.ctx.format
        return "\n".join("\t".join(fmt(self._raw(v)) for v in row) for row in self.data)

    def __repr__(self):
        return f"Matrix({self.ctx}, {self.nrows}x{self.ncols})"


def _check_pair(a: Matrix, b: Matrix):
    if a.ctx != b.ctx:
        raise CtxMismatch(f"{a.ctx} vs {b.ctx}")
    if a.ncols != b.ncols:
        raise DimMismatch(f"{a.ncols} vs {b.ncols} columns")


def rref(m: Matrix) -> tuple[Matrix, list[int], int]:
    """Reduced row echelon form (same shape, zero rows last), pivots, rank."""
    r, piv = rref_array(m.ctx, m.data)
    return Matrix(m.ctx, r), piv, len(piv)


def rank(m: Matrix) -> int:
    return len(rref_array(m.ctx, m.data)[1])


def row_basis(m: Matrix) -> Matrix:
    return Matrix(m.ctx, row_basis_array(m.ctx, m.data)[0])


def kernel(m: Matrix) -> Matrix:
    """Basis (as rows) of the right null space ``{x : m @ x = 0}``."""
    ctx = m.ctx
    r, piv = rref_array(ctx, m.data)
    n = m.ncols
    free = [c for c in range(n) if c not in set(piv)]
    out = empty(ctx, len(free), n)
    for k, f in enumerate(free):
        out[k, f] = ctx.one
        for i, c in enumerate(piv):
            out[k, c] = ctx.neg(r[i, f]) if ctx.is_prime else -r[i, f]
    return Matrix(ctx, out)


def solve(a: Matrix, b: Sequence) -> list[FieldElem]:
    """One solution of ``a @ x = b`` (free variables zero); raises NoSolution."""
    ctx = a.ctx
    if len(b) != a.nrows:
        raise DimMismatch(f"{a.nrows} equations but {len(b)} right-hand-side entries")
    col = Matrix.from_rows(ctx, [[v] for v in b], ncols=1).data if len(b) else empty(ctx, 0, 1)
    x, ok = solve_columns(ctx, a.data, col)
    if not ok[0]:
        raise NoSolution("inconsistent linear system")
    return [FieldElem(ctx, int(v) if ctx.is_prime else v) for v in x[:, 0]]


def row_space_equal(a: Matrix, b: Matrix) -> bool:
    _check_pair(a, b)
    ra, _ = row_basis_array(a.ctx, a.data)
    rb, _ = row_basis_array(b.ctx, b.data)
    return ra.shape == rb.shape and bool(np.all(ra == rb))


def row_space_intersect(a: Matrix, b: Matrix) -> Matrix:
    _check_pair(a, b)
    return Matrix(a.ctx, intersect_arrays(a.ctx, a.data, b.data))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.ctx != b.ctx:
        raise CtxMismatch(f"{a.ctx} vs {b.ctx}")
    return Matrix(a.ctx, matmul_array(a.ctx, a.data, b.data))
