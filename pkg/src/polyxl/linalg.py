"""Exact linear algebra over F_q.

Dense elimination is a blocked Gauss-Jordan: pivots are located on a narrow
column panel, the pivot rows are normalised with the inverse of their pivot
minor and every other row is updated with one field matrix product.  The result
equals the textbook leftmost-pivot RREF.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .field import FieldContext

__all__ = [
    "EchelonResult",
    "SparseMatrix",
    "SingularOrUnlucky",
    "Inconsistent",
    "NonUnitPivot",
    "rref",
    "rank",
    "left_kernel",
    "solve_dense",
    "inverse",
    "eliminate_columns",
    "berlekamp_massey",
    "wiedemann_solve",
]


class SingularOrUnlucky(ArithmeticError):
    pass


class Inconsistent(ArithmeticError):
    pass


class NonUnitPivot(ValueError):
    pass


@dataclass
class EchelonResult:
    matrix: np.ndarray
    pivots: list
    rank: int
    transform: np.ndarray | None = None


_SMALL_PANEL = 32


def _panel_pivots(ctx: FieldContext, P: np.ndarray):
    """Pivot rows/cols of a narrow panel (forward elimination on a scratch copy)."""
    if ctx.r == 1:
        from ._kernels import panel_pivots_prime

        return panel_pivots_prime(P.astype(np.int64), ctx.p, ctx._inv)
    if ctx.char2 and ctx.q <= 4096:
        from ._kernels import panel_pivots_table

        return panel_pivots_table(P.astype(np.int64), ctx.mul_table, ctx._inv)
    return _panel_pivots_numpy(ctx, P)


def _panel_pivots_numpy(ctx, P):
    P = P.astype(np.int64)
    rows, cols = P.shape
    used = np.zeros(rows, dtype=bool)
    prow, pcol = [], []
    for j in range(cols):
        cand = np.flatnonzero(~used & (P[:, j] != 0))
        if cand.size == 0:
            continue
        i = cand[0]
        used[i] = True
        prow.append(i)
        pcol.append(j)
        P[i] = ctx.mul(P[i], ctx.inv(int(P[i, j])))
        tgt = np.flatnonzero(~used & (P[:, j] != 0))
        if tgt.size:
            P[tgt] = ctx.sub(P[tgt], ctx.mul(P[tgt, j : j + 1], P[i]))
        if len(prow) == rows:
            break
    return np.array(prow, dtype=np.int64), np.array(pcol, dtype=np.int64)


def _echelon_inplace(ctx, M, limit, reduced, panel):
    """Blocked elimination of ``M`` in place.

    Returns (pivot columns, logical row order); rows ``order[:rank]`` are the
    pivot rows in pivot order, their pivot entries are 1.  Columns at or beyond
    ``limit`` never receive pivots.
    """
    R = M.shape[0]
    order = np.arange(R)
    pivots: list[int] = []
    rank = 0
    c0 = 0
    row_chunk = max(256, (1 << 26) // max(M.shape[1], 1))
    while c0 < limit and rank < R:
        c1 = min(limit, c0 + panel)
        rest = order[rank:]
        sub = M[rest, c0:c1]
        if not sub.any():
            c0 = c1
            continue
        if c1 - c0 <= _SMALL_PANEL:
            prow, pcol = _panel_pivots(ctx, sub)
        else:
            scratch = sub.copy()
            pc, sub_order = _echelon_inplace(ctx, scratch, c1 - c0, False, max(_SMALL_PANEL, panel // 8))
            prow = sub_order[: len(pc)]
            pcol = np.asarray(pc, dtype=np.int64)
        s = len(prow)
        if s == 0:
            c0 = c1
            continue
        S = rest[prow]
        pcols = c0 + np.asarray(pcol, dtype=np.int64)
        minor = M[np.ix_(S, pcols)]
        Z = inverse(ctx, minor, _panel=_SMALL_PANEL)
        MS = ctx.matmul(Z, M[S, c0:])
        M[S, c0:] = MS
        mask = np.ones(len(rest), dtype=bool)
        mask[prow] = False
        below = rest[mask]
        targets = np.concatenate([order[:rank], below]) if reduced else below
        for t0 in range(0, len(targets), row_chunk):
            idx = targets[t0 : t0 + row_chunk]
            coef = M[np.ix_(idx, pcols)]
            nz = coef.any(axis=1)
            if not nz.any():
                continue
            idx = idx[nz]
            M[idx, c0:] = ctx.matmul_sub(M[idx, c0:], coef[nz], MS)
        order = np.concatenate([order[:rank], S, below])
        pivots.extend(int(c) for c in pcols)
        rank += s
        c0 = c1
    return pivots, order


def _auto_panel(shape) -> int:
    return 512 if shape[1] > 6000 else 256 if shape[1] > 1500 else 128


def rref(ctx: FieldContext, M, pivot_cols_limit: int | None = None, transform: bool = False,
         panel: int | None = None) -> EchelonResult:
    """Reduced row echelon form with leftmost pivots.

    ``transform=True`` also returns E with E @ M == result (invertible).
    Pivots are only taken in the first ``pivot_cols_limit`` columns.
    """
    M = np.array(M, dtype=ctx.dtype, copy=True)
    if M.ndim != 2:
        raise ValueError("rref expects a 2-d matrix")
    R, W = M.shape
    limit = W if pivot_cols_limit is None else min(W, pivot_cols_limit)
    if transform:
        M = np.concatenate([M, np.eye(R, dtype=ctx.dtype)], axis=1)
    if R == 0 or W == 0:
        E = np.eye(R, dtype=ctx.dtype) if transform else None
        return EchelonResult(M[:, :W], [], 0, E)
    pivots, order = _echelon_inplace(ctx, M, limit, True, panel or _auto_panel(M.shape))
    M = M[order]
    E = M[:, W:].copy() if transform else None
    return EchelonResult(M[:, :W].copy(), pivots, len(pivots), E)


def echelon(ctx: FieldContext, M, pivot_cols_limit: int | None = None, panel: int | None = None,
            transform: bool = False) -> EchelonResult:
    """Row echelon form (no back-substitution); pivot entries are 1."""
    M = np.array(M, dtype=ctx.dtype, copy=True)
    R, W = M.shape
    if transform:
        M = np.concatenate([M, np.eye(R, dtype=ctx.dtype)], axis=1)
    if R == 0 or W == 0:
        E = np.eye(R, dtype=ctx.dtype) if transform else None
        return EchelonResult(M[:, :W], [], 0, E)
    limit = W if pivot_cols_limit is None else min(W, pivot_cols_limit)
    pivots, order = _echelon_inplace(ctx, M, limit, False, panel or _auto_panel(M.shape))
    M = M[order]
    E = M[:, W:].copy() if transform else None
    return EchelonResult(M[:, :W].copy(), pivots, len(pivots), E)


def rank(ctx: FieldContext, M) -> int:
    return echelon(ctx, M).rank


def inverse(ctx: FieldContext, A, _panel: int | None = None) -> np.ndarray:
    A = np.asarray(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("inverse expects a square matrix")
    if n == 1:
        if int(A[0, 0]) == 0:
            raise SingularOrUnlucky("matrix is singular")
        return np.array([[ctx.inv(int(A[0, 0]))]], dtype=ctx.dtype)
    if n <= _SMALL_PANEL:
        return _small_inverse(ctx, A)
    aug = np.concatenate([A.astype(ctx.dtype), np.eye(n, dtype=ctx.dtype)], axis=1)
    pivots, order = _echelon_inplace(ctx, aug, n, True, _panel or _auto_panel(aug.shape))
    if len(pivots) < n:
        raise SingularOrUnlucky("matrix is singular")
    return aug[order][:, n:].copy()


def _small_inverse(ctx, A):
    n = A.shape[0]
    M = np.concatenate([A.astype(np.int64), np.eye(n, dtype=np.int64)], axis=1)
    for c in range(n):
        cand = np.flatnonzero(M[c:, c]) + c
        if cand.size == 0:
            raise SingularOrUnlucky("matrix is singular")
        i = cand[0]
        if i != c:
            M[[c, i]] = M[[i, c]]
        M[c] = ctx.mul(M[c], ctx.inv(int(M[c, c])))
        col = M[:, c].copy()
        col[c] = 0
        nz = np.flatnonzero(col)
        if nz.size:
            M[nz] = ctx.sub(M[nz], ctx.mul(col[nz, None], M[c][None, :]))
    return M[:, n:].astype(ctx.dtype)


def left_kernel(ctx: FieldContext, B) -> tuple[np.ndarray, np.ndarray]:
    """Basis K of {y : y B = 0} plus the indices of a maximal independent row set.

    The independent set is the lexicographically first one; K has one row per
    remaining row of B, with a 1 in that row's position.
    """
    B = np.asarray(B)
    N = B.shape[0]
    res = rref(ctx, B.T)
    piv = np.array(res.pivots, dtype=np.int64)
    free = np.setdiff1d(np.arange(N), piv)
    K = np.zeros((len(free), N), dtype=ctx.dtype)
    if len(free):
        K[np.arange(len(free)), free] = 1
        if len(piv):
            K[:, piv] = ctx.neg(res.matrix[: len(piv)][:, free].T)
    return K, piv


def solve_dense(ctx: FieldContext, A, b) -> np.ndarray:
    """One solution of A x = b; raises Inconsistent when none exists."""
    A = np.asarray(A)
    b = np.asarray(b).reshape(-1, 1)
    n = A.shape[1]
    res = rref(ctx, np.concatenate([A.astype(ctx.dtype), b.astype(ctx.dtype)], axis=1), pivot_cols_limit=n)
    M = res.matrix
    if M[res.rank :, n].any():
        raise Inconsistent("right-hand side outside the column space")
    x = np.zeros(n, dtype=ctx.dtype)
    for i, c in enumerate(res.pivots):
        x[c] = M[i, n]
    return x


def eliminate_columns(ctx: FieldContext, targets, pivot_rows, columns: Sequence[int]):
    """Clear ``columns`` from ``targets`` using unit pivot rows.

    ``pivot_rows[i]`` must have a 1 in ``columns[i]``.
    """
    T = np.array(targets, dtype=ctx.dtype, copy=True)
    P = np.asarray(pivot_rows, dtype=ctx.dtype)
    cols = np.asarray(columns, dtype=np.int64)
    if P.ndim == 1:
        P = P[None, :]
    if T.ndim == 1:
        T = T[None, :]
        squeeze = True
    else:
        squeeze = False
    if len(cols) != P.shape[0]:
        raise ValueError("one pivot column per pivot row")
    for i, c in enumerate(cols):
        if int(P[i, c]) != 1:
            raise NonUnitPivot(f"pivot row {i} has entry {int(P[i, c])} in column {c}")
    # sequential so pivot rows that share columns are handled like textbook elimination
    for i, c in enumerate(cols):
        coef = T[:, c : c + 1].copy()
        if coef.any():
            T = np.asarray(ctx.sub(T, ctx.mul(coef, P[i][None, :]))).astype(ctx.dtype)
    return T[0] if squeeze else T


class SparseMatrix:
    """Row-compressed sparse matrix over F_q."""

    def __init__(self, ctx: FieldContext, shape, indptr, indices, data):
        self.ctx = ctx
        self.shape = tuple(shape)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=ctx.dtype)
        self._rows = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))

    @classmethod
    def from_dense(cls, ctx: FieldContext, A) -> "SparseMatrix":
        A = np.asarray(A)
        rows, cols = np.nonzero(A)
        indptr = np.zeros(A.shape[0] + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return cls(ctx, A.shape, np.cumsum(indptr), cols, A[rows, cols])

    @classmethod
    def from_rows(cls, ctx: FieldContext, ncols: int, rows: Sequence[Sequence[tuple[int, int]]]):
        indptr = [0]
        indices: list[int] = []
        data: list[int] = []
        for row in rows:
            for c, v in sorted(row):
                if v:
                    indices.append(c)
                    data.append(v)
            indptr.append(len(indices))
        return cls(ctx, (len(rows), ncols), indptr, indices, data)

    @property
    def nnz(self) -> int:
        return len(self.data)

    def row(self, i: int) -> list[tuple[int, int]]:
        s, e = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[s:e].tolist(), self.data[s:e].tolist()))

    def to_dense(self) -> np.ndarray:
        A = np.zeros(self.shape, dtype=self.ctx.dtype)
        A[self._rows, self.indices] = self.data
        return A

    def matvec(self, x) -> np.ndarray:
        F = self.ctx
        x = np.asarray(x)
        prod = np.asarray(F.mul(self.data, x[self.indices]), dtype=np.int64)
        out = np.zeros(self.shape[0], dtype=np.int64)
        if prod.size == 0:
            return out.astype(F.dtype)
        nonempty = np.diff(self.indptr) > 0
        starts = self.indptr[:-1][nonempty]
        if F.r == 1:
            out[nonempty] = np.add.reduceat(prod, starts) % F.p
        elif F.char2:
            out[nonempty] = np.bitwise_xor.reduceat(prod, starts)
        else:
            for i in np.flatnonzero(nonempty):
                out[i] = F.sum(prod[self.indptr[i] : self.indptr[i + 1]])
        return out.astype(F.dtype)


def berlekamp_massey(ctx: FieldContext, seq: Sequence[int]) -> list[int]:
    """Connection polynomial C (C[0] = 1) of the shortest recurrence.

    ``sum_j C[j] s[i-j] = 0`` for all i >= L; the minimal polynomial of the
    sequence is the reversal ``x^L C(1/x)``.
    """
    F = ctx
    s = np.asarray([int(v) for v in seq], dtype=np.int64)
    n = len(s)
    C = np.zeros(n + 2, dtype=np.int64)
    B = np.zeros(n + 2, dtype=np.int64)
    C[0] = B[0] = 1
    L, shift, b = 0, 1, 1
    for i in range(n):
        if L:
            d = F.add(int(s[i]), F.dot(C[1 : L + 1], s[i - L : i][::-1]))
        else:
            d = int(s[i])
        if d == 0:
            shift += 1
            continue
        coef = F.mul(d, F.inv(b))
        T = C.copy()
        span = n + 2 - shift
        C[shift:] = F.sub(C[shift:], F.mul(coef, B[:span]))
        if 2 * L <= i:
            L = i + 1 - L
            B = T
            b = d
            shift = 1
        else:
            shift += 1
    return [int(c) for c in C[: L + 1]]


def minimal_polynomial(ctx: FieldContext, seq: Sequence[int]) -> list[int]:
    """Monic minimal polynomial of a linearly recurrent sequence, low degree first."""
    C = berlekamp_massey(ctx, seq)
    return list(reversed(C))


def _poly_apply(A: SparseMatrix, coeffs: Sequence[int], v: np.ndarray) -> np.ndarray:
    """sum_i coeffs[i] A^i v by Horner."""
    F = A.ctx
    acc = np.zeros(A.shape[0], dtype=F.dtype)
    for c in reversed(list(coeffs)):
        acc = A.matvec(acc)
        if c:
            acc = np.asarray(F.add(acc, F.mul(c, v))).astype(F.dtype)
    return acc


def wiedemann_solve(A: SparseMatrix, b, seed: int = 0, retries: int = 8) -> np.ndarray:
    """Solve A x = b for square sparse A by Wiedemann's method.

    Each round projects the Krylov sequence of the current residual with a
    random vector, recovers a recurrence by Berlekamp-Massey and removes the
    part of the residual it annihilates.  A round that only finds a factor of
    the residual's minimal polynomial still makes progress; a fresh projection
    is drawn when a round makes none, and after ``retries`` consecutive stalls
    SingularOrUnlucky is raised.
    """
    F = A.ctx
    N = A.shape[0]
    if A.shape != (N, N):
        raise ValueError("wiedemann_solve needs a square matrix")
    rng = np.random.default_rng(seed)
    b = np.asarray(b, dtype=F.dtype)
    x = np.zeros(N, dtype=F.dtype)
    r = b.copy()
    stalls = 0
    rounds = 0
    while r.any():
        # every productive round lowers the degree of r's minimal polynomial
        if stalls >= retries or rounds >= 2 * N + retries:
            raise SingularOrUnlucky("no progress after retries")
        rounds += 1
        u = F.random(rng, N)
        seq = []
        v = r
        for _ in range(2 * N + 2):
            seq.append(F.dot(u, v))
            v = A.matvec(v)
        f = minimal_polynomial(F, seq)  # monic, low degree first
        if len(f) == 1 or f[0] == 0:
            # f(A) r looks like it kills r without a unit constant term: A may be singular
            stalls += 1
            continue
        # f(A) r = 0 approx  =>  r = -(1/f0) (f1 r + f2 A r + ...)  =>  x += -(1/f0) g(A) r
        g = f[1:]
        inv_f0 = F.inv(f[0])
        step = _poly_apply(A, g, r)
        step = np.asarray(F.mul(F.neg(inv_f0), step)).astype(F.dtype)
        x_new = np.asarray(F.add(x, step)).astype(F.dtype)
        r_new = np.asarray(F.sub(b, A.matvec(x_new))).astype(F.dtype)
        if np.count_nonzero(r_new) and np.array_equal(r_new, r):
            stalls += 1
            continue
        x, r = x_new, r_new
        stalls = 0
    if A.matvec(x).tolist() != b.tolist():  # pragma: no cover - guarded above
        raise Inconsistent("residual is nonzero")
    return x
